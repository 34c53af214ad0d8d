//! Spectrogram generation and the on-disk formats: WIRF surfaces, raw f32
//! audio with a sidecar, and ground-truth CSV.
//!
//! WIRF layout (all little-endian):
//!
//! ```text
//! offset  size  field
//!      0     4  magic "WIRF"
//!      4     4  u32 version (1)
//!      8     4  u32 N (snapshots)
//!     12     4  u32 K (bins)
//!     16     8  f64 t0
//!     24     8  f64 t_delta
//!     32     8  f64 f0
//!     40     8  f64 df
//!     48  16NK  (re, im) f64 pairs, snapshot-major
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::surface::ComplexSurface;

pub const WIRF_MAGIC: &[u8; 4] = b"WIRF";
pub const WIRF_VERSION: u32 = 1;
pub const WIRF_HEADER_LEN: usize = 48;

/// Byte length of a WIRF file holding an `n x k` surface.
pub fn wirf_len(n: usize, k: usize) -> usize {
    WIRF_HEADER_LEN + 16 * n * k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftParams {
    pub sample_rate: f64,
    /// Seconds of signal per snapshot.
    pub segment_s: f64,
    /// Seconds of zeros appended before the transform.
    pub zeropad_s: f64,
    pub overlap_frac: f64,
}

impl StftParams {
    /// 5 s Hamming segments, 5 s of zero padding, 50% overlap.
    pub fn field(sample_rate: f64) -> Self {
        Self {
            sample_rate,
            segment_s: 5.0,
            zeropad_s: 5.0,
            overlap_frac: 0.5,
        }
    }

    pub fn t_delta(&self) -> f64 {
        self.segment_s * (1.0 - self.overlap_frac)
    }

    /// Frequency resolution of the padded transform.
    pub fn bin_spacing(&self) -> f64 {
        1.0 / (self.segment_s + self.zeropad_s)
    }

    fn samples(&self, seconds: f64, what: &str) -> Result<usize> {
        let exact = seconds * self.sample_rate;
        let rounded = exact.round();
        if (exact - rounded).abs() > 1e-6 * exact.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "{what} of {seconds} s is not a whole number of samples at {} Hz",
                self.sample_rate
            )));
        }
        Ok(rounded as usize)
    }

    /// `(segment, fft length, hop)` in samples.
    fn lengths(&self) -> Result<(usize, usize, usize)> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if !(self.segment_s > 0.0) || !(self.zeropad_s >= 0.0) {
            return Err(Error::InvalidArgument("segment must be > 0, padding >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.overlap_frac) {
            return Err(Error::InvalidArgument("overlap must be in [0, 1)".into()));
        }
        let seg = self.samples(self.segment_s, "segment")?;
        let nfft = self.samples(self.segment_s + self.zeropad_s, "padded segment")?;
        let hop = self.samples(self.t_delta(), "hop")?;
        if seg < 2 || hop == 0 {
            return Err(Error::InvalidArgument("segment too short".into()));
        }
        Ok((seg, nfft, hop))
    }
}

/// Symmetric Hamming window `0.54 - 0.46 cos(2 pi m / (M - 1))`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|m| 0.54 - 0.46 * (2.0 * PI * m as f64 / denom).cos())
        .collect()
}

/// Short-time Fourier transform restricted to `band_hz` (inclusive).
///
/// Snapshot `n` covers samples `[n hop, n hop + segment)`; its time stamp is
/// the segment centre. Trailing partial segments are dropped.
pub fn stft(samples: &[f64], params: &StftParams, band_hz: [f64; 2]) -> Result<ComplexSurface> {
    let (seg, nfft, hop) = params.lengths()?;
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("sample {i}")));
    }
    if samples.len() < seg + hop {
        return Err(Error::InvalidArgument(format!(
            "{} samples give fewer than 2 snapshots",
            samples.len()
        )));
    }
    let n_snapshots = (samples.len() - seg) / hop + 1;

    let df = params.sample_rate / nfft as f64;
    let nyquist = params.sample_rate / 2.0;
    let [lo, hi] = band_hz;
    if !(lo >= 0.0 && hi <= nyquist && lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "band [{lo}, {hi}] Hz outside [0, {nyquist}]"
        )));
    }
    let tol = 1e-9 * df;
    let k_lo = ((lo - tol) / df).ceil().max(0.0) as usize;
    let k_hi = (((hi + tol) / df).floor() as usize).min(nfft / 2);
    if k_hi < k_lo + 1 {
        return Err(Error::InvalidArgument(format!(
            "band [{lo}, {hi}] Hz holds fewer than 2 bins"
        )));
    }
    let n_bins = k_hi - k_lo + 1;

    let window = hamming(seg);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut values = Vec::with_capacity(n_snapshots * n_bins);
    for n in 0..n_snapshots {
        let start = n * hop;
        for (m, slot) in buf.iter_mut().enumerate() {
            *slot = if m < seg {
                Complex64::new(samples[start + m] * window[m], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        values.extend_from_slice(&buf[k_lo..=k_hi]);
    }
    ComplexSurface::new(
        n_snapshots,
        n_bins,
        0.5 * params.segment_s,
        params.t_delta(),
        k_lo as f64 * df,
        df,
        values,
    )
}

/// Encodes a surface as WIRF bytes.
pub fn surface_to_bytes(s: &ComplexSurface) -> Vec<u8> {
    let mut out = Vec::with_capacity(wirf_len(s.n_snapshots(), s.n_bins()));
    out.extend_from_slice(WIRF_MAGIC);
    out.extend_from_slice(&WIRF_VERSION.to_le_bytes());
    out.extend_from_slice(&(s.n_snapshots() as u32).to_le_bytes());
    out.extend_from_slice(&(s.n_bins() as u32).to_le_bytes());
    for v in [s.t0(), s.t_delta(), s.f0(), s.df()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for z in s.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().expect("8 bytes"))
}

/// Decodes WIRF bytes.
pub fn surface_from_bytes(bytes: &[u8]) -> Result<ComplexSurface> {
    if bytes.len() < 4 || &bytes[..4] != WIRF_MAGIC {
        return Err(Error::Format("bad magic, not a WIRF file".into()));
    }
    if bytes.len() < WIRF_HEADER_LEN {
        return Err(Error::Truncated {
            expected: WIRF_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = u32_at(bytes, 4);
    if version != WIRF_VERSION {
        return Err(Error::Version(version));
    }
    let n = u32_at(bytes, 8) as usize;
    let k = u32_at(bytes, 12) as usize;
    let expected = wirf_len(n, k);
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let (t0, t_delta, f0, df) = (f64_at(bytes, 16), f64_at(bytes, 24), f64_at(bytes, 32), f64_at(bytes, 40));
    let values = bytes[WIRF_HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    ComplexSurface::new(n, k, t0, t_delta, f0, df, values)
}

pub fn save_surface(surface: &ComplexSurface, path: &Path) -> Result<()> {
    std::fs::write(path, surface_to_bytes(surface)).map_err(|e| Error::io(path, e))
}

pub fn load_surface(path: &Path) -> Result<ComplexSurface> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    surface_from_bytes(&bytes)
}

/// Sidecar path for a raw audio file: `<file>.cfg`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".cfg");
    PathBuf::from(s)
}

/// Reads headerless little-endian f32 mono samples and the `sample_rate`
/// key of the sidecar.
pub fn read_raw_audio(path: &Path) -> Result<(Vec<f64>, f64)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Format(format!(
            "raw audio length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    let side = KeyValues::read(&sidecar_path(path))?;
    let rate: f64 = side.require("sample_rate")?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Config(format!("bad sample_rate {rate}")));
    }
    Ok((samples, rate))
}

pub fn write_raw_audio(path: &Path, samples: &[f64], sample_rate: f64) -> Result<()> {
    let bytes: Vec<u8> = samples
        .iter()
        .flat_map(|&x| (x as f32).to_le_bytes())
        .collect();
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    std::fs::write(&side, format!("sample_rate = {sample_rate}\n")).map_err(|e| Error::io(side, e))
}

/// Ground-truth ranges on ascending times.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    points: Vec<(f64, f64)>,
}

impl GroundTruth {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::GroundTruth(format!(
                "need at least 2 rows, got {}",
                points.len()
            )));
        }
        if points.iter().any(|(t, r)| !t.is_finite() || !r.is_finite()) {
            return Err(Error::GroundTruth("non-finite value".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::GroundTruth("times must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linearly interpolated range; `None` outside the covered times.
    pub fn range_at(&self, t: f64) -> Option<f64> {
        let p = &self.points;
        if t < p[0].0 || t > p[p.len() - 1].0 {
            return None;
        }
        let i = p.partition_point(|&(ti, _)| ti <= t).clamp(1, p.len() - 1);
        let ((t0, r0), (t1, r1)) = (p[i - 1], p[i]);
        Some(r0 + (t - t0) / (t1 - t0) * (r1 - r0))
    }
}

/// Reads a `time_s,range_m` CSV; a non-numeric first row is taken as a header
/// and lines starting with `#` are skipped.
pub fn load_groundtruth(path: &Path) -> Result<GroundTruth> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::GroundTruth(format!("row {}: expected 2 columns", i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(t), Ok(r)) => points.push((t, r)),
            _ if i == 0 => continue,
            _ => return Err(Error::GroundTruth(format!("row {}: not numeric", i + 1))),
        }
    }
    GroundTruth::new(points)
}

pub fn save_groundtruth(points: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time_s", "range_m"])?;
    for (t, r) in points {
        w.write_record([t.to_string(), r.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
