//! Synthetic range-frequency surfaces with known ground truth.
//!
//! Each cell is `z = g * (s + a) + u`, where `g` is a real, positive channel
//! gain, `s` and `u` are circularly symmetric complex Gaussians (per-component
//! standard deviations `source_sigma` and `noise_sigma`), and `a` is a
//! constant tonal amplitude present only at tonal bins.
//!
//! The channel magnitude is
//!
//! ```text
//! |g(r, f)| = A(f) * S(ln f - beta ln r) * r^(-alpha),   S(u) = c0 + c1 cos(2 pi u / P + phase)
//! ```
//!
//! so with `alpha = 0` it is exactly constant along every striation
//! `f r^(-beta) = const` up to the per-frequency factor `A(f)`.
//!
//! Random draws come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed`, four standard normals per cell in snapshot-major, bin-minor order
//! (source re, source im, noise re, noise im).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{parse_list, KeyValues};
use crate::error::{Error, Result};
use crate::surface::{ComplexSurface, ParameterHypothesis, RangeRate};
use crate::transform::range_axis;

/// A per-bin positive quantity.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    PerBin(Vec<f64>),
    /// `scale * (f / f_ref)^exponent`
    PowerLaw { scale: f64, exponent: f64, f_ref: f64 },
}

impl Profile {
    pub fn at(&self, k: usize, f: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::PerBin(v) => v[k],
            Profile::PowerLaw {
                scale,
                exponent,
                f_ref,
            } => scale * (f / f_ref).powf(*exponent),
        }
    }

    fn check(&self, name: &str, n_bins: usize, allow_zero: bool) -> Result<()> {
        let ok = |v: f64| v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
        let good = match self {
            Profile::Constant(v) => ok(*v),
            Profile::PerBin(v) => v.len() == n_bins && v.iter().all(|&x| ok(x)),
            Profile::PowerLaw {
                scale,
                exponent,
                f_ref,
            } => ok(*scale) && exponent.is_finite() && *f_ref > 0.0,
        };
        if good {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid {name} profile")))
        }
    }

    /// `v`, `v1,v2,...` or `powerlaw:scale:exponent:f_ref`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad profile {text:?}"));
        if let Some(rest) = text.strip_prefix("powerlaw:") {
            let p: Vec<f64> = rest
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if p.len() != 3 {
                return Err(bad());
            }
            return Ok(Profile::PowerLaw {
                scale: p[0],
                exponent: p[1],
                f_ref: p[2],
            });
        }
        let v = parse_list(text).map_err(|_| bad())?;
        match v.len() {
            0 => Err(bad()),
            1 => Ok(Profile::Constant(v[0])),
            _ => Ok(Profile::PerBin(v)),
        }
    }

    fn to_text(&self) -> String {
        match self {
            Profile::Constant(v) => format!("{v}"),
            Profile::PerBin(v) => join(v),
            Profile::PowerLaw {
                scale,
                exponent,
                f_ref,
            } => format!("powerlaw:{scale}:{exponent}:{f_ref}"),
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Log-periodic striation pattern `S(u) = c0 + c1 cos(2 pi u / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StriationPattern {
    pub c0: f64,
    pub c1: f64,
    pub period: f64,
    pub phase: f64,
}

impl StriationPattern {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.c0 + self.c1 * (2.0 * PI * u / self.period + self.phase).cos()
    }

    fn check(&self) -> Result<()> {
        if !(self.c0 > self.c1) || self.c1 < 0.0 {
            return Err(Error::Config(format!(
                "striation pattern needs c0 > c1 >= 0 (c0={}, c1={})",
                self.c0, self.c1
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite() && self.phase.is_finite()) {
            return Err(Error::Config("striation period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TonalLine {
    pub freq_hz: f64,
    pub amplitude: Complex64,
}

/// Straight-line passage: range `sqrt(cpa^2 + (speed * tau)^2)` at time `tau`
/// after the closest point of approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpaTrack {
    pub cpa_m: f64,
    pub speed_mps: f64,
    /// Surface time (s) at which the CPA occurs.
    pub cpa_time_s: f64,
}

impl CpaTrack {
    pub fn range_at(&self, t: f64) -> f64 {
        let along = self.speed_mps * (t - self.cpa_time_s);
        self.cpa_m.hypot(along)
    }

    /// Last range and per-step rates for `n` snapshots starting at `t0`.
    pub fn sample(&self, t0: f64, t_delta: f64, n: usize) -> (f64, RangeRate) {
        let ranges: Vec<f64> = (0..n).map(|i| self.range_at(t0 + i as f64 * t_delta)).collect();
        let rates = ranges.windows(2).map(|w| (w[1] - w[0]) / t_delta).collect();
        (ranges[n - 1], RangeRate::PerStep(rates))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    /// Range at the last snapshot (m).
    pub true_range_m: f64,
    pub range_rate: RangeRate,
    pub beta: f64,
    pub t0_s: f64,
    pub t_delta_s: f64,
    pub n_snapshots: usize,
    pub f0_hz: f64,
    pub df_hz: f64,
    pub n_bins: usize,
    pub pattern: StriationPattern,
    /// `A(f)`.
    pub envelope: Profile,
    pub source_sigma: Profile,
    pub noise_sigma: Profile,
    pub tonal: Vec<TonalLine>,
    /// `alpha`; 0 gives the exact model.
    pub spreading_exponent: f64,
    pub seed: u64,
}

/// Tonal lines of the field band used throughout the tests and examples.
pub const FIELD_TONALS: [f64; 5] = [42.6, 44.0, 45.4, 46.7, 48.1];

impl SceneConfig {
    /// A scene on the 42-49 Hz band at 0.1 Hz resolution with 2.5 s
    /// snapshots, a receding source at 10.2 m/s and `beta = 1.21`. No
    /// background noise and no tonals.
    pub fn field_band(true_range_m: f64, n_snapshots: usize, seed: u64) -> Self {
        // mild spectral ripple so the per-bin ratios are not trivially 1
        let source: Vec<f64> = (0..71)
            .map(|k| 1.0 + 0.3 * (k as f64 / 6.0).sin())
            .collect();
        Self {
            true_range_m,
            range_rate: RangeRate::Constant(10.2),
            beta: 1.21,
            t0_s: 0.0,
            t_delta_s: 2.5,
            n_snapshots,
            f0_hz: 42.0,
            df_hz: 0.1,
            n_bins: 71,
            pattern: StriationPattern {
                c0: 1.0,
                c1: 0.9,
                period: 0.02,
                phase: 0.0,
            },
            envelope: Profile::PowerLaw {
                scale: 1.0,
                exponent: -1.0,
                f_ref: 45.5,
            },
            source_sigma: Profile::PerBin(source),
            noise_sigma: Profile::Constant(0.0),
            tonal: Vec::new(),
            spreading_exponent: 0.0,
            seed,
        }
    }

    pub fn freq(&self, k: usize) -> f64 {
        self.f0_hz + k as f64 * self.df_hz
    }

    fn nearest_bin(&self, f: f64) -> usize {
        let k = ((f - self.f0_hz) / self.df_hz).round();
        k.clamp(0.0, (self.n_bins - 1) as f64) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_snapshots < 2 || self.n_bins < 2 {
            return Err(Error::Config("scene needs >= 2 snapshots and >= 2 bins".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if !(self.t_delta_s > 0.0 && self.df_hz > 0.0 && self.f0_hz > 0.0) {
            return Err(Error::Config("t_delta, df and f0 must be positive".into()));
        }
        if !(self.spreading_exponent >= 0.0 && self.spreading_exponent.is_finite()) {
            return Err(Error::Config("spreading exponent must be >= 0".into()));
        }
        self.pattern.check()?;
        self.envelope.check("envelope", self.n_bins, false)?;
        self.source_sigma.check("source_sigma", self.n_bins, true)?;
        self.noise_sigma.check("noise_sigma", self.n_bins, true)?;
        let f_hi = self.freq(self.n_bins - 1);
        for line in &self.tonal {
            if !(line.freq_hz >= self.f0_hz && line.freq_hz <= f_hi)
                || !line.amplitude.re.is_finite()
                || !line.amplitude.im.is_finite()
            {
                return Err(Error::Config(format!("tonal line {} Hz invalid", line.freq_hz)));
            }
        }
        self.range_rate.check_len(self.n_snapshots)?;
        range_axis(self.true_range_m, &self.range_rate, self.t_delta_s, self.n_snapshots)?;
        Ok(())
    }

    /// Reads the `key = value` form. Either `true_range_m` + `range_rate`
    /// or `cpa_m` + `speed_mps` (+ optional `cpa_time_s`) describe the track.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let t0_s = kv.get_or("t0_s", 0.0)?;
        let t_delta_s: f64 = kv.require("t_delta_s")?;
        let n_snapshots: usize = kv.require("n_snapshots")?;
        let (true_range_m, range_rate) = if kv.contains("cpa_m") {
            let track = CpaTrack {
                cpa_m: kv.require("cpa_m")?,
                speed_mps: kv.require("speed_mps")?,
                cpa_time_s: kv.get_or("cpa_time_s", 0.0)?,
            };
            if n_snapshots < 2 {
                return Err(Error::Config("n_snapshots must be >= 2".into()));
            }
            track.sample(t0_s, t_delta_s, n_snapshots)
        } else {
            let rates = kv.list("range_rate")?;
            let rate = match rates.len() {
                0 => return Err(Error::Config("missing key range_rate".into())),
                1 => RangeRate::Constant(rates[0]),
                _ => RangeRate::PerStep(rates),
            };
            (kv.require("true_range_m")?, rate)
        };
        let tonal = match kv.raw("tonal") {
            None | Some("") => Vec::new(),
            Some(text) => parse_tonals(text)?,
        };
        let profile = |key: &str, default: Profile| -> Result<Profile> {
            kv.raw(key).map(Profile::parse).unwrap_or(Ok(default))
        };
        let cfg = Self {
            true_range_m,
            range_rate,
            beta: kv.require("beta")?,
            t0_s,
            t_delta_s,
            n_snapshots,
            f0_hz: kv.require("f0_hz")?,
            df_hz: kv.require("df_hz")?,
            n_bins: kv.require("n_bins")?,
            pattern: StriationPattern {
                c0: kv.get_or("pattern_c0", 1.0)?,
                c1: kv.get_or("pattern_c1", 0.9)?,
                period: kv.get_or("pattern_period", 0.02)?,
                phase: kv.get_or("pattern_phase", 0.0)?,
            },
            envelope: profile("envelope", Profile::Constant(1.0))?,
            source_sigma: profile("source_sigma", Profile::Constant(1.0))?,
            noise_sigma: profile("noise_sigma", Profile::Constant(0.0))?,
            tonal,
            spreading_exponent: kv.get_or("spreading_exponent", 0.0)?,
            seed: kv.get_or("seed", 0)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        kv.insert("true_range_m", self.true_range_m);
        kv.insert(
            "range_rate",
            match &self.range_rate {
                RangeRate::Constant(v) => v.to_string(),
                RangeRate::PerStep(v) => join(v),
            },
        );
        kv.insert("beta", self.beta);
        kv.insert("t0_s", self.t0_s);
        kv.insert("t_delta_s", self.t_delta_s);
        kv.insert("n_snapshots", self.n_snapshots);
        kv.insert("f0_hz", self.f0_hz);
        kv.insert("df_hz", self.df_hz);
        kv.insert("n_bins", self.n_bins);
        kv.insert("pattern_c0", self.pattern.c0);
        kv.insert("pattern_c1", self.pattern.c1);
        kv.insert("pattern_period", self.pattern.period);
        kv.insert("pattern_phase", self.pattern.phase);
        kv.insert("envelope", self.envelope.to_text());
        kv.insert("source_sigma", self.source_sigma.to_text());
        kv.insert("noise_sigma", self.noise_sigma.to_text());
        kv.insert(
            "tonal",
            self.tonal
                .iter()
                .map(|t| format!("{}:{}:{}", t.freq_hz, t.amplitude.re, t.amplitude.im))
                .collect::<Vec<_>>()
                .join(","),
        );
        kv.insert("spreading_exponent", self.spreading_exponent);
        kv.insert("seed", self.seed);
        kv
    }
}

/// `freq:re:im` entries separated by commas.
fn parse_tonals(text: &str) -> Result<Vec<TonalLine>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let p: Vec<f64> = item
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("bad tonal entry {item:?}")))?;
            match p.as_slice() {
                [f, re] => Ok(TonalLine {
                    freq_hz: *f,
                    amplitude: Complex64::new(*re, 0.0),
                }),
                [f, re, im] => Ok(TonalLine {
                    freq_hz: *f,
                    amplitude: Complex64::new(*re, *im),
                }),
                _ => Err(Error::Config(format!("bad tonal entry {item:?}"))),
            }
        })
        .collect()
}

/// `|g(r, f)|` for the scene's channel.
pub fn channel_magnitude(r: f64, f: f64, cfg: &SceneConfig) -> Result<f64> {
    cfg.pattern.check()?;
    if !(r > 0.0 && f > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "channel needs r > 0 and f > 0, got r={r}, f={f}"
        )));
    }
    Ok(channel_unchecked(r, f, cfg.nearest_bin(f), cfg))
}

#[inline]
fn channel_unchecked(r: f64, f: f64, k: usize, cfg: &SceneConfig) -> f64 {
    let u = f.ln() - cfg.beta * r.ln();
    let spread = if cfg.spreading_exponent == 0.0 {
        1.0
    } else {
        r.powf(-cfg.spreading_exponent)
    };
    cfg.envelope.at(k, f) * cfg.pattern.eval(u) * spread
}

/// Generates the surface and the true hypothesis `[r_N, rdot, beta]`.
pub fn synth_surface(cfg: &SceneConfig) -> Result<(ComplexSurface, ParameterHypothesis)> {
    cfg.validate()?;
    let axis = range_axis(cfg.true_range_m, &cfg.range_rate, cfg.t_delta_s, cfg.n_snapshots)?;

    let mut tonal_amp = vec![Complex64::new(0.0, 0.0); cfg.n_bins];
    for line in &cfg.tonal {
        tonal_amp[cfg.nearest_bin(line.freq_hz)] += line.amplitude;
    }
    let freqs: Vec<f64> = (0..cfg.n_bins).map(|k| cfg.freq(k)).collect();
    let src: Vec<f64> = (0..cfg.n_bins).map(|k| cfg.source_sigma.at(k, freqs[k])).collect();
    let noise: Vec<f64> = (0..cfg.n_bins).map(|k| cfg.noise_sigma.at(k, freqs[k])).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut values = Vec::with_capacity(cfg.n_snapshots * cfg.n_bins);
    for &r in axis.ranges() {
        for k in 0..cfg.n_bins {
            let g = channel_unchecked(r, freqs[k], k, cfg);
            let s = Complex64::new(draw(), draw()) * src[k];
            let u = Complex64::new(draw(), draw()) * noise[k];
            values.push((s + tonal_amp[k]) * g + u);
        }
    }
    let surface = ComplexSurface::new(
        cfg.n_snapshots,
        cfg.n_bins,
        cfg.t0_s,
        cfg.t_delta_s,
        cfg.f0_hz,
        cfg.df_hz,
        values,
    )?;
    let truth = ParameterHypothesis::new(cfg.true_range_m, cfg.range_rate.clone(), cfg.beta)?;
    Ok((surface, truth))
}

/// `(time_s, range_m)` for every snapshot of the scene.
pub fn truth_track(cfg: &SceneConfig) -> Result<Vec<(f64, f64)>> {
    let axis = range_axis(cfg.true_range_m, &cfg.range_rate, cfg.t_delta_s, cfg.n_snapshots)?;
    Ok(axis
        .ranges()
        .iter()
        .enumerate()
        .map(|(n, &r)| (cfg.t0_s + n as f64 * cfg.t_delta_s, r))
        .collect())
}
