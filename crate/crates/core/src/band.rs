//! Broadband / tonal bin partitioning.

use crate::error::{Error, Result};

/// Slack on the guard comparison so that bins sitting exactly on the guard
/// edge survive rounding in `f0 + k * df`.
const GUARD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BandPartition {
    /// Sorted bin indices carrying only broadband content.
    pub broadband: Vec<usize>,
    /// Sorted, deduplicated bin indices nearest each tonal line.
    pub tonal: Vec<usize>,
    /// The tonal line frequencies the partition was built from, ascending.
    pub tonal_freqs: Vec<f64>,
    pub guard_hz: f64,
    /// Reference bin `k'`, a member of `broadband`.
    pub reference: usize,
}

/// Partitions all of `freqs` into broadband and tonal bins.
///
/// A bin is broadband when its distance to every tonal frequency is at least
/// `guard_hz` (closed condition).
pub fn partition_bands(freqs: &[f64], tonal_freqs: &[f64], guard_hz: f64) -> Result<BandPartition> {
    let (lo, hi) = match (freqs.first(), freqs.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::NoBroadbandBins),
    };
    partition_bands_within(freqs, lo, hi, tonal_freqs, guard_hz)
}

/// As [`partition_bands`], but only bins inside `[band_lo, band_hi]` can be
/// broadband.
pub fn partition_bands_within(
    freqs: &[f64],
    band_lo: f64,
    band_hi: f64,
    tonal_freqs: &[f64],
    guard_hz: f64,
) -> Result<BandPartition> {
    if !(guard_hz >= 0.0 && guard_hz.is_finite()) {
        return Err(Error::InvalidArgument(format!("guard must be >= 0, got {guard_hz}")));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("frequencies must be ascending".into()));
    }
    if freqs.is_empty() {
        return Err(Error::NoBroadbandBins);
    }
    let span = (freqs[0], freqs[freqs.len() - 1]);

    let mut lines: Vec<f64> = tonal_freqs.to_vec();
    lines.sort_by(f64::total_cmp);
    lines.dedup();

    let mut tonal = Vec::with_capacity(lines.len());
    for &ft in &lines {
        if !ft.is_finite() || ft < span.0 - GUARD_TOL || ft > span.1 + GUARD_TOL {
            return Err(Error::TonalOutOfSpan(ft));
        }
        tonal.push(nearest_index(freqs, ft));
    }
    tonal.sort_unstable();
    tonal.dedup();

    let tol = band_tolerance(band_lo, band_hi);
    let broadband: Vec<usize> = freqs
        .iter()
        .enumerate()
        .filter(|(k, &f)| {
            f >= band_lo - tol
                && f <= band_hi + tol
                && !tonal.contains(k)
                && lines.iter().all(|&ft| (f - ft).abs() >= guard_hz - GUARD_TOL)
        })
        .map(|(k, _)| k)
        .collect();
    if broadband.is_empty() {
        return Err(Error::NoBroadbandBins);
    }
    let reference = mid_reference(freqs, &broadband);

    Ok(BandPartition {
        broadband,
        tonal,
        tonal_freqs: lines,
        guard_hz,
        reference,
    })
}

fn band_tolerance(lo: f64, hi: f64) -> f64 {
    GUARD_TOL * lo.abs().max(hi.abs()).max(1.0)
}

fn nearest_index(freqs: &[f64], f: f64) -> usize {
    let mut best = 0;
    for (k, &fk) in freqs.iter().enumerate() {
        if (fk - f).abs() < (freqs[best] - f).abs() {
            best = k;
        }
    }
    best
}

/// The member of `bins` closest to the midpoint of its frequency span; ties
/// go to the lower bin.
pub(crate) fn mid_reference(freqs: &[f64], bins: &[usize]) -> usize {
    let lo = freqs[bins[0]];
    let hi = freqs[bins[bins.len() - 1]];
    let mid = 0.5 * (lo + hi);
    let mut best = bins[0];
    for &k in bins {
        if (freqs[k] - mid).abs() < (freqs[best] - mid).abs() - 1e-12 {
            best = k;
        }
    }
    best
}

impl BandPartition {
    /// Column of the reference bin within `broadband`.
    pub fn reference_col(&self) -> usize {
        self.broadband
            .iter()
            .position(|&k| k == self.reference)
            .expect("reference is a broadband bin")
    }

    /// A partition whose "broadband" set is the tonal bins, with the reference
    /// chosen by the same mid-span rule. The tonal estimator runs the striation
    /// machinery on this view.
    pub fn tonal_view(&self, freqs: &[f64]) -> Result<BandPartition> {
        if self.tonal.is_empty() {
            return Err(Error::InvalidArgument("partition has no tonal bins".into()));
        }
        Ok(BandPartition {
            broadband: self.tonal.clone(),
            tonal: Vec::new(),
            tonal_freqs: Vec::new(),
            guard_hz: 0.0,
            reference: mid_reference(freqs, &self.tonal),
        })
    }

    /// Re-checks the guard condition bin by bin.
    pub fn guard_holds(&self, freqs: &[f64]) -> bool {
        self.broadband.iter().all(|&k| {
            self.tonal_freqs
                .iter()
                .all(|&ft| (freqs[k] - ft).abs() >= self.guard_hz - GUARD_TOL)
        }) && self.broadband.iter().all(|k| !self.tonal.contains(k))
    }
}
