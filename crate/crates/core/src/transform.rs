//! Time-to-range mapping and the projection of a surface into
//! striation-frequency space.
//!
//! A striation `l` is identified by the snapshot where it crosses the
//! reference bin `k'`. At any other bin `k` the same striation sits at range
//! `r_l * (f_k / f_k')^(1 / beta)`; the measurement there is interpolated
//! linearly (real and imaginary parts separately) from the two bracketing
//! snapshots of column `k`.

use num_complex::Complex64;

use crate::band::BandPartition;
use crate::error::{Error, Result};
use crate::surface::{ComplexSurface, ParameterHypothesis, RangeRate, SearchGrid};
use crate::whiten::Whitened;

/// Relative slack accepted when a projected range lands a rounding error
/// outside the axis span.
const SPAN_SLACK: f64 = 1e-12;

/// Ranges `r_0..r_{N-1}` of the snapshots under a hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAxis {
    ranges: Vec<f64>,
}

impl RangeAxis {
    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// `(min, max)` over the axis.
    pub fn span(&self) -> (f64, f64) {
        let first = self.ranges[0];
        let last = self.ranges[self.ranges.len() - 1];
        (first.min(last), first.max(last))
    }

    fn direction(&self) -> Result<Direction> {
        let r = &self.ranges;
        if r.len() < 2 {
            return Ok(Direction::Increasing);
        }
        if r.windows(2).all(|w| w[1] > w[0]) {
            Ok(Direction::Increasing)
        } else if r.windows(2).all(|w| w[1] < w[0]) {
            Ok(Direction::Decreasing)
        } else {
            Err(Error::NonMonotoneAxis)
        }
    }

    #[inline]
    fn contains(&self, r: f64) -> bool {
        let (lo, hi) = self.span();
        r >= lo && r <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Increasing,
    Decreasing,
}

/// Maps snapshot times to ranges: `r_i = r_N - t_delta * sum_{j >= i} rdot_j`.
pub fn range_axis(r_last: f64, rdot: &RangeRate, t_delta: f64, n: usize) -> Result<RangeAxis> {
    if n == 0 {
        return Err(Error::InvalidArgument("range axis needs at least one snapshot".into()));
    }
    if !(t_delta > 0.0 && t_delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad t_delta {t_delta}")));
    }
    rdot.check_len(n)?;
    let mut ranges = vec![0.0; n];
    ranges[n - 1] = r_last;
    let mut rate_sum = 0.0;
    for i in (0..n - 1).rev() {
        rate_sum += rdot.at(i);
        ranges[i] = r_last - t_delta * rate_sum;
    }
    if let Some((index, &range_m)) = ranges.iter().enumerate().find(|(_, &r)| !(r > 0.0)) {
        return Err(Error::TrackCrossesReceiver { index, range_m });
    }
    Ok(RangeAxis { ranges })
}

/// Range of a striation at `f_k` given its range `r_ref` at `f_kprime`.
#[inline]
pub fn wi_project(r_ref: f64, f_k: f64, f_kprime: f64, beta: f64) -> f64 {
    debug_assert!(r_ref > 0.0 && f_k > 0.0 && f_kprime > 0.0 && beta > 0.0);
    r_ref * (f_k / f_kprime).powf(1.0 / beta)
}

/// Linear interpolation of column `k` at `target_r`. `None` outside the axis.
pub fn interpolate_complex(
    surface: &ComplexSurface,
    axis: &RangeAxis,
    k: usize,
    target_r: f64,
) -> Option<Complex64> {
    let dir = axis.direction().ok()?;
    interpolate_with(surface, axis, dir, k, target_r)
}

fn interpolate_with(
    surface: &ComplexSurface,
    axis: &RangeAxis,
    dir: Direction,
    k: usize,
    target_r: f64,
) -> Option<Complex64> {
    let r = axis.ranges();
    let n = r.len();
    let (lo, hi) = axis.span();
    let slack = SPAN_SLACK * hi;
    if !(target_r >= lo - slack && target_r <= hi + slack) {
        return None;
    }
    let target = target_r.clamp(lo, hi);
    if n == 1 {
        return Some(surface.get(0, k));
    }
    // i such that target lies between r[i] and r[i + 1]
    let i = match dir {
        Direction::Increasing => r.partition_point(|&x| x <= target).saturating_sub(1),
        Direction::Decreasing => r.partition_point(|&x| x >= target).saturating_sub(1),
    }
    .min(n - 2);
    let (a, b) = (r[i], r[i + 1]);
    let w = (target - a) / (b - a);
    let za = surface.get(i, k);
    let zb = surface.get(i + 1, k);
    Some(Complex64::new(
        (1.0 - w) * za.re + w * zb.re,
        (1.0 - w) * za.im + w * zb.im,
    ))
}

/// Striations (snapshot indices) whose projections land inside the axis for
/// every broadband bin under hypothesis `q`.
fn valid_striations(
    freqs: &[f64],
    band: &BandPartition,
    axis: &RangeAxis,
    beta: f64,
) -> Vec<usize> {
    let f_ref = freqs[band.reference];
    (0..axis.len())
        .filter(|&l| {
            let r_l = axis.ranges()[l];
            band.broadband
                .iter()
                .all(|&k| k == band.reference || axis.contains(wi_project(r_l, freqs[k], f_ref, beta)))
        })
        .collect()
}

/// Number `M` and identities `L` of the striations that are valid for every
/// hypothesis in the grid.
///
/// Validity is checked at the four `(r, beta)` corners of the grid (which
/// include `[r_max, rdot, beta_min]`); `L` is the intersection of those
/// valid sets, so it is valid across the whole grid whenever validity is
/// monotone in `r` and `beta`. With a mid-band reference bin the newest
/// snapshots project past `r_N` at the upper band edge, so `L` is generally
/// an interior block of snapshots rather than the last `M`.
pub fn valid_striation_count(
    n_snapshots: usize,
    t_delta: f64,
    freqs: &[f64],
    band: &BandPartition,
    grid: &SearchGrid,
) -> Result<(usize, Vec<usize>)> {
    let rdot = &grid.rdot_fixed;
    // [r_max, rdot, beta_min] is the usual minimiser; it is one of the corners
    let mut corners = Vec::with_capacity(4);
    for r in [grid.r_max(), grid.r_min()] {
        for beta in [grid.beta_min(), grid.beta_max()] {
            corners.push((r, beta));
        }
    }

    let mut keep = vec![true; n_snapshots];
    for (r, beta) in corners {
        let axis = range_axis(r, rdot, t_delta, n_snapshots)?;
        let valid = valid_striations(freqs, band, &axis, beta);
        let mut mask = vec![false; n_snapshots];
        for l in valid {
            mask[l] = true;
        }
        for (k, m) in keep.iter_mut().zip(mask) {
            *k &= m;
        }
    }
    let ids: Vec<usize> = (0..n_snapshots).filter(|&l| keep[l]).collect();
    if ids.is_empty() {
        return Err(Error::WindowTooShort);
    }
    Ok((ids.len(), ids))
}

/// Measurements along striations, one row per striation and one column per
/// broadband bin.
#[derive(Debug, Clone, PartialEq)]
pub struct StriationMatrix {
    pub hypothesis: ParameterHypothesis,
    /// Snapshot index of each row at the reference bin, ascending.
    pub striation_ids: Vec<usize>,
    /// Surface bin index of each column (the broadband set).
    pub bins: Vec<usize>,
    /// Column of the reference bin.
    pub reference_col: usize,
    values: Vec<Complex64>,
    valid: Vec<bool>,
    pub(crate) whitened: Option<Whitened>,
}

impl StriationMatrix {
    pub fn n_rows(&self) -> usize {
        self.striation_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.bins.len()
    }

    /// Value at `(row, col)`; `None` for cells outside the surface.
    pub fn get(&self, row: usize, col: usize) -> Option<Complex64> {
        let i = row * self.n_cols() + col;
        self.valid[i].then(|| self.values[i])
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.n_cols() + col]
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    /// Row-major values; invalid cells hold zero.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn whitened(&self) -> Option<&Whitened> {
        self.whitened.as_ref()
    }

    /// Whitened magnitudes of one row.
    pub fn whitened_row(&self, row: usize) -> Option<&[f64]> {
        let k = self.n_cols();
        self.whitened
            .as_ref()
            .map(|w| &w.mags[row * k..(row + 1) * k])
    }

    /// Copy of the matrix with every entry of column `col` multiplied by `c`.
    pub fn with_scaled_column(&self, col: usize, c: f64) -> Self {
        let k = self.n_cols();
        let mut out = self.clone();
        out.whitened = None;
        for row in 0..self.n_rows() {
            out.values[row * k + col] *= c;
        }
        out
    }

    /// Builds a matrix directly from values, all cells valid. Mainly for
    /// exercising the whitening and likelihood stages in isolation.
    pub fn from_values(
        hypothesis: ParameterHypothesis,
        striation_ids: Vec<usize>,
        bins: Vec<usize>,
        reference_col: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != striation_ids.len() * bins.len() || reference_col >= bins.len() {
            return Err(Error::InvalidArgument("striation matrix shape mismatch".into()));
        }
        let valid = vec![true; values.len()];
        Ok(Self {
            hypothesis,
            striation_ids,
            bins,
            reference_col,
            values,
            valid,
            whitened: None,
        })
    }
}

/// Projects the given striations under `q`, marking cells that fall outside
/// the surface as invalid.
pub fn project_striations(
    surface: &ComplexSurface,
    q: &ParameterHypothesis,
    band: &BandPartition,
    striations: &[usize],
) -> Result<StriationMatrix> {
    let n = surface.n_snapshots();
    if let Some(&l) = striations.iter().find(|&&l| l >= n) {
        return Err(Error::InvalidArgument(format!("striation {l} outside 0..{n}")));
    }
    let axis = range_axis(q.range_m, &q.range_rate, surface.t_delta(), n)?;
    let single = band.broadband.len() == 1;
    let dir = if single {
        Direction::Increasing
    } else {
        axis.direction()?
    };
    let f_ref = surface.freq(band.reference);
    let k_cols = band.broadband.len();
    let mut values = Vec::with_capacity(striations.len() * k_cols);
    let mut valid = Vec::with_capacity(striations.len() * k_cols);
    for &l in striations {
        let r_l = axis.ranges()[l];
        for &k in &band.broadband {
            let z = if k == band.reference {
                Some(surface.get(l, k))
            } else {
                let target = wi_project(r_l, surface.freq(k), f_ref, q.beta);
                interpolate_with(surface, &axis, dir, k, target)
            };
            valid.push(z.is_some());
            values.push(z.unwrap_or_default());
        }
    }
    Ok(StriationMatrix {
        hypothesis: q.clone(),
        striation_ids: striations.to_vec(),
        bins: band.broadband.clone(),
        reference_col: band.reference_col(),
        values,
        valid,
        whitened: None,
    })
}

/// Striation matrix over the set `L`; any invalid cell is an error.
pub fn build_striation_matrix(
    surface: &ComplexSurface,
    q: &ParameterHypothesis,
    band: &BandPartition,
    striations: &[usize],
) -> Result<StriationMatrix> {
    let m = project_striations(surface, q, band, striations)?;
    if let Some(i) = m.valid.iter().position(|&v| !v) {
        return Err(Error::InvalidCell {
            striation: m.striation_ids[i / m.n_cols()],
            bin: m.bins[i % m.n_cols()],
        });
    }
    Ok(m)
}
