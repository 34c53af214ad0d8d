//! Complex spectrogram surfaces and the parameter types shared across the
//! pipeline.
//!
//! Indices are zero-based throughout: snapshot `n` runs over `0..N` and bin
//! `k` over `0..K`. Snapshot `N - 1` is the most recent one and carries the
//! range being estimated.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An `N x K` matrix of complex STFT measurements on uniform time and
/// frequency axes. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSurface {
    n_snapshots: usize,
    n_bins: usize,
    t0: f64,
    t_delta: f64,
    f0: f64,
    df: f64,
    values: Vec<Complex64>,
}

impl ComplexSurface {
    /// Builds a surface from row-major values (snapshot-major).
    pub fn new(
        n_snapshots: usize,
        n_bins: usize,
        t0: f64,
        t_delta: f64,
        f0: f64,
        df: f64,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if n_snapshots < 2 || n_bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "surface needs at least 2 snapshots and 2 bins, got {n_snapshots}x{n_bins}"
            )));
        }
        if values.len() != n_snapshots * n_bins {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                n_snapshots * n_bins,
                values.len()
            )));
        }
        for (name, v) in [("t0", t0), ("t_delta", t_delta), ("f0", f0), ("df", df)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name.into()));
            }
        }
        if t_delta <= 0.0 || df <= 0.0 {
            return Err(Error::InvalidArgument(
                "time and frequency steps must be positive".into(),
            ));
        }
        if let Some(i) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(format!(
                "surface value at snapshot {}, bin {}",
                i / n_bins,
                i % n_bins
            )));
        }
        Ok(Self {
            n_snapshots,
            n_bins,
            t0,
            t_delta,
            f0,
            df,
            values,
        })
    }

    pub fn from_fn(
        n_snapshots: usize,
        n_bins: usize,
        t0: f64,
        t_delta: f64,
        f0: f64,
        df: f64,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(n_snapshots * n_bins);
        for n in 0..n_snapshots {
            for k in 0..n_bins {
                values.push(f(n, k));
            }
        }
        Self::new(n_snapshots, n_bins, t0, t_delta, f0, df, values)
    }

    #[inline]
    pub fn n_snapshots(&self) -> usize {
        self.n_snapshots
    }

    #[inline]
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_delta(&self) -> f64 {
        self.t_delta
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.values[n * self.n_bins + k]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.values[n * self.n_bins..(n + 1) * self.n_bins]
    }

    #[inline]
    pub fn freq(&self, k: usize) -> f64 {
        self.f0 + k as f64 * self.df
    }

    #[inline]
    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.t_delta
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n_bins).map(|k| self.freq(k)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_snapshots).map(|n| self.time(n)).collect()
    }

    /// Multiplies every value by a real gain.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * gain).collect(),
            ..self.clone()
        }
    }

    /// Sub-surface of `len` consecutive snapshots starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if len < 2 || start + len > self.n_snapshots {
            return Err(Error::InvalidArgument(format!(
                "window [{start}, {}) outside 0..{}",
                start + len,
                self.n_snapshots
            )));
        }
        let values = self.values[start * self.n_bins..(start + len) * self.n_bins].to_vec();
        Self::new(
            len,
            self.n_bins,
            self.time(start),
            self.t_delta,
            self.f0,
            self.df,
            values,
        )
    }
}

/// Range rate used to map snapshot times to ranges.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeRate {
    /// One value for every snapshot step (m/s).
    Constant(f64),
    /// `rdot_j` for `j = 0..N-1`, the rate between snapshot `j` and `j + 1`.
    PerStep(Vec<f64>),
}

impl RangeRate {
    /// Rate for step `j`.
    #[inline]
    pub fn at(&self, j: usize) -> f64 {
        match self {
            RangeRate::Constant(v) => *v,
            RangeRate::PerStep(v) => v[j],
        }
    }

    /// Checks the rate against a surface of `n_snapshots` snapshots.
    pub fn check_len(&self, n_snapshots: usize) -> Result<()> {
        match self {
            RangeRate::Constant(v) if !v.is_finite() => Err(Error::NonFinite("range rate".into())),
            RangeRate::Constant(_) => Ok(()),
            RangeRate::PerStep(v) => {
                if v.len() + 1 != n_snapshots {
                    return Err(Error::InvalidArgument(format!(
                        "range rate vector has {} entries, expected {}",
                        v.len(),
                        n_snapshots.saturating_sub(1)
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("range rate".into()));
                }
                Ok(())
            }
        }
    }

    /// Restricts a per-step vector to the steps inside a snapshot window.
    pub fn window(&self, start: usize, len: usize) -> RangeRate {
        match self {
            RangeRate::Constant(v) => RangeRate::Constant(*v),
            RangeRate::PerStep(v) => RangeRate::PerStep(v[start..start + len - 1].to_vec()),
        }
    }

    /// Smallest rate over the steps of an `n_snapshots` window.
    pub fn min_rate(&self) -> f64 {
        match self {
            RangeRate::Constant(v) => *v,
            RangeRate::PerStep(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// A joint hypothesis `[r, rdot, beta]`, where `r` is the range at the last
/// snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterHypothesis {
    pub range_m: f64,
    pub range_rate: RangeRate,
    pub beta: f64,
}

impl ParameterHypothesis {
    pub fn new(range_m: f64, range_rate: RangeRate, beta: f64) -> Result<Self> {
        if !(range_m.is_finite() && range_m > 0.0) {
            return Err(Error::InvalidArgument(format!("range must be positive, got {range_m}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            range_m,
            range_rate,
            beta,
        })
    }
}

/// Search grids for range and WI. The range rate is held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    pub r_grid: Vec<f64>,
    pub rdot_fixed: RangeRate,
    pub beta_grid: Vec<f64>,
}

impl SearchGrid {
    pub fn new(r_grid: Vec<f64>, rdot_fixed: RangeRate, beta_grid: Vec<f64>) -> Result<Self> {
        check_grid("range", &r_grid)?;
        check_grid("beta", &beta_grid)?;
        if r_grid[0] <= 0.0 || beta_grid[0] <= 0.0 {
            return Err(Error::InvalidArgument("grid values must be positive".into()));
        }
        Ok(Self {
            r_grid,
            rdot_fixed,
            beta_grid,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_grid[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r_grid[self.r_grid.len() - 1]
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_grid[0]
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_grid[self.beta_grid.len() - 1]
    }
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{name} grid")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "{name} grid must be strictly ascending"
        )));
    }
    Ok(())
}

/// Inclusive arithmetic grid `lo, lo + step, ..., hi`. Values are computed as
/// `lo + i * step` so long grids do not accumulate drift.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "bad grid lo={lo} hi={hi} step={step}"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// Outcome of a one-dimensional grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub grid: Vec<f64>,
    pub loglik: Vec<f64>,
    pub argmax_index: usize,
    pub argmax: f64,
    pub diagnostics: EstimateDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateDiagnostics {
    /// Striations per hypothesis.
    pub m: usize,
    /// Reference bin (surface index).
    pub reference_bin: usize,
    pub striation_ids: Vec<usize>,
    /// Per-column scale ratios at the argmax (empty for the tonal method).
    pub rho_hat: Vec<f64>,
    /// Per-striation scale (broadband) or Rice parameter (tonal) at the argmax.
    pub theta_hat: Vec<f64>,
}
