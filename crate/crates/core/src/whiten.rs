//! Per-bin scale ratio estimation and whitening of striation magnitudes.
//!
//! Along a striation the real and imaginary parts at bin `k` and at the
//! reference bin are zero-mean Gaussians whose standard deviations differ by
//! the factor `rho_k`. Their ratios are Cauchy(0, rho_k), and the population
//! quartiles of a Cauchy(0, s) sit at `+-s`, so half the sample interquartile
//! range estimates `rho_k` directly.

use crate::error::{Error, Result};
use crate::transform::StriationMatrix;

/// Minimum ratio samples accepted for one bin.
pub const MIN_RATIO_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct WhitenDiagnostics {
    /// `rho_hat` per column; exactly 1 at the reference column.
    pub rho_hat: Vec<f64>,
    /// `2M`, the number of ratio samples per bin before zero-denominator drops.
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Whitened {
    /// Row-major `M x K` whitened magnitudes.
    pub mags: Vec<f64>,
    pub diagnostics: WhitenDiagnostics,
}

/// Re/Re and Im/Im ratios of column `col` against the reference column, two
/// per striation. Samples with an exactly zero denominator are dropped.
pub fn cauchy_ratio_samples(z: &StriationMatrix, col: usize) -> Result<Vec<f64>> {
    if col >= z.n_cols() || col == z.reference_col {
        return Err(Error::InvalidArgument(format!(
            "ratio samples need a non-reference column, got {col}"
        )));
    }
    let mut out = Vec::with_capacity(2 * z.n_rows());
    for row in 0..z.n_rows() {
        let (Some(num), Some(den)) = (z.get(row, col), z.get(row, z.reference_col)) else {
            return Err(Error::InvalidCell {
                striation: z.striation_ids[row],
                bin: z.bins[col],
            });
        };
        if den.re != 0.0 {
            out.push(num.re / den.re);
        }
        if den.im != 0.0 {
            out.push(num.im / den.im);
        }
    }
    if out.len() < MIN_RATIO_SAMPLES {
        return Err(Error::InsufficientRatioSamples {
            bin: z.bins[col],
            count: out.len(),
        });
    }
    Ok(out)
}

/// Sample quantile with linear interpolation between order statistics at
/// position `h = (n - 1) p` of the sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Half the sample interquartile range, `(Q75 - Q25) / 2`.
///
/// Returns 0 for degenerate (all-equal) samples; callers reject that.
pub fn half_iqr(samples: &[f64]) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "half_iqr needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite("ratio sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(0.5 * (quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)))
}

/// Estimates `rho_k` for every column and fills the whitened magnitudes
/// `|z_{l,k}| / rho_k`.
pub fn whiten(z: &StriationMatrix) -> Result<StriationMatrix> {
    if !z.all_valid() {
        let i = (0..z.n_rows() * z.n_cols())
            .find(|&i| !z.is_valid(i / z.n_cols(), i % z.n_cols()))
            .unwrap_or(0);
        return Err(Error::InvalidCell {
            striation: z.striation_ids[i / z.n_cols()],
            bin: z.bins[i % z.n_cols()],
        });
    }
    let k = z.n_cols();
    let mut rho_hat = vec![1.0; k];
    for (col, rho) in rho_hat.iter_mut().enumerate() {
        if col == z.reference_col {
            continue;
        }
        let est = half_iqr(&cauchy_ratio_samples(z, col)?)?;
        if !(est > 0.0 && est.is_finite()) {
            return Err(Error::BadScaleRatio {
                bin: z.bins[col],
                value: est,
            });
        }
        *rho = est;
    }
    let mags = z
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v.norm() / rho_hat[i % k])
        .collect();
    let mut out = z.clone();
    out.whitened = Some(Whitened {
        mags,
        diagnostics: WhitenDiagnostics {
            rho_hat,
            sample_count: 2 * z.n_rows(),
        },
    });
    Ok(out)
}
