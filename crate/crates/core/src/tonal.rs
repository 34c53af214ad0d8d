//! Rician comparison estimator on tonal magnitude-to-noise ratios.
//!
//! Each tonal bin `j` gets a background noise level `sigma_z,j` from nearby
//! broadband bins. Along a striation the MNR `y = |z| / (sqrt 2 sigma_z)` is
//! modelled as Rice(lambda, 1), with one `lambda` per striation from the
//! moment estimator `sqrt(max(0, mean y^2 - 2))`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::band::BandPartition;
use crate::error::{Error, Result};
use crate::estimate::{grid_search, Evaluation, Sweep};
use crate::surface::{ComplexSurface, EstimateResult, ParameterHypothesis, RangeRate, SearchGrid};
use crate::transform::{build_striation_matrix, valid_striation_count};

/// Bessel argument above which `ln I0` switches to the asymptotic series.
const ASYMPTOTIC_FROM: f64 = 20.0;

/// Minimum neighbouring broadband bins for a noise estimate.
pub const MIN_NOISE_BINS: usize = 4;

/// MNRs along striations (row-major, one column per tonal bin) and the noise
/// level used for each column.
#[derive(Debug, Clone, PartialEq)]
pub struct TonalObservation {
    pub mnr: Vec<f64>,
    pub noise_sigma: Vec<f64>,
}

impl TonalObservation {
    pub fn n_cols(&self) -> usize {
        self.noise_sigma.len()
    }

    pub fn n_rows(&self) -> usize {
        self.mnr.len() / self.n_cols().max(1)
    }

    pub fn row(&self, l: usize) -> &[f64] {
        let j = self.n_cols();
        &self.mnr[l * j..(l + 1) * j]
    }
}

/// Broadband bins within `neighborhood_hz` of bin `bin`.
pub fn noise_neighbors(freqs: &[f64], bin: usize, band: &BandPartition, neighborhood_hz: f64) -> Vec<usize> {
    band.broadband
        .iter()
        .copied()
        .filter(|&k| (freqs[k] - freqs[bin]).abs() <= neighborhood_hz + 1e-9)
        .collect()
}

/// Per-component noise std at tonal bin `bin`, pooled over the neighbouring
/// broadband bins and all snapshots.
pub fn noise_sigma(
    surface: &ComplexSurface,
    bin: usize,
    band: &BandPartition,
    neighborhood_hz: f64,
) -> Result<f64> {
    if bin >= surface.n_bins() {
        return Err(Error::InvalidArgument(format!("bin {bin} outside surface")));
    }
    let nb = noise_neighbors(&surface.freqs(), bin, band, neighborhood_hz);
    if nb.len() < MIN_NOISE_BINS {
        return Err(Error::InvalidArgument(format!(
            "only {} broadband bins within {neighborhood_hz} Hz of bin {bin}",
            nb.len()
        )));
    }
    let mut sum = 0.0;
    for n in 0..surface.n_snapshots() {
        for &k in &nb {
            sum += surface.get(n, k).norm_sqr();
        }
    }
    let count = (surface.n_snapshots() * nb.len()) as f64;
    let sigma = (sum / (2.0 * count)).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("zero background around bin {bin}")));
    }
    Ok(sigma)
}

/// Magnitude-to-noise ratio `|z| / (sqrt 2 sigma_z)`.
#[inline]
pub fn mnr(z: Complex64, sigma_z: f64) -> f64 {
    z.norm() / (std::f64::consts::SQRT_2 * sigma_z)
}

fn ln_i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    loop {
        term *= q / (m * m);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        m += 1.0;
    }
    sum.ln()
}

fn ln_i0_asymptotic(x: f64) -> f64 {
    // I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    x - 0.5 * (2.0 * PI * x).ln() + sum.ln()
}

/// `ln I0(x)` for `x >= 0`.
pub fn ln_i0(x: f64) -> f64 {
    if x < ASYMPTOTIC_FROM {
        ln_i0_series(x)
    } else {
        ln_i0_asymptotic(x)
    }
}

/// Log-density of Rice(lambda, 1) at `y`; `y = 0` gives negative infinity.
pub fn rice_logpdf(y: f64, lambda: f64) -> Result<f64> {
    if !(y >= 0.0) || !(lambda >= 0.0) || !y.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Rice density needs y >= 0 and lambda >= 0, got y={y}, lambda={lambda}"
        )));
    }
    if y == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(y.ln() - 0.5 * (y * y + lambda * lambda) + ln_i0(y * lambda))
}

/// Moment estimate `sqrt(max(0, mean y^2 - 2))`.
pub fn rice_lambda_estimate(y_row: &[f64]) -> Result<f64> {
    if y_row.is_empty() {
        return Err(Error::InvalidArgument("empty MNR row".into()));
    }
    if y_row.iter().any(|y| !(*y >= 0.0) || !y.is_finite()) {
        return Err(Error::InvalidArgument("MNRs must be finite and >= 0".into()));
    }
    let mean_sq = y_row.iter().map(|y| y * y).sum::<f64>() / y_row.len() as f64;
    Ok((mean_sq - 2.0).max(0.0).sqrt())
}

/// MNRs of the tonal striations under `q`.
pub fn tonal_observation(
    surface: &ComplexSurface,
    q: &ParameterHypothesis,
    view: &BandPartition,
    sigmas: &[f64],
    ids: &[usize],
) -> Result<TonalObservation> {
    let z = build_striation_matrix(surface, q, view, ids)?;
    let j = z.n_cols();
    let mnr = z
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| mnr(v, sigmas[i % j]))
        .collect();
    Ok(TonalObservation {
        mnr,
        noise_sigma: sigmas.to_vec(),
    })
}

/// `sum_l sum_j ln f(y_{l,j}; lambda_hat_l)` and the `lambda_hat_l`.
pub fn rice_joint_loglik(obs: &TonalObservation) -> Result<(f64, Vec<f64>)> {
    let mut total = 0.0;
    let mut lambdas = Vec::with_capacity(obs.n_rows());
    for l in 0..obs.n_rows() {
        let row = obs.row(l);
        let lambda = rice_lambda_estimate(row)?;
        let mut row_sum = 0.0;
        for &y in row {
            row_sum += rice_logpdf(y, lambda)?;
        }
        total += row_sum;
        lambdas.push(lambda);
    }
    Ok((total, lambdas))
}

/// Tonal-bin search over the swept coordinate of `grid`. The partition's
/// tonal bins form the projected set; noise levels come from broadband bins
/// within `neighborhood_hz`.
pub fn estimate_tonal(
    surface: &ComplexSurface,
    grid: &SearchGrid,
    sweep: Sweep,
    band: &BandPartition,
    neighborhood_hz: f64,
) -> Result<EstimateResult> {
    grid.rdot_fixed.check_len(surface.n_snapshots())?;
    let freqs = surface.freqs();
    let view = band.tonal_view(&freqs)?;
    let sigmas = view
        .broadband
        .iter()
        .map(|&k| noise_sigma(surface, k, band, neighborhood_hz))
        .collect::<Result<Vec<_>>>()?;
    let (_, ids) = valid_striation_count(surface.n_snapshots(), surface.t_delta(), &freqs, &view, grid)?;
    grid_search(grid, sweep, view.reference, &ids, |q| {
        let obs = tonal_observation(surface, q, &view, &sigmas, &ids)?;
        let (loglik, lambdas) = rice_joint_loglik(&obs)?;
        Ok(Evaluation {
            loglik,
            rho_hat: Vec::new(),
            theta_hat: lambdas,
        })
    })
}

pub fn estimate_range_tonal(
    surface: &ComplexSurface,
    rdot: &RangeRate,
    beta: f64,
    r_grid: &[f64],
    band: &BandPartition,
    neighborhood_hz: f64,
) -> Result<EstimateResult> {
    let grid = SearchGrid::new(r_grid.to_vec(), rdot.clone(), vec![beta])?;
    estimate_tonal(surface, &grid, Sweep::Range, band, neighborhood_hz)
}

pub fn estimate_wi_tonal(
    surface: &ComplexSurface,
    range_m: f64,
    rdot: &RangeRate,
    beta_grid: &[f64],
    band: &BandPartition,
    neighborhood_hz: f64,
) -> Result<EstimateResult> {
    let grid = SearchGrid::new(vec![range_m], rdot.clone(), beta_grid.to_vec())?;
    estimate_tonal(surface, &grid, Sweep::Beta, band, neighborhood_hz)
}
