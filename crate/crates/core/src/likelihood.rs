//! Rayleigh scale estimation along striations and the joint log-likelihood
//! of a whitened striation matrix.
//!
//! The density used is the standard Rayleigh form
//! `f(x; theta) = x / theta^2 * exp(-x^2 / (2 theta^2))`, whose maximiser in
//! `theta` is `sqrt(sum x^2 / (2K))`. Everything is accumulated in the log
//! domain with a fixed summation order.

use crate::error::{Error, Result};
use crate::transform::StriationMatrix;

/// Per-striation Rayleigh scale estimates, in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector(pub Vec<f64>);

/// Rayleigh scale MLE `sqrt(sum x^2 / (2K))` of one striation.
pub fn rayleigh_mle(row: &[f64]) -> Result<f64> {
    if row.is_empty() {
        return Err(Error::InvalidArgument("empty striation".into()));
    }
    if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("magnitudes must be finite and >= 0".into()));
    }
    let sum_sq: f64 = row.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(Error::DegenerateStriation);
    }
    Ok((sum_sq / (2.0 * row.len() as f64)).sqrt())
}

/// `ln f(x; theta)`; `x = 0` gives negative infinity.
#[inline]
pub fn rayleigh_logpdf(x: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!("Rayleigh scale must be > 0, got {theta}")));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("Rayleigh sample must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let t2 = theta * theta;
    Ok((x / t2).ln() - x * x / (2.0 * t2))
}

/// Joint log-likelihood of a whitened matrix together with the plug-in
/// scales it was evaluated at.
pub fn joint_loglik_detailed(xw: &StriationMatrix) -> Result<(f64, ThetaVector)> {
    if xw.whitened().is_none() {
        return Err(Error::InvalidArgument("striation matrix is not whitened".into()));
    }
    let mut total = 0.0;
    let mut thetas = Vec::with_capacity(xw.n_rows());
    for row in 0..xw.n_rows() {
        let x = xw.whitened_row(row).expect("whitened");
        let theta = rayleigh_mle(x)?;
        let mut row_sum = 0.0;
        for &v in x {
            row_sum += rayleigh_logpdf(v, theta)?;
        }
        total += row_sum;
        thetas.push(theta);
    }
    Ok((total, ThetaVector(thetas)))
}

/// `sum_l sum_k ln f(x_{l,k}; theta_hat_l)` over a whitened matrix.
pub fn joint_loglik(xw: &StriationMatrix) -> Result<f64> {
    joint_loglik_detailed(xw).map(|(v, _)| v)
}
