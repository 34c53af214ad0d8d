//! Grid-search maximum-likelihood estimation of range and WI, plus a
//! sliding-window range tracker.

use rayon::prelude::*;

use crate::band::BandPartition;
use crate::error::{Error, Result};
use crate::ingest::GroundTruth;
use crate::likelihood::joint_loglik_detailed;
use crate::surface::{
    ComplexSurface, EstimateDiagnostics, EstimateResult, ParameterHypothesis, RangeRate,
    SearchGrid,
};
use crate::transform::{build_striation_matrix, valid_striation_count};
use crate::whiten::whiten;

/// Which coordinate of the hypothesis a search sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Range,
    Beta,
}

/// Log-likelihood of one hypothesis with the per-column and per-row
/// parameters it was evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loglik: f64,
    pub rho_hat: Vec<f64>,
    pub theta_hat: Vec<f64>,
}

/// Transform, whiten and score one hypothesis over the striations `ids`.
/// Both sweeps go through this function.
pub fn evaluate(
    surface: &ComplexSurface,
    band: &BandPartition,
    q: &ParameterHypothesis,
    ids: &[usize],
) -> Result<Evaluation> {
    let z = build_striation_matrix(surface, q, band, ids)?;
    let xw = whiten(&z)?;
    let (loglik, theta) = joint_loglik_detailed(&xw)?;
    let rho_hat = xw
        .whitened()
        .map(|w| w.diagnostics.rho_hat.clone())
        .unwrap_or_default();
    Ok(Evaluation {
        loglik,
        rho_hat,
        theta_hat: theta.0,
    })
}

fn rejects(e: &Error) -> bool {
    e.is_hypothesis_rejection() || matches!(e, Error::InvalidCell { .. })
}

/// Hypothesis at grid point `i` of the swept coordinate.
fn hypothesis(grid: &SearchGrid, sweep: Sweep, i: usize) -> Result<ParameterHypothesis> {
    let (r, beta) = match sweep {
        Sweep::Range => (grid.r_grid[i], grid.beta_grid[0]),
        Sweep::Beta => (grid.r_grid[0], grid.beta_grid[i]),
    };
    ParameterHypothesis::new(r, grid.rdot_fixed.clone(), beta)
}

/// Evaluates every point of the swept grid concurrently and reduces in grid
/// order. Hypothesis-specific failures score negative infinity; ties go to
/// the first (smallest) grid value.
pub fn grid_search<F>(
    grid: &SearchGrid,
    sweep: Sweep,
    reference_bin: usize,
    ids: &[usize],
    eval: F,
) -> Result<EstimateResult>
where
    F: Fn(&ParameterHypothesis) -> Result<Evaluation> + Sync,
{
    let values = match sweep {
        Sweep::Range => &grid.r_grid,
        Sweep::Beta => &grid.beta_grid,
    };
    let outcomes: Vec<Result<Option<Evaluation>>> = (0..values.len())
        .into_par_iter()
        .map(|i| match eval(&hypothesis(grid, sweep, i)?) {
            Ok(ev) => Ok(Some(ev)),
            Err(e) if rejects(&e) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();

    let mut loglik = Vec::with_capacity(values.len());
    let mut best: Option<(usize, Evaluation)> = None;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            Some(ev) => {
                loglik.push(ev.loglik);
                let better = match &best {
                    None => ev.loglik > f64::NEG_INFINITY,
                    Some((_, b)) => ev.loglik > b.loglik,
                };
                if better {
                    best = Some((i, ev));
                }
            }
            None => loglik.push(f64::NEG_INFINITY),
        }
    }
    let (argmax_index, ev) = best.ok_or(Error::AllHypothesesRejected)?;
    Ok(EstimateResult {
        grid: values.clone(),
        loglik,
        argmax_index,
        argmax: values[argmax_index],
        diagnostics: EstimateDiagnostics {
            m: ids.len(),
            reference_bin,
            striation_ids: ids.to_vec(),
            rho_hat: ev.rho_hat,
            theta_hat: ev.theta_hat,
        },
    })
}

/// Broadband search over the swept coordinate of `grid`, using every
/// striation valid across the grid.
pub fn estimate(
    surface: &ComplexSurface,
    grid: &SearchGrid,
    sweep: Sweep,
    band: &BandPartition,
) -> Result<EstimateResult> {
    grid.rdot_fixed.check_len(surface.n_snapshots())?;
    let (_, ids) = valid_striation_count(
        surface.n_snapshots(),
        surface.t_delta(),
        &surface.freqs(),
        band,
        grid,
    )?;
    estimate_with_striations(surface, grid, sweep, band, &ids)
}

/// As [`estimate`] with a caller-chosen striation set.
pub fn estimate_with_striations(
    surface: &ComplexSurface,
    grid: &SearchGrid,
    sweep: Sweep,
    band: &BandPartition,
    ids: &[usize],
) -> Result<EstimateResult> {
    grid_search(grid, sweep, band.reference, ids, |q| evaluate(surface, band, q, ids))
}

/// Range estimate `r_hat` at the last snapshot with known rate and WI.
pub fn estimate_range(
    surface: &ComplexSurface,
    rdot: &RangeRate,
    beta: f64,
    r_grid: &[f64],
    band: &BandPartition,
) -> Result<EstimateResult> {
    let grid = SearchGrid::new(r_grid.to_vec(), rdot.clone(), vec![beta])?;
    estimate(surface, &grid, Sweep::Range, band)
}

/// WI estimate with known range and rate.
pub fn estimate_wi(
    surface: &ComplexSurface,
    range_m: f64,
    rdot: &RangeRate,
    beta_grid: &[f64],
    band: &BandPartition,
) -> Result<EstimateResult> {
    let grid = SearchGrid::new(vec![range_m], rdot.clone(), beta_grid.to_vec())?;
    estimate(surface, &grid, Sweep::Beta, band)
}

/// How range grids are laid out for each track window.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackGrid {
    /// The same grid for every window.
    Fixed(Vec<f64>),
    /// `truth(t_end) * (1 +- span_frac)` at `step_m` spacing.
    AroundTruth { span_frac: f64, step_m: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackProtocol {
    /// Striations per window.
    pub target_m: usize,
    /// Snapshots between consecutive window ends.
    pub stride: usize,
    /// Snapshot index of the first window end.
    pub first_end: usize,
    pub beta: f64,
    /// Assumed rate: constant, or one value per step of the whole surface.
    pub rdot: RangeRate,
    pub grid: TrackGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    /// Snapshot index of the window's last snapshot.
    pub end_index: usize,
    pub time_s: f64,
    pub window_len: usize,
    pub truth_m: Option<f64>,
    pub outcome: std::result::Result<TrackEstimate, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackEstimate {
    pub range_m: f64,
    pub loglik: f64,
    pub m: usize,
}

impl TrackPoint {
    pub fn range_m(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|e| e.range_m)
    }

    /// `r_hat - truth` when both exist.
    pub fn error_m(&self) -> Option<f64> {
        Some(self.range_m()? - self.truth_m?)
    }
}

/// Root-mean-square of the per-window errors; `None` if no window has both
/// an estimate and a truth value.
pub fn track_rmse(points: &[TrackPoint]) -> Option<f64> {
    let errs: Vec<f64> = points.iter().filter_map(TrackPoint::error_m).collect();
    if errs.is_empty() {
        return None;
    }
    Some((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt())
}

/// Shortest window ending at `end` whose grid-wide valid set holds at least
/// `target_m` striations; returns the window start and the last `target_m`
/// valid striations (window-relative).
pub fn size_window(
    surface: &ComplexSurface,
    end: usize,
    target_m: usize,
    grid_for: impl Fn(usize, usize) -> Result<SearchGrid>,
    band: &BandPartition,
) -> Result<(usize, Vec<usize>)> {
    if target_m == 0 {
        return Err(Error::InvalidArgument("target M must be >= 1".into()));
    }
    let freqs = surface.freqs();
    for len in target_m.max(2)..=end + 1 {
        let start = end + 1 - len;
        let grid = grid_for(start, len)?;
        match valid_striation_count(len, surface.t_delta(), &freqs, band, &grid) {
            Ok((m, ids)) if m >= target_m => return Ok((start, ids[m - target_m..].to_vec())),
            Ok(_) | Err(Error::WindowTooShort) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::WindowTooShort)
}

fn track_window(
    surface: &ComplexSurface,
    end: usize,
    protocol: &TrackProtocol,
    band: &BandPartition,
    truth_m: Option<f64>,
) -> Result<(usize, EstimateResult)> {
    let r_grid = match &protocol.grid {
        TrackGrid::Fixed(g) => g.clone(),
        TrackGrid::AroundTruth { span_frac, step_m } => {
            let r = truth_m.ok_or_else(|| {
                Error::GroundTruth(format!("no truth at snapshot {end}"))
            })?;
            crate::surface::linear_grid(r * (1.0 - span_frac), r * (1.0 + span_frac), *step_m)?
        }
    };
    let grid_for = |start: usize, len: usize| {
        SearchGrid::new(r_grid.clone(), protocol.rdot.window(start, len), vec![protocol.beta])
    };
    let (start, ids) = size_window(surface, end, protocol.target_m, grid_for, band)?;
    let len = end + 1 - start;
    let win = surface.window(start, len)?;
    let grid = grid_for(start, len)?;
    let est = estimate_with_striations(&win, &grid, Sweep::Range, band, &ids)?;
    Ok((len, est))
}

/// Range estimates on sliding windows of a long surface, each anchored at
/// its last snapshot. Window failures are recorded and the track goes on.
pub fn run_track(
    surface: &ComplexSurface,
    protocol: &TrackProtocol,
    band: &BandPartition,
    truth: Option<&GroundTruth>,
) -> Result<Vec<TrackPoint>> {
    if protocol.stride == 0 {
        return Err(Error::InvalidArgument("track stride must be >= 1".into()));
    }
    protocol.rdot.check_len(surface.n_snapshots())?;
    let n = surface.n_snapshots();
    let ends: Vec<usize> = (protocol.first_end..n).step_by(protocol.stride).collect();
    let points = ends
        .into_iter()
        .map(|end| {
            let time_s = surface.time(end);
            let truth_m = truth.and_then(|g| g.range_at(time_s));
            let (window_len, outcome) = match track_window(surface, end, protocol, band, truth_m) {
                Ok((len, est)) => (
                    len,
                    Ok(TrackEstimate {
                        range_m: est.argmax,
                        loglik: est.loglik[est.argmax_index],
                        m: est.diagnostics.m,
                    }),
                ),
                Err(e) => (0, Err(e.to_string())),
            };
            TrackPoint {
                end_index: end,
                time_s,
                window_len,
                truth_m,
                outcome,
            }
        })
        .collect();
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::partition_bands;
    use crate::simulate::{synth_surface, SceneConfig};

    fn scene(seed: u64) -> (ComplexSurface, ParameterHypothesis, BandPartition) {
        let cfg = SceneConfig::field_band(22_700.0, 120, seed);
        let (s, q) = synth_surface(&cfg).unwrap();
        let band = partition_bands(&s.freqs(), &[], 0.4).unwrap();
        (s, q, band)
    }

    #[test]
    fn single_point_grids() {
        let (s, q, band) = scene(1);
        let r = estimate_range(&s, &q.range_rate, q.beta, &[q.range_m], &band).unwrap();
        assert_eq!(r.argmax, q.range_m);
        let b = estimate_wi(&s, q.range_m, &q.range_rate, &[q.beta], &band).unwrap();
        assert_eq!(b.argmax, q.beta);
    }

    #[test]
    fn both_sweeps_share_the_pipeline() {
        let (s, q, band) = scene(2);
        let r = estimate_range(&s, &q.range_rate, q.beta, &[q.range_m], &band).unwrap();
        let b = estimate_wi(&s, q.range_m, &q.range_rate, &[q.beta], &band).unwrap();
        assert_eq!(r.loglik[0].to_bits(), b.loglik[0].to_bits());
        let direct = evaluate(&s, &band, &q, &r.diagnostics.striation_ids).unwrap();
        assert_eq!(direct.loglik.to_bits(), r.loglik[0].to_bits());
    }

    #[test]
    fn ties_break_low_and_rejections_are_neg_inf() {
        let grid = SearchGrid::new(vec![1.0, 2.0, 3.0, 4.0], RangeRate::Constant(1.0), vec![1.0]).unwrap();
        let res = grid_search(&grid, Sweep::Range, 0, &[0], |q| {
            if q.range_m == 1.0 {
                return Err(Error::DegenerateStriation);
            }
            Ok(Evaluation {
                loglik: if q.range_m >= 3.0 { 5.0 } else { 1.0 },
                rho_hat: vec![],
                theta_hat: vec![],
            })
        })
        .unwrap();
        assert_eq!(res.argmax, 3.0);
        assert_eq!(res.loglik[0], f64::NEG_INFINITY);
        let all_bad = grid_search(&grid, Sweep::Range, 0, &[0], |_| Err(Error::DegenerateStriation));
        assert!(matches!(all_bad, Err(Error::AllHypothesesRejected)));
        let fatal = grid_search(&grid, Sweep::Range, 0, &[0], |_| Err(Error::WindowTooShort));
        assert!(matches!(fatal, Err(Error::WindowTooShort)));
    }

    #[test]
    fn rmse_of_perfect_track_is_zero() {
        let p = |r: f64| TrackPoint {
            end_index: 0,
            time_s: 0.0,
            window_len: 1,
            truth_m: Some(r),
            outcome: Ok(TrackEstimate { range_m: r, loglik: 0.0, m: 1 }),
        };
        assert_eq!(track_rmse(&[p(1000.0), p(2000.0)]), Some(0.0));
        assert_eq!(track_rmse(&[]), None);
    }
}
