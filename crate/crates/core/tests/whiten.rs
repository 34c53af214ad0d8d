mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::{build, ks_pvalue, ks_statistic, noisy_scene, rate};
use wirange::simulate::{Profile, StriationPattern};
use wirange::transform::{build_striation_matrix, valid_striation_count, StriationMatrix};
use wirange::whiten::{cauchy_ratio_samples, half_iqr, whiten};
use wirange::{ParameterHypothesis, RangeRate, SearchGrid};

fn cauchy_cdf(x: f64, scale: f64) -> f64 {
    0.5 + (x / scale).atan() / PI
}

fn gaussian_columns(rng: &mut ChaCha8Rng, rows: usize, scales: &[f64]) -> StriationMatrix {
    let mut values = Vec::with_capacity(rows * scales.len());
    for _ in 0..rows {
        for &s in scales {
            values.push(Complex64::new(
                s * rng.sample::<f64, _>(StandardNormal),
                s * rng.sample::<f64, _>(StandardNormal),
            ));
        }
    }
    StriationMatrix::from_values(
        ParameterHypothesis::new(1_000.0, RangeRate::Constant(1.0), 1.0).unwrap(),
        (0..rows).collect(),
        (0..scales.len()).collect(),
        0,
        values,
    )
    .unwrap()
}

#[test]
fn ratio_samples_are_cauchy() {
    let seeds = 200;
    let mut pass = 0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = gaussian_columns(&mut rng, 212, &[1.0, 3.0]);
        let v = cauchy_ratio_samples(&z, 1).unwrap();
        assert_eq!(v.len(), 424);
        if ks_pvalue(ks_statistic(&v, |x| cauchy_cdf(x, 3.0)), v.len()) >= 0.01 {
            pass += 1;
        }
    }
    assert!(rate(pass, seeds as usize) >= 0.95, "{pass}/{seeds}");
}

#[test]
fn half_iqr_recovers_cauchy_scale() {
    let seeds = 100;
    let mut pass = 0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        // inverse-CDF draws from Cauchy(0, 2.5)
        let x: Vec<f64> = (0..100_000)
            .map(|_| 2.5 * (PI * (rng.random::<f64>() - 0.5)).tan())
            .collect();
        let h = half_iqr(&x).unwrap();
        if (2.45..=2.55).contains(&h) {
            pass += 1;
        }
    }
    assert!(rate(pass, seeds as usize) >= 0.95, "{pass}/{seeds}");
}

#[test]
fn scene_column_scale_of_four() {
    // bin 55 carries four times the reference source level on a flat envelope
    let seeds = 100;
    let mut pass = 0;
    for seed in 0..seeds {
        let mut cfg = noisy_scene(22_700.0, 347, 2_000 + seed);
        cfg.noise_sigma = Profile::Constant(0.0);
        cfg.envelope = Profile::Constant(1.0);
        let mut src = vec![1.0; cfg.n_bins];
        src[55] = 4.0;
        cfg.source_sigma = Profile::PerBin(src);
        let (s, q, band) = build(&cfg);
        let grid = SearchGrid::new(vec![q.range_m], q.range_rate.clone(), vec![q.beta]).unwrap();
        let (m, ids) = valid_striation_count(s.n_snapshots(), s.t_delta(), &s.freqs(), &band, &grid).unwrap();
        let xw = whiten(&build_striation_matrix(&s, &q, &band, &ids).unwrap()).unwrap();
        let d = &xw.whitened().unwrap().diagnostics;
        assert_eq!(d.sample_count, 2 * m);
        let col = band.broadband.iter().position(|&k| k == 55).unwrap();
        if (3.0..=5.0).contains(&d.rho_hat[col]) {
            pass += 1;
        }
    }
    assert!(rate(pass, seeds as usize) >= 0.95, "{pass}/{seeds}");
}

#[test]
fn global_gain_scales_magnitudes_only() {
    let (s, q, band) = build(&noisy_scene(22_700.0, 347, 3));
    let grid = SearchGrid::new(vec![q.range_m], q.range_rate.clone(), vec![q.beta]).unwrap();
    let (_, ids) = valid_striation_count(s.n_snapshots(), s.t_delta(), &s.freqs(), &band, &grid).unwrap();
    let base = whiten(&build_striation_matrix(&s, &q, &band, &ids).unwrap()).unwrap();
    for c in [1e-3, 7.5, 1e3] {
        let scaled = whiten(&build_striation_matrix(&s.scaled(c), &q, &band, &ids).unwrap()).unwrap();
        let (a, b) = (base.whitened().unwrap(), scaled.whitened().unwrap());
        for (ra, rb) in a.diagnostics.rho_hat.iter().zip(&b.diagnostics.rho_hat) {
            assert!((ra - rb).abs() <= 1e-12 * ra);
        }
        for (xa, xb) in a.mags.iter().zip(&b.mags) {
            assert!((c * xa - xb).abs() <= 1e-12 * xb.max(1e-300));
        }
    }
}

#[test]
fn mismatched_hypothesis_breaks_cauchy_fit() {
    // at the wrong range the reference and bin samples come from different
    // points of the striation pattern, so the ratio spread widens
    let mut cfg = noisy_scene(22_700.0, 347, 5);
    cfg.pattern = StriationPattern { c0: 1.0, c1: 0.9, period: 0.02, phase: 0.0 };
    let (s, q, band) = build(&cfg);
    let grid = SearchGrid::new(
        vec![q.range_m - 5_000.0, q.range_m],
        q.range_rate.clone(),
        vec![q.beta],
    )
    .unwrap();
    let (_, ids) = valid_striation_count(s.n_snapshots(), s.t_delta(), &s.freqs(), &band, &grid).unwrap();
    let spread = |r: f64| {
        let h = ParameterHypothesis::new(r, q.range_rate.clone(), q.beta).unwrap();
        let z = build_striation_matrix(&s, &h, &band, &ids).unwrap();
        let col = (z.reference_col + 10) % z.n_cols();
        let v = cauchy_ratio_samples(&z, col).unwrap();
        let scale = half_iqr(&v).unwrap();
        ks_statistic(&v, |x| cauchy_cdf(x, scale))
    };
    assert!(spread(q.range_m) < spread(q.range_m - 5_000.0));
}
