mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::{build, dual_content_scene, rate, simpson};
use wirange::simulate::{synth_surface, Profile, SceneConfig, FIELD_TONALS};
use wirange::tonal::{
    estimate_range_tonal, ln_i0, noise_neighbors, noise_sigma, rice_lambda_estimate, rice_logpdf,
};
use wirange::{linear_grid, partition_bands, RangeRate};

const R: f64 = 22_700.0;

/// `ln sum_m (x^2/4)^m / (m!)^2`, summed term by term until the terms vanish.
fn ln_i0_oracle(x: f64) -> f64 {
    let mut sum = 0.0f64;
    let mut m = 0u32;
    loop {
        let log_term = 2.0 * m as f64 * (0.5 * x).ln() - 2.0 * (1..=m).map(|j| (j as f64).ln()).sum::<f64>();
        let term = if x == 0.0 { if m == 0 { 1.0 } else { 0.0 } } else { log_term.exp() };
        sum += term;
        if m > 5 && term < 1e-18 * sum {
            break;
        }
        m += 1;
    }
    sum.ln()
}

#[test]
fn ln_i0_matches_series() {
    for i in 0..=3000 {
        let x = i as f64 * 0.01;
        let (a, b) = (ln_i0(x), ln_i0_oracle(x));
        assert!((a - b).abs() <= 1e-10, "x = {x}: {a} vs {b}");
    }
}

#[test]
fn rice_density_integrates_to_one() {
    for lambda in [0.0, 0.5, 3.0, 8.0] {
        let total = simpson(|y| rice_logpdf(y, lambda).unwrap().exp(), 0.0, 50.0, 20_000);
        assert!((total - 1.0).abs() < 1e-6, "lambda {lambda}: {total}");
    }
}

#[test]
fn lambda_moment_estimator_is_consistent() {
    let seeds = 100;
    let mut pass = 0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..10_000)
            .map(|_| (4.0 + rng.sample::<f64, _>(StandardNormal)).hypot(rng.sample(StandardNormal)))
            .collect();
        if (3.9..=4.1).contains(&rice_lambda_estimate(&y).unwrap()) {
            pass += 1;
        }
    }
    assert!(rate(pass, seeds as usize) >= 0.95, "{pass}/{seeds}");
}

fn noise_only(n: usize, seed: u64) -> SceneConfig {
    let mut cfg = SceneConfig::field_band(R, n, seed);
    cfg.source_sigma = Profile::Constant(0.0);
    cfg.noise_sigma = Profile::Constant(1.0);
    cfg.range_rate = RangeRate::Constant(0.5);
    cfg
}

#[test]
fn noise_sigma_of_unit_background() {
    let (s, _) = synth_surface(&noise_only(1_000, 3)).unwrap();
    let freqs = s.freqs();
    let band = partition_bands(&freqs, &FIELD_TONALS, 0.4).unwrap();
    let bin = band.tonal[2];
    // 44.4..=45.0 and 45.8..=46.3 Hz: 13 broadband bins within 1 Hz of 45.4 Hz
    assert_eq!(noise_neighbors(&freqs, bin, &band, 1.0).len(), 13);
    let sigma = noise_sigma(&s, bin, &band, 1.0).unwrap();
    assert!((sigma - 1.0).abs() < 0.02, "{sigma}");
    let scaled = noise_sigma(&s.scaled(3.5), bin, &band, 1.0).unwrap();
    assert!((scaled / sigma - 3.5).abs() < 1e-12);
    assert!(noise_sigma(&s, bin, &band, 0.45).is_err());
}

#[test]
fn noise_neighbours_respect_guard() {
    let freqs: Vec<f64> = (0..71).map(|k| 42.0 + 0.1 * k as f64).collect();
    let band = partition_bands(&freqs, &FIELD_TONALS, 0.4).unwrap();
    for &bin in &band.tonal {
        for k in noise_neighbors(&freqs, bin, &band, 1.5) {
            for &ft in &FIELD_TONALS {
                assert!((freqs[k] - ft).abs() >= 0.4 - 1e-9, "bin {k} near {ft}");
            }
        }
    }
}

fn tonal_range(seed: u64, amp: f64) -> (f64, f64) {
    let (s, q, band) = build(&dual_content_scene(R, 400, seed, amp));
    let est = estimate_range_tonal(&s, &q.range_rate, q.beta, &linear_grid(R * 0.6, R * 1.4, 10.0).unwrap(), &band, 1.0)
        .unwrap();
    let finite: Vec<f64> = est.loglik.iter().copied().filter(|v| v.is_finite()).collect();
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    (est.argmax, max - min)
}

#[test]
fn tonal_range_recovery() {
    let seeds = 30;
    let mut hits = 0;
    for seed in 0..seeds {
        let (r_hat, _) = tonal_range(100 + seed, 3.0);
        if ((r_hat - R) / R).abs() <= 0.02 {
            hits += 1;
        }
    }
    assert!(rate(hits, seeds as usize) >= 0.8, "{hits}/{seeds}");
}

#[test]
fn silent_tonals_give_weaker_contrast() {
    for seed in 0..5 {
        let (_, matched) = tonal_range(200 + seed, 3.0);
        let (_, silent) = tonal_range(200 + seed, 0.0);
        assert!(silent < matched, "seed {seed}: {silent} vs {matched}");
    }
}

#[test]
fn tonal_argmax_is_gain_invariant() {
    let (s, q, band) = build(&dual_content_scene(R, 400, 300, 3.0));
    let grid = linear_grid(R * 0.8, R * 1.2, 20.0).unwrap();
    let base = estimate_range_tonal(&s, &q.range_rate, q.beta, &grid, &band, 1.0).unwrap();
    for c in [1e-3, 1e3] {
        let est = estimate_range_tonal(&s.scaled(c), &q.range_rate, q.beta, &grid, &band, 1.0).unwrap();
        assert_eq!(est.argmax_index, base.argmax_index);
    }
}
