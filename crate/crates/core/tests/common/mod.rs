//! Shared helpers for the integration suites: goodness-of-fit statistics,
//! quadrature and scene builders.

#![allow(dead_code)]

use wirange::simulate::{synth_surface, Profile, SceneConfig, TonalLine, FIELD_TONALS};
use wirange::{partition_bands, BandPartition, ComplexSurface, ParameterHypothesis};

/// Two-sided one-sample Kolmogorov-Smirnov statistic of `xs` against `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov tail probability with the small-sample correction
/// `lambda = (sqrt n + 0.12 + 0.11 / sqrt n) D`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

pub fn rayleigh_cdf(x: f64, theta: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-x * x / (2.0 * theta * theta)).exp()
    }
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn sign_test_pvalue(k: usize, n: usize) -> f64 {
    let mut total = 0.0;
    for i in k..=n {
        let mut c = 1.0;
        for j in 0..i {
            c *= (n - j) as f64 / (i - j) as f64;
        }
        total += c;
    }
    total / 2f64.powi(n as i32)
}

/// Fraction helper for pass-rate lines.
pub fn rate(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}

/// Field-band scene with background noise at 0.3 of the source level.
pub fn noisy_scene(range_m: f64, n: usize, seed: u64) -> SceneConfig {
    let mut cfg = SceneConfig::field_band(range_m, n, seed);
    cfg.noise_sigma = Profile::Constant(0.3);
    cfg
}

/// Noisy scene carrying the five field tonals at amplitude `amp`.
pub fn dual_content_scene(range_m: f64, n: usize, seed: u64, amp: f64) -> SceneConfig {
    let mut cfg = noisy_scene(range_m, n, seed);
    cfg.tonal = FIELD_TONALS
        .iter()
        .map(|&f| TonalLine {
            freq_hz: f,
            amplitude: amp.into(),
        })
        .collect();
    cfg
}

pub fn build(cfg: &SceneConfig) -> (ComplexSurface, ParameterHypothesis, BandPartition) {
    let (s, q) = synth_surface(cfg).expect("scene");
    let band = partition_bands(&s.freqs(), &FIELD_TONALS, 0.4).expect("band");
    (s, q, band)
}

/// Whether the points at or above half height (measured from the curve
/// median) form one contiguous run that contains `truth_index`.
pub fn single_lobe(loglik: &[f64], truth_index: usize) -> bool {
    let mut finite: Vec<f64> = loglik.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return false;
    }
    finite.sort_by(f64::total_cmp);
    let median = finite[finite.len() / 2];
    let max = finite[finite.len() - 1];
    let cut = median + 0.5 * (max - median);
    let above: Vec<usize> = (0..loglik.len()).filter(|&i| loglik[i] >= cut).collect();
    let contiguous = above.windows(2).all(|w| w[1] == w[0] + 1);
    contiguous && above.first() <= Some(&truth_index) && above.last() >= Some(&truth_index)
}

#[test]
fn helpers_self_check() {
    // a perfect uniform grid sits at D = 1/(2n)
    let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
    assert!((ks_statistic(&xs, |x| x) - 0.005).abs() < 1e-12);
    assert!(ks_pvalue(0.005, 100) > 0.999);
    // critical value of D at alpha = 0.05 is about 1.358 / sqrt n
    assert!((ks_pvalue(1.358 / 30.0, 900) - 0.05).abs() < 0.003);
    assert!((simpson(|x| x * x, 0.0, 3.0, 10) - 9.0).abs() < 1e-12);
    assert!((sign_test_pvalue(15, 20) - 0.020_694_7).abs() < 1e-6);
    assert_eq!(sign_test_pvalue(0, 5), 1.0);
    assert!(single_lobe(&[0.0, 1.0, 5.0, 6.0, 5.0, 1.0, 0.0], 3));
    assert!(!single_lobe(&[0.0, 6.0, 0.0, 0.0, 6.0, 0.0, 0.0], 1));
}
