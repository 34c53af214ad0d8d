use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use wirange::ingest::{
    load_groundtruth, load_surface, read_raw_audio, save_groundtruth, save_surface, stft,
    write_raw_audio, StftParams,
};
use wirange::ComplexSurface;

fn hamming_oracle(len: usize) -> Vec<f64> {
    (0..len)
        .map(|m| 0.54 - 0.46 * (2.0 * PI * m as f64 / (len - 1) as f64).cos())
        .collect()
}

fn direct_dft(x: &[f64], nfft: usize, k: usize) -> Complex64 {
    x.iter()
        .enumerate()
        .map(|(m, &v)| Complex64::from_polar(v, -2.0 * PI * (k * m) as f64 / nfft as f64))
        .sum()
}

#[test]
fn stft_matches_direct_transform() {
    let params = StftParams {
        sample_rate: 16.0,
        segment_s: 4.0,
        zeropad_s: 4.0,
        overlap_frac: 0.5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
    let s = stft(&x, &params, [0.0, 8.0]).unwrap();
    let w = hamming_oracle(64);
    assert_eq!(s.n_snapshots(), (200 - 64) / 32 + 1);
    assert_eq!(s.n_bins(), 65);
    for n in 0..s.n_snapshots() {
        let seg: Vec<f64> = (0..64).map(|m| x[n * 32 + m] * w[m]).collect();
        for k in 0..s.n_bins() {
            let want = direct_dft(&seg, 128, k);
            assert!((s.get(n, k) - want).norm() < 1e-9 * (1.0 + want.norm()), "n={n} k={k}");
        }
        assert_eq!(s.time(n), 2.0 + 2.0 * n as f64);
    }
}

#[test]
fn dc_bin_is_window_sum() {
    let params = StftParams {
        sample_rate: 20.0,
        segment_s: 3.0,
        zeropad_s: 0.0,
        overlap_frac: 0.25,
    };
    let c = -2.25;
    let s = stft(&[c; 400], &params, [0.0, 10.0]).unwrap();
    let wsum: f64 = hamming_oracle(60).iter().sum();
    for n in 0..s.n_snapshots() {
        assert!((s.get(n, 0).re - c * wsum).abs() < 1e-10);
        assert!(s.get(n, 0).im.abs() < 1e-10);
    }
}

#[test]
fn sinusoid_peaks_at_its_bin() {
    let params = StftParams::field(100.0);
    let f = 45.3;
    let x: Vec<f64> = (0..6000).map(|i| (2.0 * PI * f * i as f64 / 100.0 + 0.3).cos()).collect();
    let s = stft(&x, &params, [42.0, 49.0]).unwrap();
    let target = s.freqs().iter().position(|&g| (g - f).abs() < 1e-9).unwrap();
    for n in 0..s.n_snapshots() {
        let row = s.row(n);
        let best = (0..row.len())
            .max_by(|&a, &b| row[a].norm().total_cmp(&row[b].norm()))
            .unwrap();
        assert_eq!(best, target);
    }
}

#[test]
fn white_noise_power_tracks_window_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ratios = Vec::new();
    for seg in [2.0, 5.0] {
        let params = StftParams {
            sample_rate: 100.0,
            segment_s: seg,
            zeropad_s: 0.0,
            overlap_frac: 0.0,
        };
        let energy: f64 = hamming_oracle((seg * 100.0) as usize).iter().map(|w| w * w).sum();
        let mut total = 0.0;
        let mut count = 0usize;
        for _ in 0..100 {
            let x: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
            let s = stft(&x, &params, [5.0, 45.0]).unwrap();
            total += s.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += s.values().len();
        }
        ratios.push(total / count as f64 / energy);
    }
    assert!((ratios[0] / ratios[1] - 1.0).abs() < 0.05, "{ratios:?}");
    // unit-variance noise: E|X_k|^2 = sum w^2
    assert!((ratios[1] - 1.0).abs() < 0.05);
}

#[test]
fn hop_is_exact() {
    for (seg, ov) in [(5.0, 0.5), (4.0, 0.75), (2.0, 0.0)] {
        let p = StftParams {
            sample_rate: 100.0,
            segment_s: seg,
            zeropad_s: 1.0,
            overlap_frac: ov,
        };
        let s = stft(&vec![0.5; 3000], &p, [1.0, 40.0]).unwrap();
        assert_eq!(s.t_delta(), seg * (1.0 - ov));
    }
}

#[test]
fn raw_audio_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tone.f32");
    let x: Vec<f64> = (0..6000).map(|i| (2.0 * PI * 44.0 * i as f64 / 100.0).sin()).collect();
    write_raw_audio(&path, &x, 100.0).unwrap();
    let (back, rate) = read_raw_audio(&path).unwrap();
    assert_eq!(rate, 100.0);
    assert_eq!(back.len(), x.len());
    let s = stft(&back, &StftParams::field(rate), [42.0, 49.0]).unwrap();
    let k = s.freqs().iter().position(|&f| (f - 44.0).abs() < 1e-9).unwrap();
    assert!(s.get(3, k).norm() > 100.0 * s.get(3, 0).norm());
}

#[test]
fn ground_truth_slope() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("truth.csv");
    let rows: Vec<(f64, f64)> = (0..=180).map(|i| (10.0 * i as f64, 5_000.0 + 102.0 * i as f64)).collect();
    save_groundtruth(&rows, &path).unwrap();
    let g = load_groundtruth(&path).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let t = rng.random_range(0.0..1790.0);
        let slope = (g.range_at(t + 0.5).unwrap() - g.range_at(t).unwrap()) / 0.5;
        assert!((slope - 10.2).abs() < 1e-9);
    }
}

fn surface_strategy() -> impl Strategy<Value = ComplexSurface> {
    (2usize..12, 2usize..12, any::<u64>()).prop_map(|(n, k, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n * k)
            .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal) * 1e5, rng.sample(StandardNormal)))
            .collect();
        ComplexSurface::new(n, k, rng.random_range(-50.0..50.0), 2.5, 42.0, 0.1, values).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn wirf_file_round_trip(s in surface_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wirf");
        save_surface(&s, &path).unwrap();
        prop_assert_eq!(std::fs::metadata(&path).unwrap().len() as usize, 48 + 16 * s.n_snapshots() * s.n_bins());
        prop_assert_eq!(load_surface(&path).unwrap(), s);
    }
}
