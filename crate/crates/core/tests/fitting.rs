use std::f64::consts::{PI, TAU};

use h2asym::fitting::{fit_cosine, fit_exponential, ExpFitOptions, FitError, Sample};
use h2asym::units::wrap_phase;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

const OMEGA: f64 = 2.0 * 1.2 / 0.658_211_956_9;

fn grid(n: usize, omega: f64) -> Vec<f64> {
    let period = TAU / omega;
    (0..n).map(|k| k as f64 * period / n as f64).collect()
}

fn cosine_samples(off: f64, amp: f64, phase: f64, n: usize) -> Vec<Sample> {
    grid(n, OMEGA)
        .into_iter()
        .map(|t| (t, off + amp * (OMEGA * t + phase).cos(), 0.01))
        .collect()
}

#[test]
fn cosine_noise_phase_within_three_sigma() {
    let noise = Normal::new(0.0, 0.02).unwrap();
    let (off, amp, phase) = (0.05, 0.2, 1.1);
    let mut inside = 0;
    let mut pulls = Vec::new();
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<Sample> = grid(32, OMEGA)
            .into_iter()
            .map(|t| (t, off + amp * (OMEGA * t + phase).cos() + noise.sample(&mut rng), 0.02))
            .collect();
        let f = fit_cosine(&s, OMEGA).unwrap();
        let pull = wrap_phase(f.phase - phase) / f.sigma_phase;
        pulls.push(pull);
        if pull.abs() < 3.0 {
            inside += 1;
        }
    }
    assert!(inside >= 196, "{inside}/200 within 3σ");
    // σ_phase is calibrated: the pull spread is close to one
    let var = pulls.iter().map(|p| p * p).sum::<f64>() / pulls.len() as f64;
    assert!((0.75..1.3).contains(&var.sqrt()), "pull rms {}", var.sqrt());
}

#[test]
fn cosine_rejects_short_or_sparse_data() {
    let s = cosine_samples(0.0, 1.0, 0.3, 4);
    assert!(matches!(fit_cosine(&s, OMEGA), Err(FitError::InsufficientData { .. })));
    let half: Vec<Sample> = (0..16).map(|k| (k as f64 * 0.05, (OMEGA * k as f64 * 0.05).cos(), 1.0)).collect();
    assert!(matches!(fit_cosine(&half, OMEGA), Err(FitError::ShortSpan { .. })));
}

#[test]
fn exponential_poisson_counts() {
    // ~10^5 counts in 0.05 eV bins of A e^{-a x} over 0..0.35 eV
    let (a, width) = (4.0, 0.05);
    let x: Vec<f64> = (0..7).map(|i| (i as f64 + 0.5) * width).collect();
    let norm: f64 = x.iter().map(|v| (-a * v).exp()).sum();
    let amp = 1e5 / norm;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let y: Vec<f64> = x
            .iter()
            .map(|v| Poisson::new(amp * (-a * v).exp()).unwrap().sample(&mut rng))
            .collect();
        let f = fit_exponential(&x, &y, (0.0, 0.35), ExpFitOptions::default()).unwrap();
        worst = worst.max((f.decay - a).abs() / a).max((f.amplitude - amp).abs() / amp);
    }
    assert!(worst < 0.05, "worst relative error {worst}");
}

#[test]
fn exponential_refinement_agrees_with_log_fit() {
    let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.04).collect();
    let y: Vec<f64> = x.iter().map(|v| 500.0 * (-3.0 * v).exp()).collect();
    let opts = ExpFitOptions { min_count: 0.0, refine: true };
    let f = fit_exponential(&x, &y, (0.0, 1.0), opts).unwrap();
    assert!((f.amplitude - 500.0).abs() < 1e-9 && (f.decay - 3.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn cosine_fit_is_exact_on_noiseless_data(
        off in -1.0..1.0f64, amp in 0.01..2.0f64, phase in -PI..PI, n in 8usize..64,
    ) {
        let f = fit_cosine(&cosine_samples(off, amp, phase, n), OMEGA).unwrap();
        prop_assert!((f.offset - off).abs() < 1e-10);
        prop_assert!((f.amplitude - amp).abs() < 1e-10);
        prop_assert!(wrap_phase(f.phase - phase).abs() < 1e-9);
    }

    #[test]
    fn cosine_fit_affine_equivariance(
        off in -1.0..1.0f64, amp in 0.05..1.0f64, phase in -PI..PI,
        scale in 0.1..10.0f64, shift in -5.0..5.0f64, dt in -3.0..3.0f64,
    ) {
        let base = cosine_samples(off, amp, phase, 24);
        // deterministic wiggle so the fit is not exact
        let s: Vec<Sample> = base.iter().enumerate()
            .map(|(k, &(t, v, e))| (t, v + 0.01 * ((k * 7 % 5) as f64 - 2.0), e)).collect();
        let f = fit_cosine(&s, OMEGA).unwrap();
        let g_s: Vec<Sample> = s.iter().map(|&(t, v, e)| (t + dt, scale * v + shift, scale * e)).collect();
        let g = fit_cosine(&g_s, OMEGA).unwrap();
        prop_assert!((g.offset - (scale * f.offset + shift)).abs() < 1e-9 * scale.max(1.0));
        prop_assert!((g.amplitude - scale * f.amplitude).abs() < 1e-9 * scale);
        for &(t, _, _) in &s {
            prop_assert!((g.eval(t + dt) - (scale * f.eval(t) + shift)).abs() < 1e-8 * scale.max(1.0));
        }
        prop_assert!((g.sigma_phase - f.sigma_phase).abs() < 1e-9);
    }

    #[test]
    fn exponential_fit_scale_equivariance(
        amp in 10.0..1e5f64, decay in 0.5..8.0f64, scale in 0.5..100.0f64,
    ) {
        let x: Vec<f64> = (0..8).map(|i| (i as f64 + 0.5) * 0.05).collect();
        let y: Vec<f64> = x.iter().enumerate()
            .map(|(i, v)| amp * (-decay * v).exp() * (1.0 + 0.02 * ((i % 3) as f64 - 1.0))).collect();
        let opts = ExpFitOptions { min_count: 0.0, refine: false };
        let f = fit_exponential(&x, &y, (0.0, 0.4), opts).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| scale * v).collect();
        let g = fit_exponential(&x, &ys, (0.0, 0.4), opts).unwrap();
        prop_assert!((g.amplitude / f.amplitude - scale).abs() < 1e-9 * scale);
        prop_assert!((g.decay - f.decay).abs() < 1e-9);
    }
}
