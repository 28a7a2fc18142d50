use maxiset::estimator::{
    bandwidth, bias_profile, kernel_estimate, smooth, sup_norm, BandwidthRule, SmoothingOperator,
};
use maxiset::function_zoo::{cosine, default_levels, weierstrass};
use maxiset::kernels::{box_kernel, kernel_from_name};
use maxiset::noise_model::{sample_noise, stream_seed, ModelParams};
use maxiset::{Error, GridFunction};
use proptest::prelude::*;

fn cos_grid(m: usize) -> GridFunction {
    GridFunction::from_fn(1, m, |t| (2.0 * std::f64::consts::PI * t[0]).cos()).unwrap()
}

#[test]
fn bandwidth_matches_direct_arithmetic() {
    let h = bandwidth(100, &BandwidthRule::new(1.0, 0.5, 1).unwrap()).unwrap();
    let oracle = (100f64.ln() / 100.0).sqrt();
    assert!((h - oracle).abs() < 1e-15);
    assert!((h - 0.21460).abs() < 5e-6);
}

#[test]
fn bandwidth_is_linear_in_c_and_decreasing_in_n() {
    let h1 = bandwidth(4096, &BandwidthRule::new(1.0, 1.0, 1).unwrap()).unwrap();
    let h2 = bandwidth(4096, &BandwidthRule::new(2.0, 1.0, 1).unwrap()).unwrap();
    assert_eq!(h2, 2.0 * h1);
    let rule = BandwidthRule::new(1.0, 1.0, 1).unwrap();
    assert!(bandwidth(1_000_000, &rule).unwrap() < bandwidth(1000, &rule).unwrap());
}

#[test]
fn bandwidth_too_large_is_rejected() {
    let rule = BandwidthRule::new(4.0, 0.5, 1).unwrap();
    assert!(matches!(bandwidth(100, &rule), Err(Error::BandwidthTooLarge { .. })));
}

#[test]
fn constant_is_preserved() {
    let f = GridFunction::from_fn(1, 1024, |_| 3.25).unwrap();
    for name in ["box", "poly:beta=2:pow=1", "order:N=3"] {
        let k = kernel_from_name(name, 1).unwrap();
        let g = smooth(&f, &k, 0.1).unwrap();
        let err = g.sup_distance(&f).unwrap();
        // Relative to the mass quadrature accuracy of the kernel.
        assert!(err < 1e-9 * 3.25, "{name}: {err}");
    }
}

#[test]
fn cosine_box_multiplier() {
    let m = 1 << 12;
    let f = cos_grid(m);
    let h = 0.25;
    let g = smooth(&f, &box_kernel(1).unwrap(), h).unwrap();
    let factor = (std::f64::consts::PI * h).sin() / (std::f64::consts::PI * h);
    assert!((factor - 0.90032).abs() < 5e-6);
    // The window covers exactly 1024 cells, so the discrete multiplier is a
    // Riemann sum of the continuous one.
    let err = g.sup_distance(&f.scale(factor)).unwrap();
    assert!(err < 1e-5, "err {err}");
}

#[test]
fn noise_free_estimate_is_smooth() {
    let f = cos_grid(512);
    let k = box_kernel(1).unwrap();
    let z = sample_noise(1, 512, 4).unwrap();
    let est = kernel_estimate(&f, &k, 0.125, &ModelParams::new(0.0, 1000, 2.0).unwrap(), &z).unwrap();
    assert_eq!(est.estimate, smooth(&f, &k, 0.125).unwrap());
}

#[test]
fn decomposition_is_exact() {
    let f = weierstrass(0.5, default_levels(1024), 1, 1024).unwrap().signal;
    let k = box_kernel(1).unwrap();
    let op = SmoothingOperator::new(&k, 0.0625, 1024).unwrap();
    let params = ModelParams::new(1.0, 1 << 12, 2.0).unwrap();
    let z = sample_noise(1, 1024, 8).unwrap();
    let est = op.estimate(&f, &params, &z).unwrap();
    let rebuilt = est.bias_part.add(&op.stochastic_term(&params, &z).unwrap()).unwrap();
    assert!(rebuilt.sup_distance(&est.estimate).unwrap() < 1e-12);
    assert!(est.stochastic_part().sup_distance(&op.stochastic_term(&params, &z).unwrap()).unwrap() < 1e-12);
}

#[test]
fn mismatched_grids_are_rejected() {
    let f = cos_grid(512);
    let z = sample_noise(1, 256, 1).unwrap();
    let r = kernel_estimate(&f, &box_kernel(1).unwrap(), 0.125, &ModelParams::new(1.0, 100, 2.0).unwrap(), &z);
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

#[test]
fn monte_carlo_mean_converges_to_smooth() {
    let m = 256;
    let f = weierstrass(1.5, default_levels(m), 1, m).unwrap().signal;
    let k = kernel_from_name("poly:beta=2:pow=1", 1).unwrap();
    let h = 0.125;
    let params = ModelParams::new(1.0, 1 << 10, 2.0).unwrap();
    let op = SmoothingOperator::new(&k, h, m).unwrap();
    let expected = op.smooth(&f).unwrap();
    let reps = 100u64;
    let mut mean = vec![0.0; m];
    for r in 0..reps {
        let est = op.estimate(&f, &params, &sample_noise(1, m, stream_seed(21, r)).unwrap()).unwrap();
        for (a, v) in mean.iter_mut().zip(est.estimate.values()) {
            *a += v / reps as f64;
        }
    }
    let bound = 4.0 * params.noise_level() * k.l2_norm() / h.sqrt() / (reps as f64).sqrt();
    let ok = mean
        .iter()
        .zip(expected.values())
        .filter(|(a, b)| (*a - *b).abs() <= bound)
        .count();
    assert!(ok as f64 >= 0.99 * m as f64, "{ok} of {m} within {bound}");
}

#[test]
fn sup_norm_examples() {
    assert_eq!(sup_norm(&GridFunction::zeros(1, 64).unwrap()), 0.0);
    assert_eq!(sup_norm(&cos_grid(64)), 1.0);
}

#[test]
fn sup_norm_stable_under_refinement() {
    let h = 1.0 / 32.0;
    let residual = |m: usize| {
        let f = weierstrass(0.5, default_levels(1 << 12), 1, m).unwrap().signal;
        smooth(&f, &box_kernel(1).unwrap(), h).unwrap().sub(&f).unwrap().sup_norm()
    };
    let coarse = residual(1 << 12);
    let fine = residual(1 << 14);
    assert!((coarse / fine - 1.0).abs() < 0.02, "{coarse} vs {fine}");
}

fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|m| 2f64.powi(-m)).collect()
}

#[test]
fn bias_profile_smooth_function_decreases() {
    let f = cosine(1, 1 << 12).unwrap().signal;
    let p = bias_profile(&f, &box_kernel(1).unwrap(), 0.5, &dyadic(3, 8)).unwrap();
    let v = p.normalized();
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    assert!(p.bounded);
}

#[test]
fn bias_profile_member_and_non_member() {
    let m = 1 << 14;
    let f = weierstrass(0.5, default_levels(m), 1, m).unwrap().signal;
    let k = box_kernel(1).unwrap();
    let member = bias_profile(&f, &k, 0.5, &dyadic(3, 9)).unwrap();
    assert!(member.bounded, "{:?}", member.normalized());
    let too_smooth = bias_profile(&f, &k, 0.9, &dyadic(3, 9)).unwrap();
    let v = too_smooth.normalized();
    // Growth like h^{-0.4}: at least 2^{0.4 * 6} / 2 over six halvings.
    assert!(v.last().unwrap() / v[0] > 2.0, "{v:?}");
    assert!(!too_smooth.bounded);
}

#[test]
fn bias_profile_rejects_increasing_bandwidths() {
    let f = cos_grid(256);
    assert!(bias_profile(&f, &box_kernel(1).unwrap(), 0.5, &[0.1, 0.2]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimate_is_linear_in_signal(seed in any::<u64>(), a in -2.0f64..2.0) {
        let m = 256;
        let k = box_kernel(1).unwrap();
        let f1 = cos_grid(m).scale(a);
        let f2 = GridFunction::from_fn(1, m, |t| (6.0 * std::f64::consts::PI * t[0]).sin()).unwrap();
        let params = ModelParams::new(1.0, 4096, 2.0).unwrap();
        let z = sample_noise(1, m, seed).unwrap();
        let lhs = kernel_estimate(&f1.add(&f2).unwrap(), &k, 0.125, &params, &z).unwrap().estimate;
        let rhs = kernel_estimate(&f1, &k, 0.125, &params, &z).unwrap().estimate
            .add(&smooth(&f2, &k, 0.125).unwrap()).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn estimate_is_shift_equivariant(seed in any::<u64>(), s in -600isize..600) {
        let m = 256;
        let k = kernel_from_name("poly:beta=2:pow=1", 1).unwrap();
        let f = weierstrass(0.5, default_levels(m), 1, m).unwrap().signal;
        let params = ModelParams::new(1.0, 4096, 2.0).unwrap();
        let z = sample_noise(1, m, seed).unwrap();
        let a = kernel_estimate(&f.shift(&[s]).unwrap(), &k, 0.125, &params, &z.shift(&[s]).unwrap()).unwrap().estimate;
        let b = kernel_estimate(&f, &k, 0.125, &params, &z).unwrap().estimate.shift(&[s]).unwrap();
        prop_assert!(a.sup_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn sup_norm_is_a_norm(s1 in any::<u64>(), s2 in any::<u64>(), a in -5.0f64..5.0) {
        let x = GridFunction::new(1, 64, sample_noise(1, 64, s1).unwrap().increments().to_vec()).unwrap();
        let y = GridFunction::new(1, 64, sample_noise(1, 64, s2).unwrap().increments().to_vec()).unwrap();
        prop_assert!((sup_norm(&x.scale(a)) - a.abs() * sup_norm(&x)).abs() < 1e-12);
        prop_assert!(sup_norm(&x.add(&y).unwrap()) <= sup_norm(&x) + sup_norm(&y) + 1e-12);
    }

    #[test]
    fn bandwidth_is_monotone(e1 in 4u32..30, gap in 1u32..10, beta in 0.2f64..3.0) {
        let rule = BandwidthRule::new(0.5, beta, 1).unwrap();
        let h1 = bandwidth(1u64 << e1, &rule).unwrap();
        let h2 = bandwidth(1u64 << (e1 + gap), &rule).unwrap();
        prop_assert!(h2 < h1);
    }
}
