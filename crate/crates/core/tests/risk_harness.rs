use maxiset::kernels::{box_kernel, kernel_from_name};
use maxiset::noise_model::ModelParams;
use maxiset::risk_harness::{
    lemma1_check, maxiset_verdict, mc_risk, psi, rate_fit, rate_fit_values, target_exponent,
    theorem1_bandwidth_check, variance_lower_bound_check, ExperimentConfig, Procedure, Verdict,
};
use maxiset::Error;
use proptest::prelude::*;

fn grid(lo: u32, hi: u32, step: u32) -> Vec<u64> {
    (lo..=hi).step_by(step as usize).map(|k| 1u64 << k).collect()
}

fn cfg(function: &str, beta: f64, kernel: &str, m: usize, n_grid: Vec<u64>, reps: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::fixed(function, beta, kernel, 1, m, n_grid);
    c.c = 0.5;
    c.replications = reps;
    c.seed = 7;
    c
}

#[test]
fn psi_examples() {
    let oracle = (100f64.ln() / 100.0).cbrt();
    assert!((psi(100, 1.0, 1) - oracle).abs() < 1e-14);
    assert!((psi(100, 1.0, 1) - 0.3584).abs() < 5e-5);
    let n = 1u64 << 20;
    assert!((psi(n, 1e6, 1) - ((n as f64).ln() / n as f64).sqrt()).abs() < 1e-3);
    assert_eq!(target_exponent(1.5, 1), 0.375);
}

#[test]
fn noise_free_risk_is_bias_power() {
    let mut c = cfg("weierstrass:beta=0.5", 0.5, "box", 1 << 12, grid(10, 16, 2), 4);
    c.sigma = 0.0;
    let r = mc_risk(&c).unwrap();
    for row in &r.rows {
        assert_eq!(row.risk, row.bias_sup.powf(2.0));
        assert_eq!(row.std_error, 0.0);
        assert_eq!(row.variance_risk, 0.0);
    }
    assert!(lemma1_check(&r).all_pass);
}

#[test]
fn pure_noise_matches_the_supremum_magnitude() {
    let c = cfg("zero", 0.5, "box", 1 << 14, grid(10, 16, 2), 50);
    let r = mc_risk(&c).unwrap();
    let last = r.rows.last().unwrap();
    let k = box_kernel(1).unwrap();
    // p / 2 = 1.
    let magnitude = 2.0 * k.l2_norm().powi(2) * last.h.ln().abs() / (last.n as f64 * last.h);
    let ratio = last.risk / magnitude;
    assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    assert!(r.rows.iter().all(|row| row.bias_sup == 0.0));
    assert!(lemma1_check(&r).all_pass);
}

#[test]
fn doubling_sigma_scales_pure_noise_risk() {
    let c = cfg("zero", 0.5, "box", 1 << 12, grid(10, 14, 2), 20);
    let mut c2 = c.clone();
    c2.sigma = 2.0;
    let (a, b) = (mc_risk(&c).unwrap(), mc_risk(&c2).unwrap());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        // Same seeds: the noise term is exactly homogeneous.
        assert!((y.risk / x.risk - 4.0).abs() < 1e-10);
        assert!((y.risk - 4.0 * x.risk).abs() <= 3.0 * (y.std_error + 4.0 * x.std_error));
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    let c = cfg("weierstrass:beta=1.5", 1.5, "poly:beta=2:pow=1", 1 << 12, grid(10, 16, 2), 8);
    assert_eq!(mc_risk(&c).unwrap(), mc_risk(&c).unwrap());
    let mut other = c.clone();
    other.seed += 1;
    assert_ne!(mc_risk(&c).unwrap().rows[0].risk, mc_risk(&other).unwrap().rows[0].risk);
}

#[test]
fn report_invariants() {
    let c = cfg("cosine", 0.5, "box", 1 << 12, grid(10, 16, 2), 6);
    let r = mc_risk(&c).unwrap();
    assert!(r.rows.windows(2).all(|w| w[0].n < w[1].n));
    for (row, ratio) in r.rows.iter().zip(&r.ratio_sequence) {
        let expected = row.risk / psi(row.n, 0.5, 1).powi(2);
        assert!((ratio - expected).abs() <= 1e-12 * expected);
        assert_eq!(row.ratio, *ratio);
        assert!(row.std_error > 0.0);
        assert_eq!(row.loss_samples.len(), 6);
    }
    let fit = rate_fit(&r, 0.5, 1).unwrap();
    assert_eq!(r.fitted_exponent, Some(fit.fitted_exponent));
    assert_eq!(r.verdict, Some(fit.verdict));
}

#[test]
fn under_resolved_n_values_are_listed() {
    let c = cfg("cosine", 0.5, "box", 1 << 10, grid(10, 22, 4), 2);
    match mc_risk(&c) {
        Err(Error::Inadmissible { n_values, reason }) => {
            assert!(n_values.contains(&(1 << 22)), "{n_values:?}");
            assert!(!n_values.contains(&(1 << 10)));
            assert!(reason.contains("under-resolved-bandwidth"), "{reason}");
        }
        other => panic!("expected an inadmissible error, got {other:?}"),
    }
}

#[test]
fn config_validation() {
    let base = cfg("cosine", 0.5, "box", 1 << 10, grid(10, 12, 2), 2);
    assert!(base.validate().is_ok());
    let mut c = base.clone();
    c.n_grid = vec![1024, 1500];
    assert!(matches!(c.validate(), Err(Error::Validation(_))));
    let mut c = base.clone();
    c.replications = 1;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.resolution = 1000;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.procedure = Procedure::Fixed { beta: 1.5, kernel: "box".into() };
    assert!(c.validate().is_err());
}

#[test]
fn rate_fit_synthetic_reports() {
    let ns = grid(10, 22, 4);
    let exact: Vec<f64> = ns.iter().map(|&n| psi(n, 1.5, 1).powi(2)).collect();
    let fit = rate_fit_values(&ns, &exact, 2.0, 1.5, 1).unwrap();
    assert!((fit.fitted_exponent - 0.375).abs() < 1e-6);
    assert_eq!(fit.verdict, Verdict::Member);
    // Risk at the slower rate of beta = 0.5.
    let slow: Vec<f64> = ns.iter().map(|&n| psi(n, 0.5, 1).powi(2)).collect();
    assert_eq!(rate_fit_values(&ns, &slow, 2.0, 1.5, 1).unwrap().verdict, Verdict::NonMember);
    assert!(rate_fit_values(&ns[..3], &exact[..3], 2.0, 1.5, 1).is_err());
}

#[test]
fn lemma1_holds_for_a_rough_signal() {
    let c = cfg("weierstrass:beta=0.5", 0.5, "box", 1 << 12, grid(10, 16, 2), 200);
    let r = mc_risk(&c).unwrap();
    let l = lemma1_check(&r);
    assert!(l.all_pass, "{:?}", l.rows);
    assert_eq!(l.rows.len(), 4);
}

#[test]
fn moments_follow_jensen() {
    let k = box_kernel(1).unwrap();
    let params = ModelParams::new(1.0, 1 << 20, 2.0).unwrap();
    let r = variance_lower_bound_check(&k, &[1.0 / 64.0, 1.0 / 128.0], &params, 0.3, 200, 1 << 12, 1).unwrap();
    for row in &r.rows {
        assert!((row.moment(2.0) - row.mc_moment).abs() < 1e-12 * row.mc_moment);
        assert!(row.moment(4.0) >= row.moment(2.0).powi(2));
        assert!((row.ratio - row.mc_moment / row.bound).abs() < 1e-12);
    }
    assert!(variance_lower_bound_check(&k, &[0.1, 0.05], &params, 0.3, 10, 1 << 12, 1).is_err());
    assert!(variance_lower_bound_check(&k, &[1.0 / 64.0], &params, 1.5, 10, 1 << 12, 1).is_err());
}

#[test]
fn bandwidth_schedule_checks() {
    let ns = grid(10, 30, 4);
    let c = 0.7;
    let rule: Vec<(u64, f64)> = ns
        .iter()
        .map(|&n| (n, c * ((n as f64).ln() / n as f64).powf(1.0 / 3.0)))
        .collect();
    let t = theorem1_bandwidth_check(&rule, 1.0, 1).unwrap();
    assert!(t.pass);
    assert!(t.values.iter().all(|v| (v - 1.0 / c).abs() < 1e-12));
    let tiny: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 1.0 / n as f64)).collect();
    assert!(!theorem1_bandwidth_check(&tiny, 1.0, 1).unwrap().pass);
    let flat: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 0.1)).collect();
    assert!(theorem1_bandwidth_check(&flat, 1.0, 1).unwrap().pass);
    assert!(theorem1_bandwidth_check(&[], 1.0, 1).is_err());
}

#[test]
fn step_function_is_excluded_by_every_channel() {
    let c = cfg("step", 0.5, "box", 1 << 12, grid(10, 16, 2), 10);
    let r = mc_risk(&c).unwrap();
    let v = maxiset_verdict(&c, &r).unwrap();
    assert_eq!(v.bias.verdict, Verdict::NonMember);
    assert_eq!(v.rate.verdict, Verdict::NonMember);
    assert_eq!(v.seminorm.verdict, Verdict::NonMember);
    assert!(v.all_agree);
    assert_eq!(v.verdict, Verdict::NonMember);
}

#[test]
fn lepski_report_carries_selections() {
    let mut c = cfg("weierstrass:beta=1.5", 1.5, "box", 1 << 12, grid(10, 16, 2), 4);
    c.procedure = Procedure::Lepski {
        betas: vec![0.5, 1.5],
        kernels: vec!["box".into(), "poly:beta=2:pow=1".into()],
        c1: Some(2.0),
    };
    let r = mc_risk(&c).unwrap();
    assert_eq!(r.c1, Some(2.0));
    assert_eq!(r.betas.as_deref(), Some(&[0.5, 1.5][..]));
    for row in &r.rows {
        assert_eq!(row.selections.as_ref().unwrap().iter().sum::<usize>(), 4);
    }
    assert!(kernel_from_name("poly:beta=2:pow=1", 1).unwrap().order() >= 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn psi_decreases_in_n(n in 3u64..1_000_000_000, beta in 0.1f64..5.0, d in 1usize..3) {
        prop_assert!(psi(n + 1, beta, d) < psi(n, beta, d));
    }

    #[test]
    fn power_law_fits_recover_the_exponent(beta in 0.2f64..3.0, scale in 0.01f64..100.0) {
        let ns = grid(10, 22, 2);
        let risks: Vec<f64> = ns.iter().map(|&n| scale * psi(n, beta, 1).powi(2)).collect();
        let fit = rate_fit_values(&ns, &risks, 2.0, beta, 1).unwrap();
        prop_assert!((fit.fitted_exponent - target_exponent(beta, 1)).abs() < 1e-9);
        prop_assert_eq!(fit.verdict, Verdict::Member);
    }
}
