use maxiset::kernels::{box_kernel, kernel_from_name};
use maxiset::noise_model::{sample_noise, stochastic_convolution, stream_seed, NoiseField};
use maxiset::Error;
use proptest::prelude::*;

#[test]
fn pooled_draws_have_zero_mean() {
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in 0..250_000u64 {
        let z = sample_noise(1, 4, stream_seed(9, s)).unwrap();
        sum += z.increments().iter().sum::<f64>();
        count += z.increments().len();
    }
    assert_eq!(count, 1_000_000);
    // 4 sigma / 10^3 for 10^6 unit-variance draws.
    assert!((sum / count as f64).abs() < 4e-3);
}

#[test]
fn sample_variance_is_near_one() {
    let z = sample_noise(1, 1 << 14, 5).unwrap();
    let v = z.increments();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    assert!((0.95..=1.05).contains(&var), "variance {var}");
}

#[test]
fn cell_volume_is_increment_variance() {
    let z = sample_noise(2, 8, 1).unwrap();
    assert_eq!(z.cell_volume(), 1.0 / 64.0);
}

/// Riemann sum of `K^2` over the support, independent of the kernel's own
/// quadrature.
fn riemann_l2_sq(name: &str) -> f64 {
    let k = kernel_from_name(name, 1).unwrap();
    let a = k.support_radius();
    let m = 200_000;
    let dx = 2.0 * a / m as f64;
    (0..m)
        .map(|i| k.evaluate(&[-a + (i as f64 + 0.5) * dx]).powi(2))
        .sum::<f64>()
        * dx
}

#[test]
fn standardized_variance_matches_l2_norm() {
    // 16 entries spaced 64 cells apart have disjoint supports at h = 1/32, so
    // their sample variances are independent and the pooled estimate has
    // relative standard deviation sqrt(2 / (16 * 10^4)).
    let (m, h, stride) = (1024, 1.0 / 32.0, 64);
    let reps = 10_000u64;
    for name in ["box", "poly:beta=2:pow=1"] {
        let k = kernel_from_name(name, 1).unwrap();
        let target = riemann_l2_sq(name);
        let mut acc = vec![0.0f64; m / stride];
        for r in 0..reps {
            let z = sample_noise(1, m, stream_seed(77, r)).unwrap();
            let xi = stochastic_convolution(&z, &k, h).unwrap();
            for (a, v) in acc.iter_mut().zip(xi.values().iter().step_by(stride)) {
                *a += v * v;
            }
        }
        let per_entry: Vec<f64> = acc.iter().map(|a| a / reps as f64 / target).collect();
        let single_sd = (2.0 / reps as f64).sqrt();
        for v in &per_entry {
            assert!((v - 1.0).abs() < 5.0 * single_sd, "{name}: entry ratio {v}");
        }
        let pooled = per_entry.iter().sum::<f64>() / per_entry.len() as f64;
        assert!((0.98..=1.02).contains(&pooled), "{name}: pooled ratio {pooled}");
    }
}

#[test]
fn disjoint_supports_are_uncorrelated() {
    let k = box_kernel(1).unwrap();
    let (m, h) = (256, 0.125);
    // Points 0 and 64 are 0.25 apart, more than the support width 2 A h.
    let reps = 4000u64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for r in 0..reps {
        let z = sample_noise(1, m, stream_seed(3, r)).unwrap();
        let xi = stochastic_convolution(&z, &k, h).unwrap();
        let (x, y) = (xi.values()[0], xi.values()[64]);
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    let corr = sxy / (sxx * syy).sqrt();
    assert!(corr.abs() < 5.0 / (reps as f64).sqrt(), "corr {corr}");
}

#[test]
fn bandwidth_errors() {
    let k = box_kernel(1).unwrap();
    let z = sample_noise(1, 256, 1).unwrap();
    assert!(matches!(
        stochastic_convolution(&z, &k, 0.05),
        Err(Error::UnderResolvedBandwidth { .. })
    ));
    let wide = kernel_from_name("order:N=2", 1).unwrap();
    assert!(matches!(
        stochastic_convolution(&z, &wide, 0.5),
        Err(Error::KernelWraparound { .. })
    ));
}

fn field(values: Vec<f64>) -> NoiseField {
    let m = values.len();
    NoiseField::from_increments(1, m, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shifting_noise_shifts_output(seed in any::<u64>(), k in -300isize..300) {
        let kern = box_kernel(1).unwrap();
        let z = sample_noise(1, 128, seed).unwrap();
        let a = stochastic_convolution(&z.shift(&[k]).unwrap(), &kern, 0.25).unwrap();
        let b = stochastic_convolution(&z, &kern, 0.25).unwrap().shift(&[k]).unwrap();
        prop_assert!(a.sup_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn convolution_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), alpha in -3.0f64..3.0) {
        let kern = kernel_from_name("poly:beta=2:pow=1", 1).unwrap();
        let z1 = sample_noise(1, 128, s1).unwrap();
        let z2 = sample_noise(1, 128, s2).unwrap();
        let mix: Vec<f64> = z1.increments().iter().zip(z2.increments()).map(|(a, b)| alpha * a + b).collect();
        let lhs = stochastic_convolution(&field(mix), &kern, 0.25).unwrap();
        let rhs = stochastic_convolution(&z1, &kern, 0.25).unwrap().scale(alpha)
            .add(&stochastic_convolution(&z2, &kern, 0.25).unwrap()).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn pooled_outputs_are_centred(seed in any::<u64>()) {
        let kern = box_kernel(1).unwrap();
        let mut pooled = Vec::new();
        for r in 0..8 {
            let z = sample_noise(1, 512, stream_seed(seed, r)).unwrap();
            let xi = stochastic_convolution(&z, &kern, 0.0625).unwrap();
            // Every 32nd point: outputs with disjoint supports.
            pooled.extend(xi.values().iter().step_by(32).copied());
        }
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        prop_assert!(mean.abs() < 4.0 / n.sqrt());
    }
}
