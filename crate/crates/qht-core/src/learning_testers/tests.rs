use super::*;
use crate::hermite_sampling::{
    hermite_multi, hermite_poly, planted, sign, spectrum_table, AxisEvaluator, AxisTransform, HermiteSampler,
    OracleFunction,
};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `f̂_sgn(1)² = 2/π`.
const SIGN1_SQ: f64 = core::f64::consts::FRAC_2_PI;
/// `W^{(1,*)}` of `sgn(x₁ + x₂)`: `E[(2φ(Z))²] = 2/(π√3)` (mpmath).
const ROTATED_SIGN_W: f64 = 0.36755259694786137;

fn sign_mixture(a: f64, b: f64) -> OracleFunction {
    OracleFunction::new(2, "sign_mixture", move |x: &[f64]| a * sign(x[0]) + b * sign(x[1]))
}

#[test]
fn pattern_shapes() {
    let p = CoefficientPattern::prefix(4, &[2, 0]).unwrap();
    assert_eq!(p.entries(), &[Some(2), Some(0), None, None]);
    assert_eq!(p.fixed_len(), 2);
    assert!(p.is_prefix_form());
    assert!(p.matches(&[2, 0, 7, 1]));
    assert!(!p.matches(&[2, 1, 0, 0]));
    assert_eq!(p.as_index(), None);
    assert!(!CoefficientPattern::new(vec![None, Some(1)]).is_prefix_form());
    assert_eq!(
        CoefficientPattern::prefix(2, &[1, 3]).unwrap().as_index(),
        Some(vec![1, 3])
    );
    assert!(CoefficientPattern::prefix(1, &[1, 3]).is_err());
}

#[test]
fn sample_count_formula() {
    assert_eq!(
        weight_sample_count(1.0, 0.1, 0.05).unwrap(),
        (100.0 * 40f64.ln()).ceil() as usize
    );
    // γ² is clamped below at 1.
    assert_eq!(
        weight_sample_count(0.2, 0.1, 0.05).unwrap(),
        weight_sample_count(1.0, 0.1, 0.05).unwrap()
    );
    assert!(weight_sample_count(1.0, 0.0, 0.05).is_err());
}

#[test]
fn weight_of_sign_product_prefixes() {
    let f = planted::product_sign(2, &[0, 1]).function;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eps = 0.03;
    let w1 = weight_estimate(
        &f,
        &CoefficientPattern::prefix(2, &[1]).unwrap(),
        eps,
        1e-3,
        1.0,
        &mut rng,
    )
    .unwrap();
    assert!((w1.value - SIGN1_SQ).abs() <= eps, "{}", w1.value);
    assert!(w1.half_width > 0.0 && w1.half_width.is_finite());
    assert_eq!(w1.queries, 2 * w1.samples as u64);
    let w11 = weight_estimate(
        &f,
        &CoefficientPattern::prefix(2, &[1, 1]).unwrap(),
        eps,
        1e-3,
        1.0,
        &mut rng,
    )
    .unwrap();
    assert!((w11.value - SIGN1_SQ * SIGN1_SQ).abs() <= eps, "{}", w11.value);
    // Orthogonality: an even first coordinate carries no weight.
    let w0 = weight_estimate(
        &f,
        &CoefficientPattern::prefix(2, &[0]).unwrap(),
        eps,
        1e-3,
        1.0,
        &mut rng,
    )
    .unwrap();
    assert!(w0.value.abs() <= eps, "{}", w0.value);
}

#[test]
fn weight_of_planted_mixture_per_pattern() {
    let f = sign_mixture(0.8, 0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eps = 0.05;
    let cases = [
        (CoefficientPattern::new(vec![None, Some(0)]), 0.64),
        (CoefficientPattern::new(vec![Some(0), None]), 0.36),
        (CoefficientPattern::new(vec![None, None]), 1.0),
    ];
    for (p, want) in cases {
        let w = weight_estimate(&f, &p, eps, 1e-3, 2.0, &mut rng).unwrap();
        assert!((w.value - want).abs() <= eps, "{p:?}: {} vs {want}", w.value);
    }
}

#[test]
fn unbounded_single_coefficient_lies_within_reported_width() {
    let f = OracleFunction::new(2, "h_12", |x: &[f64]| hermite_multi(&[1, 2], x));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = CoefficientPattern::prefix(2, &[1, 2]).unwrap();
    let w = weight_estimate(&f, &p, 0.1, 0.01, 3.0, &mut rng).unwrap();
    assert!((w.value - 1.0).abs() <= w.half_width, "{} ± {}", w.value, w.half_width);
    let q = CoefficientPattern::prefix(2, &[2, 1]).unwrap();
    let w = weight_estimate(&f, &q, 0.1, 0.01, 3.0, &mut rng).unwrap();
    assert!(w.value.abs() <= w.half_width, "{} ± {}", w.value, w.half_width);
}

#[test]
fn shared_draws_agree_with_single_estimates() {
    let f = sign_mixture(0.8, 0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = child_weights(&f, &[], 3, 20_000, 1e-3, &mut rng).unwrap();
    // Children of the root along coordinate 0: (a, *).
    let want = [0.36, 0.64 * SIGN1_SQ, 0.0, 0.64 * 0.32573500793527995f64.powi(2)];
    for (a, ((m, hw), t)) in w.iter().zip(want).enumerate() {
        assert!((m - t).abs() <= hw.max(0.02), "a={a}: {m} ± {hw} vs {t}");
    }
    assert!(child_weights(&f, &[0, 0], 3, 10, 0.1, &mut rng).is_err());
}

#[test]
fn restriction_of_hermite_product_is_the_free_factor() {
    let f = OracleFunction::new(2, "h_21", |x: &[f64]| hermite_multi(&[2, 1], x));
    let p = CoefficientPattern::new(vec![Some(2), None]);
    for &z in &[-2.0, -0.3, 0.0, 1.7] {
        let r = restriction_coefficient(&f, &p, &[z], 256).unwrap();
        assert!((r.value - hermite_poly(1, z)).abs() < 1e-8, "z={z}: {}", r.value);
    }
}

#[test]
fn restriction_of_z_independent_function_is_constant() {
    let f = OracleFunction::new(2, "sgn_x1", |x: &[f64]| sign(x[0]));
    let p = CoefficientPattern::new(vec![Some(1), None]);
    let a = restriction_coefficient(&f, &p, &[-1.3], 1024).unwrap();
    let b = restriction_coefficient(&f, &p, &[2.2], 1024).unwrap();
    assert_eq!(a.value, b.value);
    assert!(
        (a.value - SIGN1_SQ.sqrt()).abs() <= 1.5 * a.error,
        "{} ± {}",
        a.value,
        a.error
    );
}

#[test]
fn restriction_average_matches_weight_estimate() {
    use rand_distr::{Distribution, StandardNormal};
    let f = OracleFunction::new(2, "sgn_sum", |x: &[f64]| sign(x[0] + x[1]));
    let p = CoefficientPattern::new(vec![Some(1), None]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draws = 10_000;
    let mut acc = 0.0;
    let mut acc2 = 0.0;
    for _ in 0..draws {
        let z: f64 = StandardNormal.sample(&mut rng);
        let r = restriction_coefficient(&f, &p, &[z], 128).unwrap().value;
        acc += r * r;
        acc2 += r.powi(4);
    }
    let mean = acc / draws as f64;
    let sd = ((acc2 / draws as f64 - mean * mean) / draws as f64).sqrt();
    let w = weight_estimate(&f, &p, 0.02, 1e-3, 1.0, &mut rng).unwrap();
    assert!(
        (mean - w.value).abs() <= 4.0 * sd + w.half_width,
        "{mean} vs {}",
        w.value
    );
    assert!((mean - ROTATED_SIGN_W).abs() <= 4.0 * sd + 1e-3, "{mean}");
    assert!((w.value - ROTATED_SIGN_W).abs() <= w.half_width, "{}", w.value);
}

#[test]
fn gradient_proxy_matches_hermite_degree() {
    // E‖∇h_v‖² = |v| for orthonormal Hermite products.
    let f = OracleFunction::new(2, "h_21", |x: &[f64]| hermite_multi(&[2, 1], x));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = estimate_gamma_sq(&f, 20_000, 1e-4, &mut rng);
    assert!((g - 3.0).abs() < 0.3, "{g}");
}

fn ggl_truth(f: &OracleFunction, d: usize) -> crate::hermite_sampling::SpectrumTable {
    spectrum_table(f, d, 2048).unwrap()
}

#[test]
fn ggl_single_spike_classical_and_sampled() {
    let f = planted::product_sign(2, &[0]).function;
    let config = GglConfig::new(0.5, 0.1);
    let truth = ggl_truth(&f, config.cap());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let out = gaussian_goldreich_levin(&f, &config, &mut rng).unwrap();
    assert_eq!(out.mode, GglMode::Classical);
    assert!(out.indices().contains(&vec![1, 0]), "{:?}", out.list);
    let a = audit(&out, &truth, config.tau);
    assert!(a.complete && a.sound && a.within_bound, "{a:?}");
    assert!(!out.failed);

    let t = AxisTransform::reference(1024, config.cap()).unwrap();
    let sampler = HermiteSampler::boolean(&f, &t).unwrap();
    let out = gaussian_goldreich_levin_sampled(&sampler, 1.0, &config, &mut rng).unwrap();
    assert_eq!(out.mode, GglMode::Sampled);
    let a = audit(&out, &truth, config.tau);
    assert!(a.complete && a.sound && a.within_bound, "{:?} {a:?}", out.list);
    assert_eq!(out.queries as usize, sampled_pool_size(&config, 2, 1.0));
}

#[test]
fn ggl_two_term_instance_finds_the_large_coefficient() {
    // Coefficients: (1,0) = 0.718, (0,1) = 0.348, (3,0) = −0.293.
    let f = sign_mixture(0.9, 0.436);
    let mut config = GglConfig::new(0.6, 0.1);
    config.gamma_sq = 2.0;
    let truth = ggl_truth(&f, config.cap());
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let out = gaussian_goldreich_levin(&f, &config, &mut rng).unwrap();
    let a = audit(&out, &truth, config.tau);
    assert!(a.complete && a.sound && a.within_bound, "{:?} {a:?}", out.list);
    assert!(out.indices().contains(&vec![1, 0]));
}

#[test]
fn ggl_flat_instance_returns_nothing() {
    let f = planted::product_sign(2, &[0, 1]).function.scaled(0.15);
    let config = GglConfig::new(0.5, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let out = gaussian_goldreich_levin(&f, &config, &mut rng).unwrap();
    assert!(out.list.is_empty(), "{:?}", out.list);
}

#[test]
fn ggl_node_budget_reports_failure() {
    let f = planted::product_sign(3, &[0]).function;
    let mut config = GglConfig::new(0.5, 0.1);
    config.node_budget = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let out = gaussian_goldreich_levin(&f, &config, &mut rng).unwrap();
    assert!(out.failed);
    assert!(out.list.iter().all(|(v, _)| v.len() == 3));
}

#[test]
fn ggl_rejects_bad_parameters_and_short_cutoff() {
    let f = planted::product_sign(1, &[0]).function;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(gaussian_goldreich_levin(&f, &GglConfig::new(1.2, 0.1), &mut rng).is_err());
    let t = AxisTransform::reference(256, 4).unwrap();
    let sampler = HermiteSampler::boolean(&f, &t).unwrap();
    assert!(gaussian_goldreich_levin_sampled(&sampler, 1.0, &GglConfig::new(0.5, 0.1), &mut rng).is_err());
}

#[test]
fn degree_cap_default() {
    let c = GglConfig::new(0.5, 0.1);
    assert_eq!(c.cap(), 12);
    assert_eq!(c.list_bound(), 16);
    let mut c = GglConfig::new(0.3, 0.1);
    c.gamma_sq = 2.0;
    assert_eq!(c.cap(), 31);
}

fn reference_sampler(f: &OracleFunction, m: usize, d: usize) -> HermiteSampler {
    let t = AxisTransform::reference(m, d).unwrap();
    if f.is_boolean() {
        HermiteSampler::boolean(f, &t).unwrap()
    } else {
        HermiteSampler::general(f, &t).unwrap()
    }
}

fn accept_rate(
    f: &OracleFunction,
    d: usize,
    run: impl Fn(&mut HermiteSampler, &mut ChaCha8Rng) -> TesterVerdict,
) -> f64 {
    let mut s = reference_sampler(f, 1024, d);
    let trials = 20;
    (0..trials)
        .filter(|&seed| run(&mut s, &mut ChaCha8Rng::seed_from_u64(seed)).accept)
        .count() as f64
        / trials as f64
}

#[test]
fn product_sign_tester_on_promise_instances() {
    let cfg = TesterConfig::default();
    let run = |k: usize| {
        move |s: &mut HermiteSampler, r: &mut ChaCha8Rng| test_product_sign(s, k, 0.1, 0.3, 0.1, &cfg, r).unwrap()
    };
    let exact = planted::product_sign(4, &[0, 2]).function;
    assert!(accept_rate(&exact, 9, run(2)) >= 0.9);
    let attenuated = planted::product_sign(4, &[0, 2]).function.scaled(1.0 - 0.1);
    assert!(accept_rate(&attenuated, 9, run(2)) >= 0.9);
    let wider = planted::product_sign(4, &[0, 1, 2, 3]).function;
    assert_eq!(accept_rate(&wider, 9, run(2)), 0.0);
    let rotated = OracleFunction::new(2, "sgn_sum", |x: &[f64]| sign(x[0] + x[1])).boolean();
    assert!(accept_rate(&rotated, 9, run(2)) <= 0.1);
}

#[test]
fn product_sign_witness_is_the_support() {
    let f = planted::product_sign(3, &[1]).function;
    let mut s = reference_sampler(&f, 1024, 5);
    let v = test_product_sign(
        &mut s,
        1,
        0.1,
        0.3,
        0.1,
        &TesterConfig::default(),
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    assert!(v.accept);
    assert_eq!(v.witness, Some(Witness::Support(vec![1])));
}

#[test]
fn low_degree_tester_uses_exactly_m_samples() {
    let cfg = TesterConfig::default();
    let f = planted::constant(2, 1.0).function;
    let mut s = reference_sampler(&f, 512, 3);
    let v = test_low_degree(&mut s, 2, 0.1, 0.3, 0.1, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let m = (2.0 * 10f64.ln() / 0.04).ceil() as usize;
    assert_eq!(cfg.sample_count(0.1, 0.3, 0.1), m);
    assert_eq!(v.samples, m);
    assert!(v.accept && v.statistic == 1.0);
    assert!(test_low_degree(&mut s, 5, 0.1, 0.3, 0.1, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
}

#[test]
fn low_degree_tester_on_promise_instances() {
    let cfg = TesterConfig::default();
    let run = |d: usize| {
        move |s: &mut HermiteSampler, r: &mut ChaCha8Rng| test_low_degree(s, d, 0.1, 0.3, 0.1, &cfg, r).unwrap()
    };
    let b2 = 8.0 / core::f64::consts::SQRT_2;
    let clipped_h2 = planted::hermite_mixture(1, &[(vec![2], 1.0)], b2).unwrap().function;
    assert!(accept_rate(&clipped_h2, 3, run(2)) >= 0.9);
    // h₃ scaled by h₃(3) = 18/√6 and clipped: almost all mass at degree 3.
    let clipped_h3 = planted::hermite_mixture(1, &[(vec![3], 1.0)], 18.0 / 6f64.sqrt())
        .unwrap()
        .function;
    assert!(accept_rate(&clipped_h3, 3, run(2)) <= 0.1);
    // sgn has low-degree mass 2/π ≈ 0.64 for d ∈ {1, 2}: far.
    let sgn = planted::sign_threshold(0.0).function;
    assert!(accept_rate(&sgn, 3, run(2)) <= 0.1);
}

#[test]
fn hermite_polynomial_tester_on_promise_instances() {
    let cfg = TesterConfig::default();
    let run = |k: usize| {
        move |s: &mut HermiteSampler, r: &mut ChaCha8Rng| test_hermite_polynomial(s, k, 0.1, 0.3, 0.1, &cfg, r).unwrap()
    };
    let spike = planted::hermite_mixture(2, &[(vec![1, 1], 1.0)], 6.0).unwrap().function;
    assert!(accept_rate(&spike, 4, run(2)) >= 0.9);
    let correlated = planted::hermite_mixture(2, &[(vec![1, 1], 0.9), (vec![2, 0], 0.436)], 6.0)
        .unwrap()
        .function;
    assert!(accept_rate(&correlated, 4, run(2)) >= 0.9);
    let s3 = 1.0 / 3f64.sqrt();
    let spread = planted::hermite_mixture(2, &[(vec![1, 0], s3), (vec![0, 1], s3), (vec![1, 1], s3)], 6.0)
        .unwrap()
        .function;
    assert!(accept_rate(&spread, 4, run(2)) <= 0.1);
    // Wrong support size.
    assert!(accept_rate(&spike, 4, run(1)) <= 0.1);
}

#[test]
fn verdicts_are_deterministic_given_the_seed() {
    let f = planted::product_sign(3, &[0, 1]).function;
    let cfg = TesterConfig::default();
    let mut s = reference_sampler(&f, 512, 5);
    let a = test_product_sign(&mut s, 2, 0.1, 0.3, 0.1, &cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    let b = test_product_sign(&mut s, 2, 0.1, 0.3, 0.1, &cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn widening_the_promise_gap_keeps_correct_verdicts() {
    let cfg = TesterConfig::default();
    let good = planted::product_sign(3, &[0, 2]).function.scaled(0.9);
    let bad = planted::product_sign(3, &[0, 1, 2]).function;
    let mut sg = reference_sampler(&good, 512, 7);
    let mut sb = reference_sampler(&bad, 512, 7);
    for seed in 0..5 {
        for &e2 in &[0.3, 0.4, 0.5, 0.6] {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            assert!(
                test_product_sign(&mut sg, 2, 0.1, e2, 0.1, &cfg, &mut r)
                    .unwrap()
                    .accept
            );
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            assert!(
                !test_product_sign(&mut sb, 2, 0.1, e2, 0.1, &cfg, &mut r)
                    .unwrap()
                    .accept
            );
        }
    }
}

#[test]
fn sign_spectrum_decays_and_has_no_even_part() {
    let fit = sign_spectrum_decay(15, 4096).unwrap();
    assert!(fit.even_max <= 1e-12, "{}", fit.even_max);
    assert!(fit.rate > 0.0, "{}", fit.rate);
    assert!(fit.slope < 0.0);
    // The binding rate sits at k = 15: −ln|f̂(15)|/15 ≈ 0.1574.
    assert!(
        (fit.rate - (-0.094_288_364_336_612_82_f64.ln() / 15.0)).abs() < 1e-3,
        "{}",
        fit.rate
    );
}

#[test]
fn attenuation_keeps_product_structure() {
    let f = planted::product_sign(2, &[0]).function.scaled(0.5);
    assert!(f.is_product() && !f.is_boolean());
    assert_eq!(f.evaluate(&[-1.0, 3.0]), -0.5);
    assert_eq!(f.evaluate_factor(0, 2.0), Some(0.5));
    let g = OracleFunction::product("s", vec![Arc::new(sign) as AxisEvaluator])
        .boolean()
        .scaled(-1.0);
    assert!(g.is_boolean());
}

#[test]
fn median_of_means_examples() {
    assert_eq!(mom_groups(0.1), 3);
    // ln(2/2.4e-4) ≈ 9.03 rounds up to 10, then to the odd 11.
    assert_eq!(mom_groups(2.4e-4), 11);
    assert_eq!(median_of_means(&[1.0, 2.0, 3.0, 4.0], 1), 2.5);
    // Blocks {0, 0}, {0, 100}, {1, 1}: means 0, 50, 1.
    assert_eq!(median_of_means(&[0.0, 0.0, 0.0, 100.0, 1.0, 1.0], 3), 1.0);
    // The remainder joins the last block: {1}, {2}, {3, 4, 5}.
    assert_eq!(median_of_means(&[1.0, 2.0, 3.0, 4.0, 5.0], 3), 2.0);
    assert_eq!(median_of_means(&[], 3), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn median_of_means_lies_within_the_sample_range(
        xs in prop::collection::vec(-10.0f64..10.0, 1..200), g in 1usize..12
    ) {
        let m = median_of_means(&xs, g);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
    }

    #[test]
    fn prefix_patterns_keep_wildcards_as_suffix(
        n in 1usize..6, fixed in prop::collection::vec(0usize..5, 0..6)
    ) {
        prop_assume!(fixed.len() <= n);
        let p = CoefficientPattern::prefix(n, &fixed).unwrap();
        prop_assert!(p.is_prefix_form());
        prop_assert_eq!(p.fixed_len(), fixed.len());
        let mut v = fixed.clone();
        v.resize(n, 3);
        prop_assert!(p.matches(&v));
    }

    #[test]
    fn ggl_list_never_exceeds_bound(seed in 0u64..1000, tau in 0.35f64..0.8) {
        let f = sign_mixture(0.6, 0.6);
        let mut config = GglConfig::new(tau, 0.2);
        config.degree_cap = Some(6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = gaussian_goldreich_levin(&f, &config, &mut rng).unwrap();
        prop_assert!(out.list.len() as f64 <= 4.0 / (tau * tau));
    }
}
