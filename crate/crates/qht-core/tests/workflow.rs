//! Cross-module workflows through the public API, on the built-in dense
//! DFT backend.

use qht_core::discrete_qho::{dense_diagonalize, DiscreteQho};
use qht_core::fast_forward::low_energy_error;
use qht_core::hermite_sampling::{planted, spectrum_table, AxisTransform, HermiteSampler};
use qht_core::learning_testers::{audit, gaussian_goldreich_levin, test_product_sign, GglConfig, TesterConfig};
use qht_core::qht_pipeline::{amplification_degree, OracleRounding, QhtConfig, QhtPipeline, DEFAULT_DELTA_LOWER};
use qht_core::spectral_core::GridSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fast_forwarding_on_the_dense_backend() {
    let q = DiscreteQho::build(GridSpec::new(128).unwrap()).unwrap();
    let e = dense_diagonalize(&q).unwrap();
    for t in [0.0, 0.5, 2.0] {
        assert!(low_energy_error(&q, &e, 8, t).unwrap() < 1e-10, "t = {t}");
    }
}

#[test]
fn pipeline_transform_drives_a_tester() {
    let eps = 0.05;
    let delta_lower = DEFAULT_DELTA_LOWER;
    let config = QhtConfig {
        n: 4,
        eps,
        m: 1024,
        n_high: 80,
        rounding: OracleRounding::Exact,
        aa_degree: amplification_degree(delta_lower, eps).unwrap(),
        delta_lower,
        reinstate_parity_sign: false,
    };
    let run = QhtPipeline::new(config).unwrap().run().unwrap();
    assert!(run.min_fidelity() >= 1.0 - eps);
    let outputs: Vec<_> = run.blocks.iter().map(|b| b.output.clone()).collect();
    let transform = AxisTransform::from_pipeline(&outputs).unwrap();
    let f = planted::product_sign(1, &[0]).function;
    let mut sampler = HermiteSampler::boolean(&f, &transform).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = TesterConfig::default();
    // sgn(x) is exactly a product of one sign; it is far from zero signs.
    let one = test_product_sign(&mut sampler, 1, 0.1, 0.3, 0.1, &cfg, &mut rng).unwrap();
    assert!(one.accept);
    let none = test_product_sign(&mut sampler, 0, 0.1, 0.3, 0.1, &cfg, &mut rng).unwrap();
    assert!(!none.accept);
}

#[test]
fn learner_finds_a_planted_sign() {
    let f = planted::product_sign(2, &[1]).function;
    let config = GglConfig::new(0.5, 0.1);
    let truth = spectrum_table(&f, config.cap(), 1024).unwrap();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = gaussian_goldreich_levin(&f, &config, &mut rng).unwrap();
        let a = audit(&out, &truth, config.tau);
        assert!(a.complete && a.sound && a.within_bound, "seed {seed}: {:?}", out.list);
        assert!(out.list.iter().any(|(v, _)| v == &vec![0, 1]));
    }
}
