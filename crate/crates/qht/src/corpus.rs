//! Planted instances shared by the commands and the acceptance suite.
//!
//! Every function here is bounded by 1 in absolute value. The learner's
//! variance bound and the testers' sampler both need that. Hermite
//! polynomials therefore enter as clipped, rescaled mixtures, whose
//! spectrum is dominated by the planted terms.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use qht_core::hermite_sampling::{planted, sign, AxisEvaluator, OracleFunction};

use crate::{Error, Result};

/// Clipping bound for `h₂` in one variable: `h₂(3) = 8/√2`.
pub const H2_BOUND: f64 = 8.0 / SQRT_2;
/// Clipping bound for the two-variable mixtures.
pub const PAIR_BOUND: f64 = 6.0;

/// Names accepted by [`sampling_instance`].
pub const SAMPLING_NAMES: [&str; 6] = ["constant", "sign", "sign-threshold", "monomial", "mixture", "indicator"];

/// A planted function for the sampler, on `n` variables.
///
/// - `constant`: `f ≡ 1`.
/// - `sign`: `Π_i sgn(x_i)` over all coordinates.
/// - `sign-threshold`: `sgn(x − 0.3)` (`n = 1`).
/// - `monomial`: clipped `h₂` (`n = 1`) or `h_{(1,1)}` (`n = 2`).
/// - `mixture`: clipped two-term mixture, `0.8h₁ + 0.6h₃` (`n = 1`) or
///   `0.9h_{(1,1)} + 0.436h_{(2,0)}` (`n = 2`).
/// - `indicator`: `1{|x| ≤ a}` with distortion 3 (`n = 1`).
pub fn sampling_instance(name: &str, n: usize) -> Result<OracleFunction> {
    let one_var = |f: OracleFunction| {
        if n == 1 {
            Ok(f)
        } else {
            Err(Error::Config(format!(
                "instance '{name}' has one variable, got n = {n}"
            )))
        }
    };
    let f = match (name, n) {
        ("constant", _) => planted::constant(n, 1.0).function,
        ("sign", _) => planted::product_sign(n, &(0..n).collect::<Vec<_>>()).function,
        ("sign-threshold", _) => one_var(planted::sign_threshold(0.3).function)?,
        ("monomial", 1) => planted::hermite_mixture(1, &[(vec![2], 1.0)], H2_BOUND)?.function,
        ("monomial", 2) => planted::hermite_mixture(2, &[(vec![1, 1], 1.0)], PAIR_BOUND)?.function,
        ("mixture", 1) => planted::hermite_mixture(1, &[(vec![1], 0.8), (vec![3], 0.6)], 3.0)?.function,
        ("mixture", 2) => planted::hermite_mixture(2, &[(vec![1, 1], 0.9), (vec![2, 0], 0.436)], PAIR_BOUND)?.function,
        ("indicator", _) => one_var(planted::centered_indicator(planted::indicator_half_width(3.0), 3.0).function)?,
        _ => {
            return Err(Error::Config(format!(
                "unknown instance '{name}' for n = {n}; known: {}",
                SAMPLING_NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}

/// The sampling-correctness corpus: `(name, n)` pairs with `n ≤ 2`.
pub fn sampling_corpus() -> Vec<(&'static str, usize)> {
    vec![
        ("constant", 1),
        ("constant", 2),
        ("sign", 1),
        ("sign", 2),
        ("sign-threshold", 1),
        ("monomial", 1),
        ("monomial", 2),
        ("mixture", 1),
        ("mixture", 2),
    ]
}

/// A learner instance.
#[derive(Debug, Clone)]
pub struct LearnerInstance {
    /// Short name.
    pub name: &'static str,
    /// The function.
    pub function: OracleFunction,
    /// Threshold `τ`.
    pub tau: f64,
    /// Declared variance proxy `γ²`.
    pub gamma_sq: f64,
}

fn shifted_sign(n: usize, a: f64) -> OracleFunction {
    let factors: Vec<AxisEvaluator> = (0..n)
        .map(|i| -> AxisEvaluator {
            if i == 0 {
                Arc::new(move |x: f64| sign(x - a))
            } else {
                Arc::new(|_x: f64| 1.0)
            }
        })
        .collect();
    OracleFunction::product("shifted_sign", factors).boolean()
}

/// Five sparse planted instances with `τ ∈ {0.3, 0.5}`.
///
/// Sign functions have no finite gradient bound; they are declared with
/// `γ² = 1`, the value their `±1` range gives the weight estimator.
pub fn learner_corpus() -> Vec<LearnerInstance> {
    let inst = |name, function, tau| LearnerInstance {
        name,
        function,
        tau,
        gamma_sq: 1.0,
    };
    vec![
        inst("chi0_n2", planted::product_sign(2, &[0]).function, 0.5),
        inst("chi01_n2", planted::product_sign(2, &[0, 1]).function, 0.5),
        inst("chi1_n3", planted::product_sign(3, &[1]).function, 0.3),
        inst("shifted_sign_n2", shifted_sign(2, 0.5), 0.3),
        inst(
            "flat_chi01_n2",
            planted::product_sign(2, &[0, 1]).function.scaled(0.15),
            0.5,
        ),
    ]
}

/// Which tester an instance exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TesterKind {
    /// Product of `k` signs.
    ProductSign(usize),
    /// Degree at most `d`.
    LowDegree(usize),
    /// A single Hermite polynomial with `k` nonzero entries.
    HermitePolynomial(usize),
}

impl TesterKind {
    /// Short name.
    pub fn name(self) -> &'static str {
        match self {
            TesterKind::ProductSign(_) => "product-sign",
            TesterKind::LowDegree(_) => "low-degree",
            TesterKind::HermitePolynomial(_) => "hermite-polynomial",
        }
    }
}

/// A tester instance with its correct verdict at `(ε₁, ε₂) = (0.1, 0.3)`.
#[derive(Debug, Clone)]
pub struct TesterInstance {
    /// Short name.
    pub name: &'static str,
    /// Tester and its parameter.
    pub kind: TesterKind,
    /// The function.
    pub function: OracleFunction,
    /// Sampler grid dimension.
    pub m: usize,
    /// Sampler degree cutoff.
    pub cutoff: usize,
    /// Correct verdict.
    pub accept: bool,
}

/// The promise corpus: for each tester, instances that are close (accept)
/// and far (reject).
///
/// The noisy product-sign instance is the attenuated `0.9·χ_S`, the image
/// of `χ_S` under output flips with rate `0.05`.
pub fn tester_corpus() -> Result<Vec<TesterInstance>> {
    let inst = |name, kind, function, cutoff, accept| TesterInstance {
        name,
        kind,
        function,
        m: 1024,
        cutoff,
        accept,
    };
    let ps = TesterKind::ProductSign(2);
    let ld = TesterKind::LowDegree(2);
    let hp = TesterKind::HermitePolynomial(2);
    let spike = planted::hermite_mixture(2, &[(vec![1, 1], 1.0)], PAIR_BOUND)?.function;
    let s3 = 1.0 / 3f64.sqrt();
    Ok(vec![
        inst("chi02_n4", ps, planted::product_sign(4, &[0, 2]).function, 9, true),
        inst(
            "noisy_chi02_n4",
            ps,
            planted::product_sign(4, &[0, 2]).function.scaled(0.9),
            9,
            true,
        ),
        inst(
            "chi0123_n4",
            ps,
            planted::product_sign(4, &[0, 1, 2, 3]).function,
            9,
            false,
        ),
        inst(
            "sign_of_sum_n2",
            ps,
            OracleFunction::new(2, "sgn_sum", |x: &[f64]| sign(x[0] + x[1])).boolean(),
            9,
            false,
        ),
        inst(
            "clipped_h2",
            ld,
            planted::hermite_mixture(1, &[(vec![2], 1.0)], H2_BOUND)?.function,
            3,
            true,
        ),
        inst(
            "clipped_h3",
            ld,
            planted::hermite_mixture(1, &[(vec![3], 1.0)], 18.0 / 6f64.sqrt())?.function,
            3,
            false,
        ),
        inst("sign", ld, planted::sign_threshold(0.0).function, 3, false),
        inst("spike_h11", hp, spike.clone(), 4, true),
        inst(
            "correlated_h11",
            hp,
            planted::hermite_mixture(2, &[(vec![1, 1], 0.9), (vec![2, 0], 0.436)], PAIR_BOUND)?.function,
            4,
            true,
        ),
        inst(
            "spread_three_terms",
            hp,
            planted::hermite_mixture(2, &[(vec![1, 0], s3), (vec![0, 1], s3), (vec![1, 1], s3)], PAIR_BOUND)?.function,
            4,
            false,
        ),
        inst("spike_h11_k1", TesterKind::HermitePolynomial(1), spike, 4, false),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_instance_builds() {
        for (name, n) in sampling_corpus() {
            let f = sampling_instance(name, n).unwrap();
            assert_eq!(f.arity(), n);
        }
        assert!(sampling_instance("indicator", 1).is_ok());
        assert!(sampling_instance("indicator", 2).is_err());
        assert!(sampling_instance("nope", 1).is_err());
    }

    #[test]
    fn corpora_are_bounded() {
        let points = [-3.0, -0.7, 0.0, 0.4, 2.5];
        let mut fs: Vec<OracleFunction> = learner_corpus().into_iter().map(|i| i.function).collect();
        fs.extend(tester_corpus().unwrap().into_iter().map(|i| i.function));
        for f in fs {
            for &a in &points {
                for &b in &points {
                    let x: Vec<f64> = (0..f.arity()).map(|i| if i % 2 == 0 { a } else { b }).collect();
                    assert!(f.evaluate(&x).abs() <= 1.0, "{}", f.label());
                }
            }
        }
    }
}
