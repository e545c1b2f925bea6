//! Black-box functions over the Gaussian measure and the planted corpus.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::basis::hermite_multi;
use crate::{Error, Result};

/// `f: ℝⁿ → [−1, 1]`.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// One factor `f_i: ℝ → [−1, 1]` of a product function.
pub type AxisEvaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function queried as a black box, with the metadata the samplers need.
#[derive(Clone)]
pub struct OracleFunction {
    arity: usize,
    eval: Evaluator,
    factors: Option<Vec<AxisEvaluator>>,
    input_precision: Option<u32>,
    output_precision: Option<u32>,
    degree_cutoff: usize,
    kappa: f64,
    boolean: bool,
    label: String,
}

impl core::fmt::Debug for OracleFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("OracleFunction")
            .field("label", &self.label)
            .field("arity", &self.arity)
            .field("product", &self.factors.is_some())
            .field("input_precision", &self.input_precision)
            .field("output_precision", &self.output_precision)
            .field("degree_cutoff", &self.degree_cutoff)
            .field("kappa", &self.kappa)
            .field("boolean", &self.boolean)
            .finish()
    }
}

impl OracleFunction {
    /// General function of `arity` variables.
    pub fn new(arity: usize, label: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            arity,
            eval: Arc::new(f),
            factors: None,
            input_precision: None,
            output_precision: None,
            degree_cutoff: 9,
            kappa: 1.0,
            boolean: false,
            label: label.into(),
        }
    }

    /// Product function `Π_i f_i(x_i)`; quadrature then factorizes per axis.
    pub fn product(label: &str, factors: Vec<AxisEvaluator>) -> Self {
        let fs = factors.clone();
        let mut f = Self::new(factors.len(), label, move |x: &[f64]| {
            fs.iter().zip(x).map(|(g, &xi)| g(xi)).product()
        });
        f.factors = Some(factors);
        f
    }

    /// Declares the inputs snapped to dyadic cubes of side `2^{−p1}`.
    pub fn with_input_precision(mut self, p1: u32) -> Self {
        self.input_precision = Some(p1);
        self
    }

    /// Declares the outputs rounded to `p2` bits.
    pub fn with_output_precision(mut self, p2: u32) -> Self {
        self.output_precision = Some(p2);
        self
    }

    /// Declares the degree cutoff `D`.
    pub fn with_degree_cutoff(mut self, d: usize) -> Self {
        self.degree_cutoff = d;
        self
    }

    /// Declares the distortion `κ ≥ 1` (sup-norm over 2-norm).
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Declares the range `{−1, +1}` (forces `κ = 1`).
    pub fn boolean(mut self) -> Self {
        self.boolean = true;
        self.kappa = 1.0;
        self
    }

    /// `ρ·f`, keeping product structure (the first factor is scaled). With
    /// `ρ = 1 − 2η` this is the noise-operator image of a `±1` function
    /// under independent output flips with rate `η`.
    pub fn scaled(self, rho: f64) -> Self {
        let eval = self.eval.clone();
        let factors = self.factors.clone().map(|mut fs| {
            if let Some(first) = fs.first_mut() {
                let g = first.clone();
                *first = Arc::new(move |x: f64| rho * g(x));
            }
            fs
        });
        Self {
            eval: Arc::new(move |x: &[f64]| rho * eval(x)),
            factors,
            boolean: self.boolean && rho.abs() == 1.0,
            label: format!("{}·{rho}", self.label),
            ..self
        }
    }

    /// Number of variables `n`.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Human-readable name.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Declared degree cutoff `D`.
    pub fn degree_cutoff(&self) -> usize {
        self.degree_cutoff
    }

    /// Declared distortion.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Whether the range is declared `{−1, +1}`.
    pub fn is_boolean(&self) -> bool {
        self.boolean
    }

    /// Whether per-axis factors are available.
    pub fn is_product(&self) -> bool {
        self.factors.is_some()
    }

    /// Input precision `P₁`, if declared.
    pub fn input_precision(&self) -> Option<u32> {
        self.input_precision
    }

    fn snap(&self, x: f64) -> f64 {
        match self.input_precision {
            None => x,
            Some(p) => {
                let q = libm::ldexp(1.0, p as i32);
                (x * q).floor() / q
            }
        }
    }

    fn round_output(&self, v: f64) -> f64 {
        match self.output_precision {
            None => v,
            Some(p) => {
                let q = libm::ldexp(1.0, p as i32);
                (v * q).round() / q
            }
        }
    }

    /// `f(x)` with inputs snapped to their cube anchors and the output
    /// rounded to the declared precision.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        let v = if self.input_precision.is_some() {
            let snapped: Vec<f64> = x.iter().map(|&xi| self.snap(xi)).collect();
            (self.eval)(&snapped)
        } else {
            (self.eval)(x)
        };
        self.round_output(v)
    }

    /// Per-axis factor `i` at `x`, snapped; `None` without product structure.
    /// Output rounding applies to the product, so it is only exact when no
    /// output precision is declared.
    pub fn evaluate_factor(&self, i: usize, x: f64) -> Option<f64> {
        self.factors.as_ref().map(|fs| fs[i](self.snap(x)))
    }

    /// Factors usable for per-axis quadrature (product structure and no
    /// output rounding).
    pub(crate) fn separable(&self) -> bool {
        self.factors.is_some() && self.output_precision.is_none()
    }
}

/// `sgn` with `sgn(0) = +1`, so the range is exactly `{−1, +1}`.
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// A planted instance: the function and, where known in closed form, its
/// nonzero Hermite coefficients.
#[derive(Debug, Clone)]
pub struct PlantedFunction {
    /// The function.
    pub function: OracleFunction,
    /// Exact `(v, f̂(v))` pairs, if the spectrum is known in closed form.
    pub spectrum: Option<Vec<(Vec<usize>, f64)>>,
}

/// Named planted families.
pub mod planted {
    use super::*;

    /// `f ≡ c` on `n` variables (`|c| ≤ 1`).
    pub fn constant(n: usize, c: f64) -> PlantedFunction {
        let f = OracleFunction::product(
            "constant",
            (0..n)
                .map(|i| -> AxisEvaluator {
                    let v = if i == 0 { c } else { 1.0 };
                    Arc::new(move |_x: f64| v)
                })
                .collect(),
        );
        let f = if c.abs() == 1.0 { f.boolean() } else { f };
        PlantedFunction {
            function: f,
            spectrum: Some(alloc::vec![(alloc::vec![0; n], c)]),
        }
    }

    /// `χ_S(x) = Π_{i∈S} sgn(x_i)` on `n` variables.
    pub fn product_sign(n: usize, support: &[usize]) -> PlantedFunction {
        let factors = (0..n)
            .map(|i| -> AxisEvaluator {
                if support.contains(&i) {
                    Arc::new(sign)
                } else {
                    Arc::new(|_x: f64| 1.0)
                }
            })
            .collect();
        PlantedFunction {
            function: OracleFunction::product("product_sign", factors).boolean(),
            spectrum: None,
        }
    }

    /// `sgn(x − a)` in one variable.
    pub fn sign_threshold(a: f64) -> PlantedFunction {
        PlantedFunction {
            function: OracleFunction::product(
                "sign_threshold",
                alloc::vec![Arc::new(move |x: f64| sign(x - a)) as AxisEvaluator],
            )
            .boolean(),
            spectrum: None,
        }
    }

    /// Hermite polynomial `Σ c_i h_{v_i}(x)`, scaled by `1/bound` and clipped
    /// to `[−1, 1]`. Inside the region where the clip is inactive the
    /// spectrum is the planted one scaled by `1/bound`.
    pub fn hermite_mixture(n: usize, terms: &[(Vec<usize>, f64)], bound: f64) -> Result<PlantedFunction> {
        if terms.iter().any(|(v, _)| v.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "every multi-index must have {n} entries"
            )));
        }
        if !(bound > 0.0) {
            return Err(Error::InvalidArgument(format!("bound must be positive, got {bound}")));
        }
        let ts: Vec<(Vec<usize>, f64)> = terms.to_vec();
        let eval = move |x: &[f64]| -> f64 {
            let s: f64 = ts.iter().map(|(v, c)| c * hermite_multi(v, x)).sum();
            (s / bound).clamp(-1.0, 1.0)
        };
        let kappa_hint = bound / terms.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        let d = terms.iter().flat_map(|(v, _)| v.iter().copied()).max().unwrap_or(0);
        let f = OracleFunction::new(n, "hermite_mixture", eval)
            .with_kappa(kappa_hint.max(1.0))
            .with_degree_cutoff(d.max(1));
        Ok(PlantedFunction {
            function: f,
            spectrum: Some(terms.iter().map(|(v, c)| (v.clone(), c / bound)).collect()),
        })
    }

    /// Indicator of `|x| ≤ a` in one variable. Its sup-norm distortion is
    /// `1/√P(|Y| ≤ a)`.
    pub fn centered_indicator(a: f64, kappa: f64) -> PlantedFunction {
        PlantedFunction {
            function: OracleFunction::product(
                "centered_indicator",
                alloc::vec![Arc::new(move |x: f64| if x.abs() <= a { 1.0 } else { 0.0 }) as AxisEvaluator],
            )
            .with_kappa(kappa),
            spectrum: None,
        }
    }

    /// Boxed evaluator, for callers assembling their own corpora.
    pub fn boxed(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> AxisEvaluator {
        Arc::new(f)
    }

    /// Half-width `a` with `P(|Y| ≤ a) = 1/κ²` for `Y ~ N(0, 1)`.
    pub fn indicator_half_width(kappa: f64) -> f64 {
        // Bisection on erf(a/√2) = 1/κ².
        let target = 1.0 / (kappa * kappa);
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if libm::erf(mid / core::f64::consts::SQRT_2) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
