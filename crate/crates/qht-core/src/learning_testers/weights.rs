//! Coefficient patterns, Monte-Carlo weight estimation and restricted
//! coefficients.
//!
//! For a pattern fixing coordinates `J` to `S` and leaving the rest free,
//! `W^S(f) = Σ_T f̂(S ∪ T)²`. The estimator rests on the restriction
//! identity `W^S(f) = E_z[(F_S f(z))²]`, with
//! `F_S f(z) = E_y[f(y, z)·h_S(y)]`. Expanding the square with an
//! independent copy `y′` gives
//! `W^S(f) = E_z E_{y,y′}[f(y,z)·f(y′,z)·h_S(y)·h_S(y′)]`: a plain average
//! of bounded-variance terms.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::hermite_sampling::{probabilist_hermite, quadrature_weights, CoefficientEstimate, OracleFunction};
use crate::{Error, Result};

/// Entries in `ℕ ∪ {*}`: `Some(a)` fixes a coordinate, `None` leaves it free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoefficientPattern {
    entries: Vec<Option<usize>>,
}

impl CoefficientPattern {
    /// Arbitrary pattern.
    pub fn new(entries: Vec<Option<usize>>) -> Self {
        Self { entries }
    }

    /// `(a₁, …, a_k, *, …, *)` on `n` coordinates.
    pub fn prefix(n: usize, fixed: &[usize]) -> Result<Self> {
        if fixed.len() > n {
            return Err(Error::InvalidArgument(format!(
                "prefix of length {} exceeds arity {n}",
                fixed.len()
            )));
        }
        let mut entries: Vec<Option<usize>> = fixed.iter().map(|&a| Some(a)).collect();
        entries.resize(n, None);
        Ok(Self { entries })
    }

    /// Entries.
    pub fn entries(&self) -> &[Option<usize>] {
        &self.entries
    }

    /// Number of coordinates.
    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    /// Number of fixed coordinates.
    pub fn fixed_len(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    /// Whether the free coordinates form a suffix.
    pub fn is_prefix_form(&self) -> bool {
        let k = self.fixed_len();
        self.entries[..k].iter().all(Option::is_some)
    }

    /// Fully fixed multi-index, if there are no wildcards.
    pub fn as_index(&self) -> Option<Vec<usize>> {
        self.entries.iter().copied().collect()
    }

    /// Whether the multi-index `v` matches on every fixed coordinate.
    pub fn matches(&self, v: &[usize]) -> bool {
        self.entries.iter().zip(v).all(|(e, &k)| e.map_or(true, |a| a == k))
    }
}

/// A Monte-Carlo estimate of `W^S(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightEstimate {
    /// The pattern `S`.
    pub pattern: CoefficientPattern,
    /// Median-of-means estimate.
    pub value: f64,
    /// Empirical-Bernstein half-width at confidence `1 − δ`.
    pub half_width: f64,
    /// Requested accuracy `ε_est`.
    pub target: f64,
    /// Confidence `1 − δ`.
    pub confidence: f64,
    /// Paired draws used.
    pub samples: usize,
    /// Function evaluations used (two per draw).
    pub queries: u64,
}

/// `⌈γ²/ε²·ln(2/δ)⌉` with `γ² ≥ 1`.
pub fn weight_sample_count(gamma_sq: f64, eps: f64, delta: f64) -> Result<usize> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need ε > 0 and δ ∈ (0, 1), got ε = {eps}, δ = {delta}"
        )));
    }
    let g = gamma_sq.max(1.0);
    Ok((g / (eps * eps) * (2.0 / delta).ln()).ceil() as usize)
}

/// Number of groups for the median-of-means: `⌈ln(2/δ)⌉`, made odd.
///
/// With `⌈γ²/ε²·ln(2/δ)⌉` draws this gives groups of about `γ²/ε²` draws
/// each. The integrands `f·f′·h_S·h_S′` are unbounded and heavy-tailed, so
/// a plain mean overshoots far more often than its variance suggests; the
/// median of group means does not.
pub fn mom_groups(delta: f64) -> usize {
    let g = ((2.0 / delta).ln().ceil() as usize).max(1);
    g | 1
}

/// Median of the means of `groups` consecutive equal blocks of `xs`
/// (a remainder shorter than a block joins the last one).
pub fn median_of_means(xs: &[f64], groups: usize) -> f64 {
    let g = groups.clamp(1, xs.len().max(1));
    if xs.is_empty() {
        return 0.0;
    }
    let size = xs.len() / g;
    let mut means: Vec<f64> = (0..g)
        .map(|i| {
            let end = if i + 1 == g { xs.len() } else { (i + 1) * size };
            let block = &xs[i * size..end];
            block.iter().sum::<f64>() / block.len() as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    if g % 2 == 1 {
        means[g / 2]
    } else {
        0.5 * (means[g / 2 - 1] + means[g / 2])
    }
}

/// Maurer–Pontil empirical-Bernstein half-width. The range bound is the
/// largest observed magnitude (a heuristic for unbounded integrands).
pub fn empirical_bernstein(var: f64, range: f64, n: usize, delta: f64) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    let l = (2.0 / delta).ln();
    (2.0 * var * l / n as f64).sqrt() + 7.0 * range * l / (3.0 * (n - 1) as f64)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Running mean/variance (Welford) with the largest magnitude seen.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
    max_abs: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        self.max_abs = self.max_abs.max(x.abs());
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub(crate) fn half_width(&self, delta: f64) -> f64 {
        empirical_bernstein(self.variance(), 2.0 * self.max_abs, self.n, delta)
    }
}

/// Estimates `W^S(f)` to `±ε_est` with probability `1 − δ` from
/// `⌈γ²/ε²·ln(2/δ)⌉` paired draws.
pub fn weight_estimate<R: Rng + ?Sized>(
    f: &OracleFunction,
    pattern: &CoefficientPattern,
    eps_est: f64,
    delta: f64,
    gamma_sq: f64,
    rng: &mut R,
) -> Result<WeightEstimate> {
    if pattern.arity() != f.arity() {
        return Err(Error::DimensionMismatch {
            expected: f.arity(),
            got: pattern.arity(),
        });
    }
    let samples = weight_sample_count(gamma_sq, eps_est, delta)?;
    let fixed: Vec<(usize, usize)> = pattern
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|a| (i, a)))
        .collect();
    let k_max = fixed.iter().map(|p| p.1).max().unwrap_or(0);
    let mut buf = alloc::vec![0.0; k_max + 1];
    let mut x = alloc::vec![0.0; f.arity()];
    let mut x2 = alloc::vec![0.0; f.arity()];
    let mut acc = Moments::default();
    let mut terms = Vec::with_capacity(samples);
    for _ in 0..samples {
        for (a, b) in x.iter_mut().zip(x2.iter_mut()) {
            *a = gaussian(rng);
            *b = *a;
        }
        let mut h = 1.0;
        let mut h2 = 1.0;
        for &(i, a) in &fixed {
            x2[i] = gaussian(rng);
            probabilist_hermite(x[i], a, &mut buf);
            h *= buf[a];
            probabilist_hermite(x2[i], a, &mut buf);
            h2 *= buf[a];
        }
        let t = f.evaluate(&x) * f.evaluate(&x2) * h * h2;
        acc.push(t);
        terms.push(t);
    }
    Ok(WeightEstimate {
        pattern: pattern.clone(),
        value: median_of_means(&terms, mom_groups(delta)),
        half_width: acc.half_width(delta),
        target: eps_est,
        confidence: 1.0 - delta,
        samples,
        queries: 2 * samples as u64,
    })
}

/// Shared-draw estimates of `W^{(prefix, a, *, …)}` for every
/// `a = 0..=cap`.
///
/// Returns one `(estimate, half_width)` pair per child, the estimate
/// being the median of means. One batch of draws
/// serves all children: the two function values and the prefix Hermite
/// factors are computed once per draw, and the branching coordinate's
/// `h_a` come from a single recurrence.
pub fn child_weights<R: Rng + ?Sized>(
    f: &OracleFunction,
    prefix: &[usize],
    cap: usize,
    samples: usize,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    let n = f.arity();
    let k = prefix.len();
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "prefix of length {k} leaves no coordinate to branch on (n = {n})"
        )));
    }
    let k_max = prefix.iter().copied().max().unwrap_or(0).max(cap);
    let mut buf = alloc::vec![0.0; k_max + 1];
    let mut hy = alloc::vec![0.0; cap + 1];
    let mut x = alloc::vec![0.0; n];
    let mut x2 = alloc::vec![0.0; n];
    let mut acc = alloc::vec![Moments::default(); cap + 1];
    let mut terms = alloc::vec![Vec::with_capacity(samples); cap + 1];
    for _ in 0..samples {
        for (a, b) in x.iter_mut().zip(x2.iter_mut()) {
            *a = gaussian(rng);
            *b = *a;
        }
        let mut hp = 1.0;
        for (i, &a) in prefix.iter().enumerate() {
            x2[i] = gaussian(rng);
            probabilist_hermite(x[i], a, &mut buf);
            hp *= buf[a];
            probabilist_hermite(x2[i], a, &mut buf);
            hp *= buf[a];
        }
        x2[k] = gaussian(rng);
        let ff = f.evaluate(&x) * f.evaluate(&x2) * hp;
        probabilist_hermite(x[k], cap, &mut hy);
        probabilist_hermite(x2[k], cap, &mut buf);
        for (a, (m, t)) in acc.iter_mut().zip(terms.iter_mut()).enumerate() {
            let v = ff * hy[a] * buf[a];
            m.push(v);
            t.push(v);
        }
    }
    let groups = mom_groups(delta);
    Ok(acc
        .iter()
        .zip(&terms)
        .map(|(m, t)| (median_of_means(t, groups), m.half_width(delta)))
        .collect())
}

/// Grid budget of the restriction quadrature: `|J|·log₂(2M) ≤ 22`.
pub const RESTRICTION_BUDGET_BITS: u32 = 22;

/// `F_S f(z) = ∫ f(y, z)·h_S(y)·γ(y) dy` over the fixed coordinates `J`,
/// by the midpoint rule at `M` and `2M` nodes per axis. `z` holds values
/// for the free coordinates in increasing order.
pub fn restriction_coefficient(
    f: &OracleFunction,
    pattern: &CoefficientPattern,
    z: &[f64],
    m_quad: usize,
) -> Result<CoefficientEstimate> {
    let fixed: Vec<(usize, usize)> = pattern
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|a| (i, a)))
        .collect();
    let free: Vec<usize> = (0..pattern.arity())
        .filter(|i| pattern.entries()[*i].is_none())
        .collect();
    if pattern.arity() != f.arity() || z.len() != free.len() {
        return Err(Error::DimensionMismatch {
            expected: free.len(),
            got: z.len(),
        });
    }
    let j = fixed.len();
    let bits = j as f64 * ((2 * m_quad) as f64).log2();
    if bits > RESTRICTION_BUDGET_BITS as f64 {
        return Err(Error::BudgetExceeded(format!(
            "restriction grid needs |J|·log₂(2M) = {bits:.1} > {RESTRICTION_BUDGET_BITS} bits"
        )));
    }
    let k_max = fixed.iter().map(|p| p.1).max().unwrap_or(0);
    let one = |m: usize| -> f64 {
        let (nodes, w) = quadrature_weights(m, k_max);
        let mut x = alloc::vec![0.0; f.arity()];
        for (&i, &zi) in free.iter().zip(z) {
            x[i] = zi;
        }
        let mut idx = alloc::vec![0usize; j];
        let mut total = 0.0;
        for _ in 0..m.pow(j as u32) {
            let mut wt = 1.0;
            for (&(i, a), &g) in fixed.iter().zip(&idx) {
                x[i] = nodes[g];
                wt *= w[a][g];
            }
            total += f.evaluate(&x) * wt;
            for ax in (0..j).rev() {
                idx[ax] += 1;
                if idx[ax] < m {
                    break;
                }
                idx[ax] = 0;
            }
        }
        total
    };
    let coarse = one(m_quad);
    let fine = one(2 * m_quad);
    Ok(CoefficientEstimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

/// Heuristic `γ_f² ≈ E‖∇f‖²` by central differences (step `h`) at
/// `points` Gaussian points. By the Gaussian Poincaré inequality this
/// bounds `Var f`; discontinuous `f` make it blow up, so declare `γ²`
/// for those.
pub fn estimate_gamma_sq<R: Rng + ?Sized>(f: &OracleFunction, points: usize, h: f64, rng: &mut R) -> f64 {
    let n = f.arity();
    let mut x = alloc::vec![0.0; n];
    let mut total = 0.0;
    for _ in 0..points {
        x.iter_mut().for_each(|v| *v = gaussian(rng));
        for i in 0..n {
            let c = x[i];
            x[i] = c + h;
            let up = f.evaluate(&x);
            x[i] = c - h;
            let down = f.evaluate(&x);
            x[i] = c;
            let g = (up - down) / (2.0 * h);
            total += g * g;
        }
    }
    total / points.max(1) as f64
}
