//! Classical coefficient oracle: tensor-grid Riemann sums of `f·h_v·γ`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{AddAssign, Mul};

use num_traits::{Float, Zero};

use super::basis::{gaussian_density, quadrature_weights};
use super::function::OracleFunction;
use crate::{Error, Result};

/// Full-grid budget: `n·log₂(2M) ≤ 26` (the doubled grid of the Richardson
/// step included). Product functions are exempt.
pub const FULL_GRID_BUDGET_BITS: u32 = 26;

/// Contracts axis after axis of a tensor of shape `[m; n]` (axis 0
/// slowest) against `rows` (`K` rows of length `m`), producing shape
/// `[K; n]` in the same axis order.
pub fn contract<T, W>(values: &[T], m: usize, n: usize, rows: &[Vec<W>]) -> Vec<T>
where
    T: Copy + Zero + AddAssign + Mul<W, Output = T>,
    W: Copy,
{
    let k = rows.len();
    let mut cur: Vec<T> = values.to_vec();
    // Each pass contracts the slowest axis and appends the result as the
    // fastest one, so after `n` passes the original axis order is restored.
    for _ in 0..n {
        let rest = cur.len() / m;
        let mut out = alloc::vec![T::zero(); rest * k];
        for (j, chunk) in cur.chunks_exact(rest).enumerate() {
            for (kk, row) in rows.iter().enumerate() {
                let w = row[j];
                for (r, &v) in chunk.iter().enumerate() {
                    out[r * k + kk] += v * w;
                }
            }
        }
        cur = out;
    }
    cur
}

/// Values of `f` on the full midpoint tensor grid (axis 0 slowest).
pub fn grid_values(f: &OracleFunction, nodes: &[f64]) -> Vec<f64> {
    let n = f.arity();
    let m = nodes.len();
    let total = m.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = alloc::vec![0usize; n];
    let mut x = alloc::vec![nodes[0]; n];
    for _ in 0..total {
        for (xi, &i) in x.iter_mut().zip(&idx) {
            *xi = nodes[i];
        }
        out.push(f.evaluate(&x));
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

fn check_budget(f: &OracleFunction, m: usize) -> Result<()> {
    if f.separable() {
        return Ok(());
    }
    let bits = f.arity() as f64 * ((2 * m) as f64).log2();
    if bits > FULL_GRID_BUDGET_BITS as f64 {
        return Err(Error::BudgetExceeded(format!(
            "full tensor grid needs n·log₂(2M) = {bits:.1} > {FULL_GRID_BUDGET_BITS} bits; \
             declare product structure or lower M"
        )));
    }
    Ok(())
}

/// Coefficients `f̂(v)` for every `v ∈ [0, d]ⁿ` and `‖f‖²` on one grid.
fn table_on_grid(f: &OracleFunction, d: usize, m: usize) -> (Vec<f64>, f64) {
    let (nodes, w) = quadrature_weights(m, d);
    let n = f.arity();
    let h = (2.0 * core::f64::consts::PI / m as f64).sqrt();
    if f.separable() {
        let mut coeffs = alloc::vec![1.0];
        let mut norm_sq = 1.0;
        for i in 0..n {
            let vals: Vec<f64> = nodes.iter().map(|&y| f.evaluate_factor(i, y).unwrap_or(0.0)).collect();
            let axis: Vec<f64> = w
                .iter()
                .map(|row| row.iter().zip(&vals).map(|(a, b)| a * b).sum())
                .collect();
            norm_sq *= vals
                .iter()
                .zip(&nodes)
                .map(|(v, &y)| v * v * gaussian_density(y) * h)
                .sum::<f64>();
            coeffs = coeffs.iter().flat_map(|&c| axis.iter().map(move |&a| c * a)).collect();
        }
        return (coeffs, norm_sq);
    }
    let vals = grid_values(f, &nodes);
    let dens: Vec<f64> = nodes.iter().map(|&y| gaussian_density(y) * h).collect();
    let mut norm_sq = 0.0;
    let mut idx = alloc::vec![0usize; n];
    for v in &vals {
        let wgt: f64 = idx.iter().map(|&i| dens[i]).product();
        norm_sq += v * v * wgt;
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < nodes.len() {
                break;
            }
            idx[a] = 0;
        }
    }
    (contract(&vals, m, n, &w), norm_sq)
}

/// A coefficient with its grid-doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientEstimate {
    /// Value on the doubled grid.
    pub value: f64,
    /// `|I(2M) − I(M)|`.
    pub error: f64,
}

/// `f̂(v) = ∫ f·h_v·γ` by the midpoint rule on `[−L, L]ⁿ`,
/// `L = √(πM/2)`, at `M` and `2M` nodes per axis.
pub fn coefficient_oracle(f: &OracleFunction, v: &[usize], m_quad: usize) -> Result<CoefficientEstimate> {
    if v.len() != f.arity() {
        return Err(Error::DimensionMismatch {
            expected: f.arity(),
            got: v.len(),
        });
    }
    check_budget(f, m_quad)?;
    let d = v.iter().copied().max().unwrap_or(0);
    let one = |m: usize| -> f64 {
        let (nodes, w) = quadrature_weights(m, d);
        if f.separable() {
            return (0..f.arity())
                .map(|i| {
                    nodes
                        .iter()
                        .zip(&w[v[i]])
                        .map(|(&y, wk)| f.evaluate_factor(i, y).unwrap_or(0.0) * wk)
                        .sum::<f64>()
                })
                .product();
        }
        // Contract each axis against its own degree v_i, one row at a time.
        let vals = grid_values(f, &nodes);
        let mut cur = vals;
        for &vi in v {
            cur = contract(&cur, m, 1, &[w[vi].clone()]);
        }
        cur[0]
    };
    let coarse = one(m_quad);
    let fine = one(2 * m_quad);
    Ok(CoefficientEstimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

/// Hermite spectrum of `f` on `[0, D]ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    /// Number of variables.
    pub arity: usize,
    /// Degree cutoff per coordinate.
    pub d: usize,
    /// `f̂(v)`, row-major over `v` (coordinate 0 slowest).
    pub coeffs: Vec<f64>,
    /// `‖f‖² = ∫ f²γ`.
    pub norm_sq: f64,
    /// Largest grid-doubling discrepancy over the table.
    pub error: f64,
}

impl SpectrumTable {
    /// Flat index of `v`.
    pub fn index(&self, v: &[usize]) -> usize {
        v.iter().fold(0, |acc, &k| acc * (self.d + 1) + k)
    }

    /// Multi-index of flat position `i`.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut v = alloc::vec![0; self.arity];
        for slot in v.iter_mut().rev() {
            *slot = i % (self.d + 1);
            i /= self.d + 1;
        }
        v
    }

    /// `f̂(v)`.
    pub fn get(&self, v: &[usize]) -> f64 {
        self.coeffs[self.index(v)]
    }

    /// `Σ_{v ≤ D} f̂(v)²`.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `‖f‖² − Σ_{v ≤ D} f̂(v)²` (mass above the cutoff; ≥ 0 up to
    /// quadrature error).
    pub fn parseval_residual(&self) -> f64 {
        self.norm_sq - self.mass()
    }

    /// Target sampling distribution `q_v = f̂(v)²/‖f‖²` and the mass above
    /// the cutoff.
    pub fn probabilities(&self) -> (Vec<f64>, f64) {
        let q: Vec<f64> = self.coeffs.iter().map(|c| c * c / self.norm_sq).collect();
        let overflow = (1.0 - q.iter().sum::<f64>()).max(0.0);
        (q, overflow)
    }
}

/// All coefficients `v ∈ [0, d]ⁿ` with grid-doubling error.
pub fn spectrum_table(f: &OracleFunction, d: usize, m_quad: usize) -> Result<SpectrumTable> {
    check_budget(f, m_quad)?;
    let (coarse, _) = table_on_grid(f, d, m_quad);
    let (fine, norm_sq) = table_on_grid(f, d, 2 * m_quad);
    let error = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(SpectrumTable {
        arity: f.arity(),
        d,
        coeffs: fine,
        norm_sq,
        error,
    })
}

fn sup_and_norm(f: &OracleFunction, m_quad: usize, weighted: bool) -> Result<(f64, f64)> {
    check_budget(f, m_quad)?;
    let (nodes, _) = quadrature_weights(m_quad, 0);
    let h = (2.0 * core::f64::consts::PI / m_quad as f64).sqrt();
    let weight = |y: f64| if weighted { gaussian_density(y).sqrt() } else { 1.0 };
    if f.separable() {
        let (mut sup, mut nsq) = (1.0, 1.0);
        for i in 0..f.arity() {
            let vals: Vec<f64> = nodes.iter().map(|&y| f.evaluate_factor(i, y).unwrap_or(0.0)).collect();
            sup *= vals
                .iter()
                .zip(&nodes)
                .map(|(v, &y)| (v * weight(y)).abs())
                .fold(0.0, f64::max);
            nsq *= vals
                .iter()
                .zip(&nodes)
                .map(|(v, &y)| v * v * gaussian_density(y) * h)
                .sum::<f64>();
        }
        return Ok((sup, nsq.sqrt()));
    }
    let vals = grid_values(f, &nodes);
    let n = f.arity();
    let (mut sup, mut nsq) = (0.0f64, 0.0);
    let mut idx = alloc::vec![0usize; n];
    for v in &vals {
        let wt: f64 = idx.iter().map(|&i| weight(nodes[i])).product();
        let g: f64 = idx.iter().map(|&i| gaussian_density(nodes[i]) * h).product();
        sup = sup.max((v * wt).abs());
        nsq += v * v * g;
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < nodes.len() {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok((sup, nsq.sqrt()))
}

/// `κ(f) = ‖f√γ‖_∞/‖f√γ‖₂` on the quadrature grid, the literal form of the
/// distortion (for `f ≡ 1` this is `(2π)^{−n/4}`, below 1).
pub fn distortion(f: &OracleFunction, m_quad: usize) -> Result<f64> {
    let (sup, norm) = sup_and_norm(f, m_quad, true)?;
    Ok(sup / norm)
}

/// `‖f‖_∞/‖f‖_{L²(γ)}`: the quantity that actually sets the postselection
/// cost (`≥ 1`, and `= 1` exactly for `±1`-valued `f`).
pub fn sup_ratio_distortion(f: &OracleFunction, m_quad: usize) -> Result<f64> {
    let (sup, norm) = sup_and_norm(f, m_quad, false)?;
    Ok(sup / norm)
}

/// Hybrid-argument check for product sums. For per-axis values `a_i`
/// (discrete) and `b_i` (exact), it returns
/// `(|Π a_i − Π b_i|, n·Q^{n−1}·max_i |a_i − b_i|)`, where
/// `Q = max_i max(|a_i|, |b_i|)`. The first entry never exceeds the second.
pub fn product_hybrid_bound(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len();
    let q = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    let e = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let pa: f64 = a.iter().product();
    let pb: f64 = b.iter().product();
    let bound = if n == 0 {
        0.0
    } else {
        n as f64 * q.powi(n as i32 - 1) * e
    };
    ((pa - pb).abs(), bound)
}

/// `∫_{ℝⁿ∖[−L,L]ⁿ} |h_v|·γ`: the mass a bounded `f` can place outside the
/// quadrature box.
pub fn truncation_mass(v: &[usize], l: f64) -> f64 {
    let (gx, gw) = crate::qht_pipeline::gauss_legendre(64);
    // ∫_a^b |h_k|γ by composite Gauss–Legendre on unit panels.
    let integral = |k: usize, a: f64, b: f64| -> f64 {
        let panels = ((b - a).ceil() as usize).max(1);
        let step = (b - a) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let (lo, hi) = (a + p as f64 * step, a + (p + 1) as f64 * step);
            let (half, mid) = ((hi - lo) / 2.0, (hi + lo) / 2.0);
            for (z, w) in gx.iter().zip(&gw) {
                let y = half * z + mid;
                s += half * w * (super::basis::hermite_poly(k, y) * gaussian_density(y)).abs();
            }
        }
        s
    };
    let far = 40.0;
    let (mut inside, mut total) = (1.0, 1.0);
    for &k in v {
        let tail = 2.0 * integral(k, l, far.max(l + 1.0));
        let core = 2.0 * integral(k, 0.0, l);
        inside *= core;
        total *= core + tail;
    }
    (total - inside).max(0.0)
}
