//! The discretized quantum harmonic oscillator.
//!
//! `x̄ = diag(x_j)` on the position grid, `p̄ = F⁻¹ x̄ F` with `F` the
//! centered DFT, and `H̄ = ½(x̄² + p̄²)`. The fast path never materializes
//! `p̄`; dense matrices appear only inside the oracles (eigendecomposition,
//! defect operator, commutator laboratory), each guarded by a size budget.
//!
//! With `F_jk = e^{+i2πjk/M}/√M`, `p̄` acts on sampled smooth functions as
//! `+i d/dx`, so the continuum ladder representation it matches is
//! `p̄ ↔ i(a − a†)/√2` (and `[x̄, p̄] ≈ −i` on low-energy states). Even powers
//! of `p̄` are insensitive to that sign.

mod commutator;
pub mod mp;

pub use commutator::{
    commutator_tail_norm, commutator_tail_norm_mp, tail_dimension, MpOptions, TailFamily, TailReport,
};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::linalg;
use crate::spectral_core::{centered_dft_in_place, default_fft, hermite_table, Fft, GridSpec, StateVector};
use crate::{Error, Result, C64};

/// Largest `M` accepted by [`dense_diagonalize`].
pub const DENSE_EIGEN_BUDGET: usize = 4096;
/// Largest `M` accepted by [`defect_delta`].
pub const DEFECT_BUDGET: usize = 512;
/// Number of lowest eigenvalues refined by a Rayleigh quotient.
const RAYLEIGH_REFINED: usize = 64;

/// Operators of the discrete oscillator on one grid.
#[derive(Clone)]
pub struct DiscreteQho {
    spec: GridSpec,
    fft: Fft,
    x: Vec<f64>,
    x2: Vec<f64>,
}

impl core::fmt::Debug for DiscreteQho {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DiscreteQho").field("spec", &self.spec).finish()
    }
}

impl DiscreteQho {
    /// Builds the oscillator with the exact dense DFT backend.
    pub fn build(spec: GridSpec) -> Result<Self> {
        Self::with_fft(spec, default_fft(spec.m()))
    }

    /// Builds the oscillator with a caller-supplied DFT backend.
    pub fn with_fft(spec: GridSpec, fft: Fft) -> Result<Self> {
        if spec.m() < 8 {
            return Err(Error::InvalidSpec(format!("oscillator needs M >= 8, got {}", spec.m())));
        }
        if fft.len() != spec.m() {
            return Err(Error::DimensionMismatch {
                expected: spec.m(),
                got: fft.len(),
            });
        }
        let x: Vec<f64> = spec.labels().map(|j| spec.x(j)).collect();
        let x2 = x.iter().map(|v| v * v).collect();
        Ok(Self { spec, fft, x, x2 })
    }

    /// Grid geometry.
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// DFT backend handle.
    pub fn fft(&self) -> &Fft {
        &self.fft
    }

    /// Diagonal of `x̄`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Diagonal of `x̄²`.
    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    /// `‖x̄‖ = ‖p̄‖ = √(πM/2)`.
    pub fn operator_norm_x(&self) -> f64 {
        self.spec.x_max()
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.dim() != self.spec.m() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.m(),
                got: state.dim(),
            });
        }
        Ok(())
    }

    fn diag(&self, d: &[f64], state: &StateVector) -> Result<StateVector> {
        self.check(state)?;
        Ok(StateVector::new(state.amps.iter().zip(d).map(|(a, v)| a * v).collect()))
    }

    fn momentum_diag(&self, d: &[f64], state: &StateVector) -> Result<StateVector> {
        self.check(state)?;
        let mut buf = state.amps.clone();
        centered_dft_in_place(self.fft.as_ref(), &mut buf, false)?;
        buf.iter_mut().zip(d).for_each(|(a, v)| *a *= v);
        centered_dft_in_place(self.fft.as_ref(), &mut buf, true)?;
        Ok(StateVector::new(buf))
    }

    /// `x̄|v⟩`.
    pub fn apply_x(&self, state: &StateVector) -> Result<StateVector> {
        self.diag(&self.x, state)
    }

    /// `x̄²|v⟩`.
    pub fn apply_x2(&self, state: &StateVector) -> Result<StateVector> {
        self.diag(&self.x2, state)
    }

    /// `p̄|v⟩ = F⁻¹ x̄ F|v⟩`.
    pub fn apply_p(&self, state: &StateVector) -> Result<StateVector> {
        self.momentum_diag(&self.x, state)
    }

    /// `p̄²|v⟩`.
    pub fn apply_p2(&self, state: &StateVector) -> Result<StateVector> {
        self.momentum_diag(&self.x2, state)
    }

    /// `H̄|v⟩ = ½(x̄² + p̄²)|v⟩` with two DFTs.
    pub fn apply_hamiltonian(&self, state: &StateVector) -> Result<StateVector> {
        let mut out = self.apply_p2(state)?;
        for ((o, a), v) in out.amps.iter_mut().zip(&state.amps).zip(&self.x2) {
            *o = 0.5 * (*o + a * v);
        }
        Ok(out)
    }

    /// Dense real symmetric `H̄` (oracle use only).
    pub fn dense_hamiltonian(&self) -> DMatrix<f64> {
        let m = self.spec.m();
        let c = p2_circulant(&self.spec);
        DMatrix::from_fn(m, m, |r, s| {
            let d = (r + m - s) % m;
            let diag = if r == s { self.x2[r] } else { 0.0 };
            0.5 * (diag + c[d])
        })
    }
}

/// First column of the circulant `p̄²`: `c(d) = (1/M) Σ_k x_k² cos(2πkd/M)`,
/// so that `(p̄²)_{jl} = c((j − l) mod M)`.
///
/// The matrix is real: the sine terms cancel in `±k` pairs and the unpaired
/// `k = −M/2` term has `sin(−πd) = 0`.
pub fn p2_circulant(spec: &GridSpec) -> Vec<f64> {
    let m = spec.m();
    let cos_table: Vec<f64> = (0..m).map(|r| (2.0 * PI * r as f64 / m as f64).cos()).collect();
    (0..m)
        .map(|d| {
            let s: f64 = spec
                .labels()
                .map(|k| {
                    let xk = spec.x(k);
                    let r = (k * d as i64).rem_euclid(m as i64) as usize;
                    xk * xk * cos_table[r]
                })
                .sum();
            s / m as f64
        })
        .collect()
}

/// Eigenpairs of `H̄`, ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues `E_0 ≤ … ≤ E_{M−1}`.
    pub energies: Vec<f64>,
    /// Real orthonormal eigenvectors, signed so that `⟨ψ̄_n|ē_n⟩ ≥ 0` where
    /// that overlap is non-negligible.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    /// Eigenvector `n` as a statevector.
    pub fn state(&self, n: usize) -> StateVector {
        StateVector::from_real(&self.vectors[n])
    }

    /// Number of eigenpairs.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    /// Whether the decomposition is empty.
    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Dense diagonalization of `H̄` (ground-truth oracle, `M ≤ 4096`).
///
/// The lowest eigenvalues are refined by the Rayleigh quotient evaluated
/// with the FFT-applied Hamiltonian: a dense symmetric eigensolver places
/// eigenvalues only to `~ε_mach·‖H̄‖ ≈ 1e-12` at `M = 1024`, which would
/// otherwise swamp the `1e-13`-level fast-forwarding errors it is used to
/// measure. The eigenvector error enters the Rayleigh quotient squared.
pub fn dense_diagonalize(qho: &DiscreteQho) -> Result<EigenDecomposition> {
    let m = qho.spec().m();
    if m > DENSE_EIGEN_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "dense diagonalization limited to M <= {DENSE_EIGEN_BUDGET}, got {m}"
        )));
    }
    let eig = qho.dense_hamiltonian().symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let align = hermite_table(m.min(512) - 1, qho.spec());
    let sqrt_h = qho.spec().h().sqrt();
    let mut energies = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m);
    for (n, &col) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
        let reference = if n <= align.n_max() {
            align.row(n).iter().zip(&v).map(|(p, e)| p * e).sum::<f64>() * sqrt_h
        } else {
            0.0
        };
        let flip = if reference.abs() > 1e-6 {
            reference < 0.0
        } else {
            let big = v
                .iter()
                .copied()
                .fold(0.0_f64, |a, b| if b.abs() > a.abs() { b } else { a });
            big < 0.0
        };
        if flip {
            v.iter_mut().for_each(|e| *e = -*e);
        }
        let mut e = eig.eigenvalues[col];
        if n < RAYLEIGH_REFINED {
            let s = StateVector::from_real(&v);
            let hs = qho.apply_hamiltonian(&s)?;
            e = s.inner(&hs).re / s.inner(&s).re;
        }
        energies.push(e);
        vectors.push(v);
    }
    Ok(EigenDecomposition { energies, vectors })
}

/// Sampled Hermite states `|ψ̄_n⟩ = (2π/M)^{1/4} Σ_j ψ_n(x_j)|j⟩`.
///
/// Deliberately *not* re-normalized: their Gram defect is the quantity the
/// discretization estimates are about.
#[derive(Debug, Clone)]
pub struct DiscreteHermiteBasis {
    spec: GridSpec,
    states: Vec<Vec<f64>>,
}

impl DiscreteHermiteBasis {
    /// Number of states (`n_max + 1`).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Whether the basis is empty.
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Grid of the basis.
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Real amplitudes of `|ψ̄_n⟩`.
    pub fn real(&self, n: usize) -> &[f64] {
        &self.states[n]
    }

    /// `|ψ̄_n⟩` as a statevector.
    pub fn state(&self, n: usize) -> StateVector {
        StateVector::from_real(&self.states[n])
    }

    /// `⟨ψ̄_k|ψ̄_l⟩`.
    pub fn overlap(&self, k: usize, l: usize) -> f64 {
        self.states[k].iter().zip(&self.states[l]).map(|(a, b)| a * b).sum()
    }

    /// `max_{k,l ≤ k_max} |⟨ψ̄_k|ψ̄_l⟩ − δ_kl|`.
    pub fn gram_defect(&self, k_max: usize) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..=k_max {
            for l in k..=k_max {
                let d = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((self.overlap(k, l) - d).abs());
            }
        }
        worst
    }
}

/// Builds `|ψ̄_0⟩, …, |ψ̄_{n_max}⟩`.
pub fn hermite_basis(spec: &GridSpec, n_max: usize) -> Result<DiscreteHermiteBasis> {
    if n_max >= spec.m() {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must be below M = {}",
            spec.m()
        )));
    }
    let table = hermite_table(n_max, spec);
    let s = spec.h().sqrt();
    let states = (0..=n_max)
        .map(|n| table.row(n).iter().map(|v| v * s).collect())
        .collect();
    Ok(DiscreteHermiteBasis { spec: *spec, states })
}

/// Projector onto the `N` lowest-energy states.
#[derive(Debug, Clone)]
pub struct EnergyProjector {
    vectors: Vec<Vec<C64>>,
}

impl EnergyProjector {
    /// Oracle form `Σ_{k<N} |ē_k⟩⟨ē_k|`.
    pub fn from_eigen(eig: &EigenDecomposition, n: usize) -> Self {
        Self {
            vectors: (0..n).map(|k| eig.state(k).amps).collect(),
        }
    }

    /// State form `Σ_{k<N} |ψ̄_k⟩⟨ψ̄_k|`.
    pub fn from_basis(basis: &DiscreteHermiteBasis, n: usize) -> Self {
        Self {
            vectors: (0..n).map(|k| basis.state(k).amps).collect(),
        }
    }

    /// Rank `N`.
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Spanning vectors.
    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// `Π|v⟩`.
    pub fn apply(&self, state: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(state.dim());
        for v in &self.vectors {
            let c = crate::spectral_core::inner(v, &state.amps);
            for (o, b) in out.amps.iter_mut().zip(v) {
                *o += c * b;
            }
        }
        out
    }

    /// `‖Π_a − Π_b‖` in operator norm, via the `2N`-dimensional joint span.
    pub fn distance(&self, other: &EnergyProjector) -> f64 {
        let mut span: Vec<Vec<C64>> = self.vectors.clone();
        span.extend(other.vectors.iter().cloned());
        let basis = orthonormal_span(&span);
        let k = basis.len();
        let a = DMatrix::from_fn(k, k, |r, c| {
            let pa = self.apply(&StateVector::new(basis[c].clone()));
            let pb = other.apply(&StateVector::new(basis[c].clone()));
            let mut d = pa;
            d.axpy(C64::new(-1.0, 0.0), &pb);
            crate::spectral_core::inner(&basis[r], &d.amps)
        });
        linalg::spectral_norm(&a)
    }
}

/// Orthonormal basis of the span (modified Gram–Schmidt, twice).
fn orthonormal_span(vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = crate::spectral_core::inner(q, &w);
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = crate::spectral_core::norm(&w);
        if n > 1e-10 {
            w.iter_mut().for_each(|a| *a /= n);
            out.push(w);
        }
    }
    out
}

/// Continuum matrix element `⟨k| x^a p̄^b |l⟩` in the ladder representation
/// `x = (a + a†)/√2`, `p̄ = i(a − a†)/√2` (see the module docs for the sign).
pub fn continuum_matrix_element(k: usize, l: usize, a: usize, b: usize) -> C64 {
    let dim = k.max(l) + a + b + 2;
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[l] = C64::new(1.0, 0.0);
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let lower = |v: &[C64]| -> Vec<C64> {
        let mut o = vec![C64::new(0.0, 0.0); v.len()];
        for n in 1..v.len() {
            o[n - 1] += v[n] * (n as f64).sqrt();
        }
        o
    };
    let raise = |v: &[C64]| -> Vec<C64> {
        let mut o = vec![C64::new(0.0, 0.0); v.len()];
        for n in 0..v.len() - 1 {
            o[n + 1] += v[n] * ((n + 1) as f64).sqrt();
        }
        o
    };
    for _ in 0..b {
        let lo = lower(&v);
        let hi = raise(&v);
        v = lo.iter().zip(&hi).map(|(x, y)| (x - y) * C64::new(0.0, s)).collect();
    }
    for _ in 0..a {
        let lo = lower(&v);
        let hi = raise(&v);
        v = lo.iter().zip(&hi).map(|(x, y)| (x + y) * s).collect();
    }
    v[k]
}

/// Largest deviation `|⟨ψ̄_k| x̄^a p̄^b |ψ̄_l⟩ − continuum|` over
/// `a, b ≤ ab_max` and `k, l ≤ kl_max`.
pub fn fact_check(qho: &DiscreteQho, ab_max: usize, kl_max: usize) -> Result<f64> {
    let basis = hermite_basis(qho.spec(), kl_max)?;
    let mut worst = 0.0_f64;
    for l in 0..=kl_max {
        let mut pb = basis.state(l);
        for b in 0..=ab_max {
            if b > 0 {
                pb = qho.apply_p(&pb)?;
            }
            let mut xapb = pb.clone();
            for a in 0..=ab_max {
                if a > 0 {
                    xapb = qho.apply_x(&xapb)?;
                }
                for k in 0..=kl_max {
                    let disc = basis.state(k).inner(&xapb);
                    let cont = continuum_matrix_element(k, l, a, b);
                    worst = worst.max((disc - cont).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// `‖(I − Π_{N'}) x̄^a Π_N‖` with both projectors in oracle form.
pub fn position_leakage(
    qho: &DiscreteQho,
    eig: &EigenDecomposition,
    a: usize,
    n: usize,
    n_prime: usize,
) -> Result<f64> {
    let high = EnergyProjector::from_eigen(eig, n_prime);
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = eig.state(k);
        for _ in 0..a {
            v = qho.apply_x(&v)?;
        }
        let p = high.apply(&v);
        v.axpy(C64::new(-1.0, 0.0), &p);
        cols.push(v.amps);
    }
    Ok(linalg::spectral_norm(&linalg::from_columns(&cols)))
}

/// `Σ_{k ≥ 3a} a^k/k!`, summed term by term in the log domain.
pub fn poisson_tail(a: f64) -> f64 {
    if a <= 0.0 {
        return if a == 0.0 { 0.0 } else { f64::NAN };
    }
    let k0 = (3.0 * a).ceil() as u64;
    let mut log_term = k0 as f64 * a.ln() - libm::lgamma(k0 as f64 + 1.0);
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        let term = log_term.exp();
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        k += 1;
        log_term += a.ln() - (k as f64).ln();
    }
    sum
}

/// One candidate constant for the defect `Δ = [x̄²,[x̄²,p̄²]] − c·x̄²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectCandidate {
    /// Human-readable origin of the constant.
    pub label: String,
    /// The constant `c`.
    pub constant: C64,
    /// `‖Π_{N'} Δ Π_{N'}‖`.
    pub projected_norm: f64,
    /// `‖Δ‖` on the whole grid.
    pub full_norm: f64,
}

/// Outcome of [`defect_delta`].
#[derive(Debug, Clone)]
pub struct DefectReport {
    /// Candidates in the order tried: `4i`, `8i`, then the fitted constant.
    pub candidates: Vec<DefectCandidate>,
    /// Index of the candidate with the smallest projected norm.
    pub chosen: usize,
    /// `Δ` for the chosen constant.
    pub delta: DMatrix<C64>,
}

impl DefectReport {
    /// The selected candidate.
    pub fn best(&self) -> &DefectCandidate {
        &self.candidates[self.chosen]
    }
}

/// Dense `[x̄²,[x̄²,p̄²]]`, whose entries are `(x_i² − x_k²)²·(p̄²)_{ik}`.
pub fn double_commutator(spec: &GridSpec) -> DMatrix<f64> {
    let m = spec.m();
    let c = p2_circulant(spec);
    let x2: Vec<f64> = spec.labels().map(|j| spec.x(j) * spec.x(j)).collect();
    DMatrix::from_fn(m, m, |r, s| {
        let d = x2[r] - x2[s];
        d * d * c[(r + m - s) % m]
    })
}

/// Builds the discretization defect `Δ` and resolves its constant.
///
/// The two literal candidates `c ∈ {4i, 8i}` are evaluated alongside the
/// least-squares constant fitted to the low-energy matrix elements
/// `⟨ē_k|[x̄²,[x̄²,p̄²]]|ē_l⟩ ≈ c·⟨ē_k|x̄²|ē_l⟩`; whichever minimizes
/// `‖Π_{N'} Δ Π_{N'}‖` is chosen. All candidate norms are reported.
pub fn defect_delta(qho: &DiscreteQho, eig: &EigenDecomposition, n_prime: usize) -> Result<DefectReport> {
    let spec = qho.spec();
    let m = spec.m();
    if m > DEFECT_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "defect operator limited to M <= {DEFECT_BUDGET}, got {m}"
        )));
    }
    let dc = double_commutator(spec).map(|v| C64::new(v, 0.0));
    let x2 = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        qho.x2().iter().map(|&v| C64::new(v, 0.0)),
    ));
    let q = linalg::from_columns(&(0..n_prime).map(|k| eig.state(k).amps).collect::<Vec<_>>());
    let qa = q.adjoint();
    let proj_dc = &qa * &dc * &q;
    let proj_x2 = &qa * &x2 * &q;
    let num: C64 = proj_x2.iter().zip(proj_dc.iter()).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = proj_x2.iter().map(|a| a.norm_sqr()).sum();
    let fitted = num / den;
    let mut candidates = Vec::new();
    let mut deltas = Vec::new();
    for (label, c) in [
        (String::from("4i"), C64::new(0.0, 4.0)),
        (String::from("8i"), C64::new(0.0, 8.0)),
        (format!("fitted ({:.6}{:+.6}i)", fitted.re, fitted.im), fitted),
    ] {
        let delta = &dc - &x2 * c;
        let projected_norm = linalg::spectral_norm(&(&proj_dc - &proj_x2 * c));
        let full_norm = linalg::spectral_norm(&delta);
        candidates.push(DefectCandidate {
            label,
            constant: c,
            projected_norm,
            full_norm,
        });
        deltas.push(delta);
    }
    let chosen = (0..candidates.len())
        .min_by(|&a, &b| candidates[a].projected_norm.total_cmp(&candidates[b].projected_norm))
        .unwrap_or(0);
    let delta = deltas.swap_remove(chosen);
    Ok(DefectReport {
        candidates,
        chosen,
        delta,
    })
}

#[cfg(test)]
mod tests;
