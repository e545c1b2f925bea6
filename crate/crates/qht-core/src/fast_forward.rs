//! Closed-form fast-forwarding of `e^{−iH̄t}`.
//!
//! For `|t| ≤ π/2` the evolution is approximated on low-energy states by
//! `e^{−ia p̄²} e^{−ib x̄²} e^{−ia p̄²}` with `a = tan(t/2)/2`,
//! `b = sin(t)/2`. Larger times are reduced into `[−π, π)` using
//! `e^{−iH(t+2π)} = −e^{−iHt}` and, when `|t| > π/2`, split into two
//! half-time repetitions whose adjacent momentum factors merge, giving the
//! five-factor product `(α, β, 2α, β, α)` with `α = tan(t/4)/2`,
//! `β = sin(t/2)/2`.
//!
//! The error meters compare against the dense eigen-oracle on the span of
//! the `N` lowest eigenvectors.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::discrete_qho::{DiscreteQho, EigenDecomposition};
use crate::linalg;
use crate::spectral_core::{apply_diagonal_phase_in_place, centered_dft_in_place, inner, StateVector};
use crate::{Error, Result, C64};

/// Largest `M` for which the projected error meters run.
pub const ERROR_METER_BUDGET: usize = 2048;
/// Largest `M` for the finite-difference generator residual.
pub const RESIDUAL_BUDGET: usize = 512;

/// Which operator a phase factor exponentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `e^{−ic x̄²}`.
    Position,
    /// `e^{−ic p̄²}`.
    Momentum,
}

/// One factor `e^{−ic·A²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    /// Position or momentum.
    pub axis: Axis,
    /// The coefficient `c`.
    pub coefficient: f64,
}

/// Ordered product of phase factors realizing `Ṽ(t)`, with the global sign
/// from the `2π` reduction tracked explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredEvolution {
    /// Factors in application order (first element acts first).
    pub factors: Vec<Factor>,
    /// Reduced time in `[−π, π)`.
    pub t_effective: f64,
    /// 1 (three factors) or 2 (five factors).
    pub reps: u8,
    /// `(−1)^k` for `t = t_effective + 2πk`.
    pub global_sign: f64,
}

impl FactoredEvolution {
    /// Whether every factor is the identity and the sign is `+1`.
    pub fn is_identity(&self) -> bool {
        self.global_sign == 1.0 && self.factors.iter().all(|f| f.coefficient == 0.0)
    }

    /// The adjoint `Ṽ†`: reversed order, negated coefficients, same sign.
    pub fn adjoint(&self) -> FactoredEvolution {
        FactoredEvolution {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| Factor {
                    axis: f.axis,
                    coefficient: -f.coefficient,
                })
                .collect(),
            t_effective: -self.t_effective,
            reps: self.reps,
            global_sign: self.global_sign,
        }
    }
}

/// Decomposes `e^{−iH̄t}` into phase factors.
///
/// The boundary `|t_effective| = π/2` uses the three-factor branch, where
/// `tan(π/4)` is finite.
pub fn decompose(t: f64) -> Result<FactoredEvolution> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let k = ((t + PI) / (2.0 * PI)).floor();
    let mut t2 = t - 2.0 * PI * k;
    if t2 >= PI {
        t2 -= 2.0 * PI;
    }
    let global_sign = if (k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let p = |c: f64| Factor {
        axis: Axis::Momentum,
        coefficient: c,
    };
    let x = |c: f64| Factor {
        axis: Axis::Position,
        coefficient: c,
    };
    let (factors, reps) = if t2.abs() > FRAC_PI_2 {
        let alpha = (t2 / 4.0).tan() / 2.0;
        let beta = (t2 / 2.0).sin() / 2.0;
        (alloc::vec![p(alpha), x(beta), p(2.0 * alpha), x(beta), p(alpha)], 2)
    } else {
        let a = (t2 / 2.0).tan() / 2.0;
        let b = t2.sin() / 2.0;
        (alloc::vec![p(a), x(b), p(a)], 1)
    };
    Ok(FactoredEvolution {
        factors,
        t_effective: t2,
        reps,
        global_sign,
    })
}

/// Applies `Ṽ` to a state: momentum factors as DFT, diagonal phase,
/// inverse DFT; position factors as a diagonal phase. Zero coefficients are
/// skipped, so `decompose(0)` is the exact identity.
pub fn apply_factored(qho: &DiscreteQho, fe: &FactoredEvolution, state: &StateVector) -> Result<StateVector> {
    let m = qho.spec().m();
    if state.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: state.dim(),
        });
    }
    let mut buf = state.amps.clone();
    let mut phases = alloc::vec![0.0; m];
    for f in &fe.factors {
        if f.coefficient == 0.0 {
            continue;
        }
        phases
            .iter_mut()
            .zip(qho.x2())
            .for_each(|(p, v)| *p = f.coefficient * v);
        match f.axis {
            Axis::Position => apply_diagonal_phase_in_place(&mut buf, &phases),
            Axis::Momentum => {
                centered_dft_in_place(qho.fft().as_ref(), &mut buf, false)?;
                apply_diagonal_phase_in_place(&mut buf, &phases);
                centered_dft_in_place(qho.fft().as_ref(), &mut buf, true)?;
            }
        }
    }
    if fe.global_sign != 1.0 {
        buf.iter_mut().for_each(|a| *a *= fe.global_sign);
    }
    Ok(StateVector::new(buf))
}

/// Convenience: `Ṽ(t)|v⟩`.
pub fn evolve(qho: &DiscreteQho, t: f64, state: &StateVector) -> Result<StateVector> {
    apply_factored(qho, &decompose(t)?, state)
}

/// Exact `e^{−iH̄t}|v⟩ = Σ_n e^{−iE_n t}⟨ē_n|v⟩|ē_n⟩`.
pub fn exact_evolution(eig: &EigenDecomposition, t: f64, state: &StateVector) -> StateVector {
    let mut out = StateVector::zeros(state.dim());
    for (e, v) in eig.energies.iter().zip(&eig.vectors) {
        let c: C64 = v.iter().zip(&state.amps).map(|(a, b)| b * a).sum();
        let c = c * C64::new(0.0, -e * t).exp();
        out.amps.iter_mut().zip(v).for_each(|(o, a)| *o += c * a);
    }
    out
}

fn check_meter_budget(qho: &DiscreteQho, eig: &EigenDecomposition, n: usize, cap: usize) -> Result<()> {
    let m = qho.spec().m();
    if m > cap {
        return Err(Error::BudgetExceeded(format!(
            "projected error meter limited to M <= {cap}, got {m}"
        )));
    }
    if n == 0 || n > eig.len() {
        return Err(Error::InvalidArgument(format!(
            "projector rank {n} outside [1, {}]",
            eig.len()
        )));
    }
    Ok(())
}

/// `‖Π_N X Π_N‖` for an operator given by its action, with `Π_N` the span of
/// the `N` lowest eigenvectors: the largest singular value of
/// `⟨ē_m|X|ē_n⟩`, `m, n < N`.
pub fn projected_norm<F>(eig: &EigenDecomposition, n: usize, mut op: F) -> Result<f64>
where
    F: FnMut(usize, &StateVector) -> Result<StateVector>,
{
    let states: Vec<StateVector> = (0..n).map(|k| eig.state(k)).collect();
    let mut a = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (c, s) in states.iter().enumerate() {
        let col = op(c, s)?;
        for (r, sr) in states.iter().enumerate() {
            a[(r, c)] = inner(&sr.amps, &col.amps);
        }
    }
    Ok(linalg::spectral_norm(&a))
}

/// `‖Π_N (U(t) − Ṽ(t)) Π_N‖` against the eigen-oracle.
pub fn low_energy_error(qho: &DiscreteQho, eig: &EigenDecomposition, n: usize, t: f64) -> Result<f64> {
    check_meter_budget(qho, eig, n, ERROR_METER_BUDGET)?;
    let fe = decompose(t)?;
    // U(0) and Ṽ(0) are both the identity; their difference is exactly zero.
    if fe.is_identity() {
        return Ok(0.0);
    }
    projected_norm(eig, n, |k, s| {
        let mut d = apply_factored(qho, &fe, s)?;
        d.scale(C64::new(-1.0, 0.0));
        d.axpy(C64::new(0.0, -eig.energies[k] * t).exp(), s);
        Ok(d)
    })
}

/// `‖Π_N (Ṽ(t₁)Ṽ(t₂) − Ṽ(t₁+t₂)) Π_N‖`.
pub fn group_law_defect(qho: &DiscreteQho, eig: &EigenDecomposition, n: usize, t1: f64, t2: f64) -> Result<f64> {
    check_meter_budget(qho, eig, n, ERROR_METER_BUDGET)?;
    let (f1, f2, f12) = (decompose(t1)?, decompose(t2)?, decompose(t1 + t2)?);
    projected_norm(eig, n, |_, s| {
        let mut a = apply_factored(qho, &f1, &apply_factored(qho, &f2, s)?)?;
        a.axpy(C64::new(-1.0, 0.0), &apply_factored(qho, &f12, s)?);
        Ok(a)
    })
}

/// Default finite-difference step of [`residual_generator_norm`].
pub const RESIDUAL_STEP: f64 = 1e-5;

/// `‖Π_N (Ṽ(t)⁻¹ dṼ/dt + iH̄) Π_N‖` by central differences with one
/// Richardson step (`h = 1e-5` and `h/2`).
pub fn residual_generator_norm(qho: &DiscreteQho, eig: &EigenDecomposition, n: usize, t: f64) -> Result<f64> {
    check_meter_budget(qho, eig, n, RESIDUAL_BUDGET)?;
    if t.abs() >= FRAC_PI_2 - 0.1 {
        return Err(Error::InvalidArgument(format!(
            "|t| must stay below π/2 − 0.1 for the generator residual, got {t}"
        )));
    }
    let h = RESIDUAL_STEP;
    let adj = decompose(t)?.adjoint();
    let diff = |s: &StateVector, step: f64| -> Result<StateVector> {
        let mut d = evolve(qho, t + step, s)?;
        d.axpy(C64::new(-1.0, 0.0), &evolve(qho, t - step, s)?);
        d.scale(C64::new(1.0 / (2.0 * step), 0.0));
        Ok(d)
    };
    projected_norm(eig, n, |k, s| {
        let coarse = diff(s, h)?;
        let mut fine = diff(s, h / 2.0)?;
        fine.scale(C64::new(4.0 / 3.0, 0.0));
        fine.axpy(C64::new(-1.0 / 3.0, 0.0), &coarse);
        let mut r = apply_factored(qho, &adj, &fine)?;
        r.axpy(C64::new(0.0, eig.energies[k]), s);
        Ok(r)
    })
}
