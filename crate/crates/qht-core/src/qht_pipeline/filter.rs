//! Phase-estimation eigenstate filter and its inverse, simulated on the
//! work register one ancilla at a time.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::discrete_qho::DiscreteQho;
use crate::fast_forward::{apply_factored, decompose, FactoredEvolution};
use crate::spectral_core::StateVector;
use crate::{Error, Result, C64};

/// Number of ancilla qubits `m = log₂ M`.
pub fn ancilla_count(m: usize) -> Result<u32> {
    if !m.is_power_of_two() {
        return Err(Error::InvalidSpec(alloc::format!(
            "phase estimation needs M to be a power of two, got {m}"
        )));
    }
    Ok(m.trailing_zeros())
}

/// The controlled unitaries `W_{n,j} = Ṽ(t_j)·e^{it_j(n+½)}`,
/// `t_j = 2^j·2π/M`, for `j = 0..m`.
#[derive(Debug, Clone)]
pub struct FilterCircuit {
    /// Target index.
    pub n: usize,
    /// Factored `Ṽ(t_j)`.
    pub evolutions: Vec<FactoredEvolution>,
    /// The scalar phases `e^{it_j(n+½)}`.
    pub phases: Vec<C64>,
}

impl FilterCircuit {
    /// Builds the circuit for index `n` on dimension `m`.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let bits = ancilla_count(m)?;
        let mut evolutions = Vec::with_capacity(bits as usize);
        let mut phases = Vec::with_capacity(bits as usize);
        for j in 0..bits {
            let t = stage_time(j, m);
            evolutions.push(decompose(t)?);
            phases.push(C64::new(0.0, t * (n as f64 + 0.5)).exp());
        }
        Ok(Self { n, evolutions, phases })
    }

    /// Number of stages `m`.
    pub fn stages(&self) -> usize {
        self.evolutions.len()
    }

    /// `W_{n,j}|v⟩`.
    pub fn apply_stage(&self, qho: &DiscreteQho, j: usize, v: &StateVector) -> Result<StateVector> {
        let mut w = apply_factored(qho, &self.evolutions[j], v)?;
        w.scale(self.phases[j]);
        Ok(w)
    }
}

/// `t_j = 2^j·2π/M`.
pub fn stage_time(j: u32, m: usize) -> f64 {
    libm::ldexp(2.0 * PI / m as f64, j as i32)
}

/// Result of the filter: the all-zero-ancilla component and the orthogonal
/// remainder, split by the first ancilla that reads 1.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// Component flagged `|0⟩^{⊗m}` (`≈ β_n|ψ̄_n⟩`).
    pub kept: StateVector,
    /// `leaked[j]`: component whose ancillas `0..j` read 0 and ancilla `j`
    /// reads 1. These live in mutually orthogonal ancilla sectors.
    pub leaked: Vec<StateVector>,
}

impl FilterOutput {
    /// `Σ_j ‖leaked_j‖²`.
    pub fn leaked_norm_sq(&self) -> f64 {
        self.leaked.iter().map(|v| v.norm() * v.norm()).sum()
    }
}

/// Applies `Π_j (I + W_{n,j})/2` stage by stage; stage `j` also emits its
/// `(I − W_{n,j})/2` branch as leaked. Costs `m` factored evolutions.
pub fn eigenstate_filter(qho: &DiscreteQho, circuit: &FilterCircuit, state: &StateVector) -> Result<FilterOutput> {
    let m = qho.spec().m();
    if state.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: state.dim(),
        });
    }
    let mut kept = state.clone();
    let mut leaked = Vec::with_capacity(circuit.stages());
    for j in 0..circuit.stages() {
        let w = circuit.apply_stage(qho, j, &kept)?;
        let mut plus = kept.clone();
        plus.axpy(C64::new(1.0, 0.0), &w);
        plus.scale(C64::new(0.5, 0.0));
        let mut minus = kept;
        minus.axpy(C64::new(-1.0, 0.0), &w);
        minus.scale(C64::new(0.5, 0.0));
        leaked.push(minus);
        kept = plus;
    }
    Ok(FilterOutput { kept, leaked })
}

/// Work-register state of the joint register `Σ_n |n⟩|w_n⟩`, stored by
/// index block.
#[derive(Debug, Clone)]
pub struct JointState {
    /// `blocks[n] = |w_n⟩`.
    pub blocks: Vec<StateVector>,
}

/// Outcome of index uncomputation.
#[derive(Debug, Clone)]
pub struct UncomputeOutput {
    /// Work-register state accompanying index `|0…0⟩`.
    pub work: StateVector,
    /// Mass left on nonzero index values, `‖joint‖² − ‖work‖²`.
    pub index_residual: f64,
}

/// The `|0…0⟩`-index component produced by inverse phase estimation on one
/// block: `Π_j (I + e^{−i2πn2^j/M}·V_j†)/2` with `V_j = Ṽ(t_j)e^{it_j/2}`.
pub fn uncompute_block(qho: &DiscreteQho, n: usize, w: &StateVector) -> Result<StateVector> {
    let m = qho.spec().m();
    let bits = ancilla_count(m)?;
    let mut out = w.clone();
    for j in 0..bits {
        let t = stage_time(j, m);
        let inv = decompose(t)?.adjoint();
        let theta = -2.0 * PI * ((n as u128 * (1u128 << j)) % m as u128) as f64 / m as f64 - t / 2.0;
        let mut v = apply_factored(qho, &inv, &out)?;
        v.scale(C64::new(0.0, theta).exp());
        out.axpy(C64::new(1.0, 0.0), &v);
        out.scale(C64::new(0.5, 0.0));
    }
    Ok(out)
}

/// Inverse phase estimation on the joint register. A residual above the
/// target error is reported through `index_residual`, not raised.
pub fn uncompute_index(qho: &DiscreteQho, joint: &JointState) -> Result<UncomputeOutput> {
    let m = qho.spec().m();
    let mut work = StateVector::zeros(m);
    let mut total = 0.0;
    for (n, w) in joint.blocks.iter().enumerate() {
        total += w.norm() * w.norm();
        work.axpy(C64::new(1.0, 0.0), &uncompute_block(qho, n, w)?);
    }
    let index_residual = (total - work.norm() * work.norm()).max(0.0);
    Ok(UncomputeOutput { work, index_residual })
}
