//! Plancherel–Rotach states: windowed oscillatory approximations of `ψ_n`
//! that can be prepared from closed-form amplitude and phase oracles.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::window::WindowFunction;
use crate::spectral_core::{hermite_functions, GridSpec, StateVector};
use crate::{Error, Result};

/// Constant standing in for `ψ_0` on its window (`ψ_0(0) = π^{−1/4} ≈ 0.75`).
pub const GROUND_STATE_CONSTANT: f64 = 0.75;

/// Half-width `J(n) = ⌈√((3/4)(2n+1)M/(2π))⌉` of the support in grid labels.
pub fn support_half_width(n: usize, m: usize) -> usize {
    (0.75 * (2.0 * n as f64 + 1.0) * m as f64 / (2.0 * PI)).sqrt().ceil() as usize
}

/// Optional `r`-bit rounding of the amplitude and phase oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleRounding {
    /// Exact evaluation.
    #[default]
    Exact,
    /// Amplitudes rounded to `r` bits relative to their maximum; phases
    /// rounded to multiples of `2π/2^r`.
    Bits(u32),
}

impl OracleRounding {
    fn amplitude(self, a: f64, a_max: f64) -> f64 {
        match self {
            Self::Exact => a,
            Self::Bits(r) => {
                let q = libm::ldexp(1.0, r as i32);
                (a / a_max * q).round() / q * a_max
            }
        }
    }

    fn phase(self, theta: f64) -> f64 {
        match self {
            Self::Exact => theta,
            Self::Bits(r) => {
                let q = libm::ldexp(1.0, r as i32) / (2.0 * PI);
                (theta * q).round() / q
            }
        }
    }
}

/// Continuum PR amplitude `φ_n(x)` (without window rounding):
/// `2^{1/4}/(√π n^{1/4}) · g_n(x)/√(sin φ) · sin[(n/2+1/4)(sin 2φ − 2φ) + 3π/4]`
/// with `φ = arccos(x/√(2n+1))`; `n = 0` uses `0.75·g_0(x)`.
pub fn pr_amplitude(window: &WindowFunction, x: f64) -> f64 {
    pr_amplitude_rounded(window, x, OracleRounding::Exact, 1.0)
}

fn envelope(n: usize, x: f64) -> f64 {
    let phi = (x / (2.0 * n as f64 + 1.0).sqrt()).acos();
    1.0 / phi.sin().sqrt()
}

fn pr_phase(n: usize, x: f64) -> f64 {
    let phi = (x / (2.0 * n as f64 + 1.0).sqrt()).acos();
    (n as f64 / 2.0 + 0.25) * ((2.0 * phi).sin() - 2.0 * phi) + 0.75 * PI
}

fn prefactor(n: usize) -> f64 {
    libm::pow(2.0, 0.25) / (PI.sqrt() * libm::pow(n as f64, 0.25))
}

fn pr_amplitude_rounded(window: &WindowFunction, x: f64, r: OracleRounding, a_max: f64) -> f64 {
    let n = window.n();
    let g = window.value(x);
    if g == 0.0 {
        return 0.0;
    }
    if n == 0 {
        return r.amplitude(GROUND_STATE_CONSTANT * g, a_max);
    }
    let a = prefactor(n) * g * envelope(n, x);
    r.amplitude(a, a_max) * r.phase(pr_phase(n, x)).sin()
}

/// A PR state on the grid, stored unnormalized (amplitudes `√h·φ_n(x_j)`)
/// together with its norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PlancherelRotachState {
    /// Degree.
    pub n: usize,
    /// Support half-width `J(n)`: labels `[−J, J−1]`.
    pub half_width: usize,
    /// Real amplitudes over the full grid.
    pub amps: Vec<f64>,
    /// 2-norm of `amps`.
    pub norm: f64,
}

impl PlancherelRotachState {
    /// Normalized complex state.
    pub fn normalized(&self) -> StateVector {
        let s = 1.0 / self.norm;
        let v: Vec<f64> = self.amps.iter().map(|a| a * s).collect();
        StateVector::from_real(&v)
    }

    /// `max_j |φ_n(x_j)|` in continuum units (the `√h` removed).
    pub fn max_abs_continuum(&self, spec: &GridSpec) -> f64 {
        let rh = spec.h().sqrt();
        self.amps.iter().fold(0.0f64, |m, a| m.max(a.abs())) / rh
    }
}

/// Builds the PR state of degree `n` on a grid of dimension `m`.
pub fn build_pr_state_on(n: usize, spec: &GridSpec, rounding: OracleRounding) -> Result<PlancherelRotachState> {
    let m = spec.m();
    let j = support_half_width(n, m);
    if j >= m / 2 {
        return Err(Error::InvalidSpec(format!(
            "PR support J({n}) = {j} does not fit strictly inside M = {m}"
        )));
    }
    let window = WindowFunction::new(n);
    // Largest envelope on the support, the reference for amplitude rounding.
    let a_max = if n == 0 {
        GROUND_STATE_CONSTANT
    } else {
        let edge = (window.x_max() + 2.0 * window.delta()).min((2.0 * n as f64 + 1.0).sqrt());
        prefactor(n) * envelope(n, edge)
    };
    let rh = spec.h().sqrt();
    let mut amps = alloc::vec![0.0; m];
    for label in -(j as i64)..(j as i64) {
        amps[spec.offset(label)] = rh * pr_amplitude_rounded(&window, spec.x(label), rounding, a_max);
    }
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidSpec(format!(
            "PR state of degree {n} vanishes on the grid (M = {m} too coarse)"
        )));
    }
    Ok(PlancherelRotachState {
        n,
        half_width: j,
        amps,
        norm,
    })
}

/// One point of the overlap curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapPoint {
    /// Degree.
    pub n: usize,
    /// `⟨ψ̄_n|φ̄_n⟩` with the PR state in its native normalization.
    pub raw: f64,
    /// `⟨ψ̄_n|φ̄_n⟩/‖φ̄_n‖`.
    pub normalized: f64,
}

/// Overlaps `⟨ψ̄_n|φ̄_n⟩` for `n ∈ ns` on a grid of dimension `m`.
///
/// Only the support of each PR state is visited, so large `M` (e.g. `10⁵`)
/// is cheap: the Hermite functions are evaluated pointwise there.
pub fn overlap_curve(m: usize, ns: &[usize]) -> Result<Vec<OverlapPoint>> {
    let spec = GridSpec::new(m)?;
    let h = spec.h();
    let n_top = ns.iter().copied().max().unwrap_or(0);
    let mut psi = alloc::vec![0.0; n_top + 1];
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let j = support_half_width(n, m) as i64;
        if j >= (m / 2) as i64 {
            return Err(Error::InvalidSpec(format!(
                "PR support J({n}) = {j} does not fit strictly inside M = {m}"
            )));
        }
        let window = WindowFunction::new(n);
        let (mut ov, mut nn) = (0.0, 0.0);
        for label in -j..j {
            let x = spec.x(label);
            let phi = pr_amplitude(&window, x);
            if phi == 0.0 {
                continue;
            }
            hermite_functions(x, n, &mut psi[..=n]);
            ov += psi[n] * phi;
            nn += phi * phi;
        }
        let raw = h * ov;
        out.push(OverlapPoint {
            n,
            raw,
            normalized: raw / (h * nn).sqrt(),
        });
    }
    Ok(out)
}
