//! Classical simulation of the discrete quantum Hermite transform.
//!
//! The crate builds the `M`-point discretized quantum harmonic oscillator,
//! realizes its time evolution through the closed-form three/five-factor
//! product of position and momentum phases, and composes the transform
//! `Σ α_n |n⟩ ↦ Σ α_n |ψ̄_n⟩` out of Plancherel–Rotach state preparation,
//! phase-estimation filtering, fixed-point amplitude amplification and
//! index uncomputation. On top of the transform sit Hermite-spectrum
//! samplers for functions over the Gaussian measure, Monte-Carlo weight
//! estimators, the Gaussian Goldreich–Levin learner and three tolerant
//! property testers.
//!
//! Everything is `no_std` + `alloc`. Discrete Fourier transforms are routed
//! through the [`spectral_core::FftBackend`] trait; the crate ships an exact
//! dense backend, and the `qht` companion crate plugs in a fast one.

#![cfg_attr(not(test), no_std)]
#![cfg_attr(test, allow(unused_imports))]
// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod discrete_qho;
pub mod error;
pub mod fast_forward;
pub mod hermite_sampling;
pub mod learning_testers;
pub mod linalg;
pub mod qht_pipeline;
pub mod spectral_core;

pub use error::{Error, Result};

/// Complex double-precision scalar used for every amplitude.
pub type C64 = num_complex::Complex<f64>;
