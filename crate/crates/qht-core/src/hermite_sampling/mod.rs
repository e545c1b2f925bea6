//! Hermite analysis of functions over the standard Gaussian measure.
//!
//! A function `f: ℝⁿ → [−1, 1]` expands as `f = Σ_v f̂(v)·h_v` in the
//! orthonormal probabilist Hermite basis. This module provides:
//! - the basis itself and its link to the oscillator eigenfunctions;
//! - black-box functions with precision metadata, plus a planted corpus;
//! - grid quadrature for single coefficients and whole spectrum tables,
//!   each with a Richardson error estimate;
//! - boolean and general (postselected) Hermite samplers driven by a
//!   per-axis inverse transform, either the exact discrete Hermite states
//!   or the simulated transform pipeline.

mod basis;
mod function;
mod quadrature;
mod sampler;


pub use basis::{
    gaussian_density, hermite_multi, hermite_poly, probabilist_hermite, quadrature_weights, weighted_hermite,
};
pub use function::{planted, sign, AxisEvaluator, Evaluator, OracleFunction, PlantedFunction};
pub use quadrature::{
    coefficient_oracle, contract, distortion, grid_values, product_hybrid_bound, spectrum_table, sup_ratio_distortion,
    truncation_mass, CoefficientEstimate, SpectrumTable, FULL_GRID_BUDGET_BITS,
};
pub use sampler::{
    boolean_hermite_sample, general_hermite_sample, sampler_distribution, suggest_grid_size, tv_between, tv_distance,
    AxisTransform, HermiteSample, HermiteSampler, Histogram, PostselectedSample, SampleOutcome, SamplerDistribution,
    TransformPath, ATTEMPT_CAP_FACTOR, SAMPLER_GRID_BUDGET_BITS,
};
