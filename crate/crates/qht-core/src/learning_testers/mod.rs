//! Learning and testing over the Gaussian measure.
//!
//! The module provides:
//! - Monte-Carlo estimation of prefix weights `W^S(f)`, cross-checked by
//!   quadrature of the restricted coefficients;
//! - the Gaussian Goldreich–Levin learner, with classical and
//!   sample-backed weight sources;
//! - tolerant testers for product-sign functions, low-degree functions and
//!   single Hermite polynomials;
//! - the decay fit of the univariate sign spectrum.

mod decay;
mod ggl;
mod testers;
mod weights;

#[cfg(test)]
mod tests;

pub use decay::{sign_spectrum_decay, DecayFit};
pub use ggl::{
    audit, gaussian_goldreich_levin, gaussian_goldreich_levin_sampled, sampled_pool_size, GglAudit, GglConfig, GglMode,
    GglOutcome,
};
pub use testers::{
    test_hermite_polynomial, test_low_degree, test_product_sign, HermiteSource, TesterConfig, TesterVerdict, Witness,
};
pub use weights::{
    child_weights, empirical_bernstein, estimate_gamma_sq, median_of_means, mom_groups, restriction_coefficient,
    weight_estimate, weight_sample_count, CoefficientPattern, WeightEstimate, RESTRICTION_BUDGET_BITS,
};
