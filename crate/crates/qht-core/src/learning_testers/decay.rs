//! Decay of the univariate sign spectrum.
//!
//! `sgn` is odd, so its even coefficients vanish. The odd ones shrink
//! steadily; the fit reports the largest rate `c` with
//! `|f̂(k)| ≤ e^{−c·k}` for every odd `k ≤ k_max`, together with a
//! least-squares slope of `ln|f̂(k)|` against `k` for reference.

use alloc::vec::Vec;

use crate::hermite_sampling::{planted, spectrum_table};
use crate::Result;

/// Sign coefficients and their decay fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// `f̂(k)` for `k = 0..=k_max`.
    pub coeffs: Vec<f64>,
    /// Largest `|f̂(k)|` over even `k`.
    pub even_max: f64,
    /// `c = min_{odd k} (−ln|f̂(k)|/k)`.
    pub rate: f64,
    /// Least-squares slope of `ln|f̂(k)|` over odd `k`.
    pub slope: f64,
    /// Richardson error of the quadrature.
    pub quadrature_error: f64,
}

/// Computes the sign spectrum up to `k_max` with `m_quad` nodes and fits
/// the decay.
pub fn sign_spectrum_decay(k_max: usize, m_quad: usize) -> Result<DecayFit> {
    let f = planted::sign_threshold(0.0).function;
    let table = spectrum_table(&f, k_max, m_quad)?;
    let coeffs = table.coeffs.clone();
    let even_max = coeffs.iter().step_by(2).fold(0.0f64, |m, c| m.max(c.abs()));
    let odd: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .step_by(2)
        .map(|(k, c)| (k as f64, c.abs().ln()))
        .collect();
    let rate = odd.iter().map(|(k, l)| -l / k).fold(f64::INFINITY, f64::min);
    let n = odd.len() as f64;
    let (sx, sy) = odd.iter().fold((0.0, 0.0), |(a, b), (k, l)| (a + k, b + l));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = odd.iter().fold((0.0, 0.0), |(a, b), (k, l)| {
        (a + (k - mx) * (l - my), b + (k - mx) * (k - mx))
    });
    Ok(DecayFit {
        coeffs,
        even_max,
        rate,
        slope: sxy / sxx,
        quadrature_error: table.error,
    })
}
