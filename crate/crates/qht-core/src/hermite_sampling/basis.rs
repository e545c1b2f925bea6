//! Orthonormal probabilist Hermite polynomials under the standard normal
//! density, and their exact link to the oscillator eigenfunctions.
//!
//! With `γ(y) = e^{−y²/2}/√(2π)` and `h_k = He_k/√(k!)`,
//! `∫ h_k h_l γ = δ_kl`. The change of variables `y = √2·x` gives
//! `h_k(y)·√γ(y) = 2^{−1/4}·ψ_k(y/√2)`, which lets every Gaussian-measure
//! computation reuse the overflow-safe `ψ_k` recurrence.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::spectral_core::hermite_functions;

/// Standard normal density `γ(y)`.
pub fn gaussian_density(y: f64) -> f64 {
    (-0.5 * y * y).exp() / (2.0 * PI).sqrt()
}

/// `h_0(y), …, h_{k_max}(y)` by `h_{k+1} = (y·h_k − √k·h_{k−1})/√(k+1)`.
pub fn probabilist_hermite(y: f64, k_max: usize, out: &mut [f64]) {
    debug_assert!(out.len() > k_max);
    out[0] = 1.0;
    if k_max >= 1 {
        out[1] = y;
    }
    for k in 1..k_max {
        let kf = k as f64;
        out[k + 1] = (y * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
    }
}

/// `h_k(y)` for a single degree.
pub fn hermite_poly(k: usize, y: f64) -> f64 {
    let mut buf = alloc::vec![0.0; k + 1];
    probabilist_hermite(y, k, &mut buf);
    buf[k]
}

/// `h_v(x) = Π_i h_{v_i}(x_i)`.
pub fn hermite_multi(v: &[usize], x: &[f64]) -> f64 {
    v.iter().zip(x).map(|(&k, &xi)| hermite_poly(k, xi)).product()
}

/// `h_k(y)·√γ(y)` for `k = 0..=k_max` through the oscillator eigenfunctions:
/// `2^{−1/4}·ψ_k(y/√2)`.
pub fn weighted_hermite(y: f64, k_max: usize, out: &mut [f64]) {
    hermite_functions(y / SQRT_2, k_max, out);
    let s = libm::pow(2.0, -0.25);
    out[..=k_max].iter_mut().for_each(|v| *v *= s);
}

/// Per-axis quadrature weights `W[k][j] = h·h_k(y_j)·γ(y_j)` on the
/// midpoint grid `y_j = (j + ½)h`, `j ∈ [−M/2, M/2)`, `h = √(2π/M)`,
/// together with the nodes.
pub fn quadrature_weights(m: usize, k_max: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let h = (2.0 * PI / m as f64).sqrt();
    let half = (m / 2) as i64;
    let nodes: Vec<f64> = (-half..(m as i64 - half)).map(|j| (j as f64 + 0.5) * h).collect();
    let mut w = alloc::vec![alloc::vec![0.0; m]; k_max + 1];
    let mut buf = alloc::vec![0.0; k_max + 1];
    for (j, &y) in nodes.iter().enumerate() {
        weighted_hermite(y, k_max, &mut buf);
        let root = gaussian_density(y).sqrt();
        for k in 0..=k_max {
            w[k][j] = h * buf[k] * root;
        }
    }
    (nodes, w)
}
