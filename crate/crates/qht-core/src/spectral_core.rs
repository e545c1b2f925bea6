//! Grids, statevectors, Hermite functions and the centered DFT.
//!
//! The position grid has `M` points `x_j = j·h`, `h = √(2π/M)`, with signed
//! labels `j ∈ [−M/2, M/2)`. Vectors store label `j` at offset `j + M/2`;
//! the signed label is the public vocabulary and offsets never leak out of
//! this module except through [`GridSpec::offset`].
//!
//! The centered DFT is `F_jk = e^{i2πjk/M}/√M` on signed labels. It is
//! evaluated by relabeling around a standard (unnormalized, 0-based) DFT
//! supplied by an [`FftBackend`]; [`DenseDft`] is an exact `O(M²)` backend
//! and doubles as the reference implementation.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result, C64};

/// `π^{−1/4}`, the value of the ground-state Hermite function at the origin.
pub const PI_POW_MINUS_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Geometry of the `M`-point position grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    m: usize,
    h: f64,
}

impl GridSpec {
    /// Validates `M` (even, at least 4) and derives the spacing.
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "grid dimension must be even and at least 4, got {m}"
            )));
        }
        Ok(Self {
            m,
            h: (2.0 * PI / m as f64).sqrt(),
        })
    }

    /// Grid dimension `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Grid spacing `h = √(2π/M)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Smallest label, `−M/2`.
    pub fn min_label(&self) -> i64 {
        -((self.m / 2) as i64)
    }

    /// Largest label, `M/2 − 1`.
    pub fn max_label(&self) -> i64 {
        (self.m / 2) as i64 - 1
    }

    /// Storage offset of label `j`.
    pub fn offset(&self, j: i64) -> usize {
        (j - self.min_label()) as usize
    }

    /// Signed label stored at `offset`.
    pub fn label(&self, offset: usize) -> i64 {
        offset as i64 + self.min_label()
    }

    /// Grid point `x_j = j·h`.
    pub fn x(&self, j: i64) -> f64 {
        j as f64 * self.h
    }

    /// Labels in storage order.
    pub fn labels(&self) -> impl Iterator<Item = i64> {
        self.min_label()..=self.max_label()
    }

    /// Largest grid magnitude `|x_{−M/2}| = √(πM/2)`.
    pub fn x_max(&self) -> f64 {
        (PI * self.m as f64 / 2.0).sqrt()
    }
}

/// Grid points `x_j` for every label in storage order.
pub fn grid_points(spec: &GridSpec) -> Vec<f64> {
    spec.labels().map(|j| spec.x(j)).collect()
}

/// Complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    /// Amplitudes in storage order.
    pub amps: Vec<C64>,
}

impl StateVector {
    /// Wraps raw amplitudes.
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    /// The zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self {
            amps: vec![C64::new(0.0, 0.0); dim],
        }
    }

    /// Standard basis vector at storage offset `idx`.
    pub fn basis(dim: usize, idx: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[idx] = C64::new(1.0, 0.0);
        v
    }

    /// Real amplitudes promoted to complex.
    pub fn from_real(values: &[f64]) -> Self {
        Self {
            amps: values.iter().map(|&r| C64::new(r, 0.0)).collect(),
        }
    }

    /// Number of amplitudes.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Euclidean norm `√(Σ|a|²)`.
    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// Multiplies every amplitude by `s`.
    pub fn scale(&mut self, s: C64) {
        self.amps.iter_mut().for_each(|a| *a *= s);
    }

    /// `self ← self + s·other`.
    pub fn axpy(&mut self, s: C64, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += s * b;
        }
    }

    /// Returns `self / ‖self‖` (the zero vector is returned unchanged).
    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        let mut out = self.clone();
        out.scale(C64::new(1.0 / n, 0.0));
        out
    }
}

/// Euclidean norm of an amplitude slice (scaled to avoid overflow).
pub fn norm(v: &[C64]) -> f64 {
    let big = v.iter().fold(0.0_f64, |m, a| m.max(a.norm()));
    if big == 0.0 || !big.is_finite() {
        return big;
    }
    let s: f64 = v.iter().map(|a| (a / big).norm_sqr()).sum();
    big * s.sqrt()
}

/// `⟨u|v⟩ = Σ conj(u_i) v_i`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Orthonormal Hermite functions `ψ_0(x), …, ψ_{n_max}(x)` at a single point.
///
/// Uses the normalized recurrence
/// `ψ_{n+1} = √(2/(n+1))·x·ψ_n − √(n/(n+1))·ψ_{n−1}` seeded with the
/// Gaussian factor pulled out as an exponent, so neither the factorial growth
/// of `H_n` nor the underflow of `e^{−x²/2}` at large `|x|` loses the
/// oscillatory region of high-degree functions.
pub fn hermite_functions(x: f64, n_max: usize, out: &mut [f64]) {
    debug_assert!(out.len() > n_max);
    // Stored values are ψ_n(x)·e^{scale}; scale starts at x²/2.
    const RESCALE: f64 = 1e150;
    let ln_rescale = RESCALE.ln();
    let mut scale = 0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = PI_POW_MINUS_QUARTER;
    out[0] = emit(cur, scale);
    for n in 0..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            scale -= ln_rescale;
        }
        out[n + 1] = emit(cur, scale);
    }
}

fn emit(stored: f64, scale: f64) -> f64 {
    if stored == 0.0 {
        return 0.0;
    }
    // ψ = stored·e^{−scale}; combine in the log domain to dodge overflow of
    // e^{scale} while the Gaussian is still pulled out.
    let lg = stored.abs().ln() - scale;
    let mag = if lg < -745.0 { 0.0 } else { lg.exp() };
    if stored < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Table of `ψ_n(x_j)` for `n ∈ [0, n_max]` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable {
    n_max: usize,
    spec: GridSpec,
    values: Vec<f64>,
}

impl HermiteTable {
    /// Highest tabulated degree.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Grid the table was built on.
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Row `n`: values `ψ_n(x_j)` in storage order.
    pub fn row(&self, n: usize) -> &[f64] {
        let m = self.spec.m();
        &self.values[n * m..(n + 1) * m]
    }

    /// `ψ_n(x_j)` by signed label.
    pub fn get(&self, n: usize, j: i64) -> f64 {
        self.row(n)[self.spec.offset(j)]
    }
}

/// Tabulates `ψ_n(x_j)` for all `n ≤ n_max` and every grid label.
pub fn hermite_table(n_max: usize, spec: &GridSpec) -> HermiteTable {
    let m = spec.m();
    let mut values = vec![0.0; (n_max + 1) * m];
    let mut col = vec![0.0; n_max + 1];
    for (off, j) in spec.labels().enumerate() {
        hermite_functions(spec.x(j), n_max, &mut col);
        for (n, v) in col.iter().enumerate() {
            values[n * m + off] = *v;
        }
    }
    HermiteTable {
        n_max,
        spec: *spec,
        values,
    }
}

/// An unnormalized, 0-based discrete Fourier transform of one fixed length.
///
/// `forward` computes `y_k = Σ_s x_s e^{−2πi sk/M}` and `backward` the same
/// with `e^{+2πi sk/M}`, both in place.
pub trait FftBackend: Send + Sync {
    /// Transform length.
    fn len(&self) -> usize;
    /// Whether the transform has length zero.
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// In-place forward transform.
    fn forward(&self, buf: &mut [C64]);
    /// In-place backward transform.
    fn backward(&self, buf: &mut [C64]);
}

/// Exact `O(M²)` DFT with an integer-reduced twiddle table.
#[derive(Debug, Clone)]
pub struct DenseDft {
    twiddles: Vec<C64>,
}

impl DenseDft {
    /// Precomputes `e^{2πi k/M}` for `k ∈ [0, M)`.
    pub fn new(m: usize) -> Self {
        let twiddles = (0..m)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / m as f64;
                C64::new(th.cos(), th.sin())
            })
            .collect();
        Self { twiddles }
    }

    fn apply(&self, buf: &mut [C64], sign: i64) {
        let m = self.twiddles.len();
        let input = buf.to_vec();
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (s, x) in input.iter().enumerate() {
                let idx = ((s * k) % m) as i64 * sign;
                acc += x * self.twiddles[idx.rem_euclid(m as i64) as usize];
            }
            *out = acc;
        }
    }
}

impl FftBackend for DenseDft {
    fn len(&self) -> usize {
        self.twiddles.len()
    }

    fn forward(&self, buf: &mut [C64]) {
        self.apply(buf, -1);
    }

    fn backward(&self, buf: &mut [C64]) {
        self.apply(buf, 1);
    }
}

/// Shared handle to a backend.
pub type Fft = Arc<dyn FftBackend>;

/// Default backend for length `m` (the exact dense transform).
pub fn default_fft(m: usize) -> Fft {
    Arc::new(DenseDft::new(m))
}

/// In-place centered DFT (`inverse = false`) or its inverse `F⁻¹ = F†`.
///
/// With storage offsets `s = j + M/2`, `F = (−1)^{M/2}·D·B·D/√M` where
/// `D = diag((−1)^s)` and `B` is the unnormalized backward DFT.
pub fn centered_dft_in_place(fft: &dyn FftBackend, buf: &mut [C64], inverse: bool) -> Result<()> {
    let m = buf.len();
    if fft.len() != m {
        return Err(Error::DimensionMismatch {
            expected: fft.len(),
            got: m,
        });
    }
    checkerboard(buf);
    if inverse {
        fft.forward(buf);
    } else {
        fft.backward(buf);
    }
    let mut s = 1.0 / (m as f64).sqrt();
    if (m / 2) % 2 == 1 {
        s = -s;
    }
    for (i, a) in buf.iter_mut().enumerate() {
        *a *= if i % 2 == 0 { s } else { -s };
    }
    Ok(())
}

fn checkerboard(buf: &mut [C64]) {
    buf.iter_mut().skip(1).step_by(2).for_each(|a| *a = -*a);
}

/// Centered DFT of a statevector, returning a new vector.
pub fn centered_dft(fft: &dyn FftBackend, state: &StateVector, spec: &GridSpec, inverse: bool) -> Result<StateVector> {
    if state.dim() != spec.m() {
        return Err(Error::DimensionMismatch {
            expected: spec.m(),
            got: state.dim(),
        });
    }
    let mut out = state.clone();
    centered_dft_in_place(fft, &mut out.amps, inverse)?;
    Ok(out)
}

/// Dense centered DFT matrix `F_jk = e^{i2πjk/M}/√M` in row-major storage
/// order (reference oracle for small `M`).
pub fn dense_centered_dft_matrix(spec: &GridSpec) -> Vec<C64> {
    let m = spec.m();
    let mut f = vec![C64::new(0.0, 0.0); m * m];
    let norm = 1.0 / (m as f64).sqrt();
    for (r, j) in spec.labels().enumerate() {
        for (c, k) in spec.labels().enumerate() {
            let e = (j * k).rem_euclid(m as i64) as f64;
            let th = 2.0 * PI * e / m as f64;
            f[r * m + c] = C64::new(th.cos(), th.sin()) * norm;
        }
    }
    f
}

/// Multiplies amplitude `j` by `e^{−i·phase_j}`.
pub fn apply_diagonal_phase(state: &StateVector, phases: &[f64]) -> Result<StateVector> {
    if phases.len() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: phases.len(),
        });
    }
    let mut out = state.clone();
    apply_diagonal_phase_in_place(&mut out.amps, phases);
    Ok(out)
}

/// In-place form of [`apply_diagonal_phase`]; lengths must already agree.
pub fn apply_diagonal_phase_in_place(amps: &mut [C64], phases: &[f64]) {
    for (a, &p) in amps.iter_mut().zip(phases) {
        let (s, c) = p.sin_cos();
        *a *= C64::new(c, -s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn grid_points_small() {
        let spec = GridSpec::new(4).unwrap();
        let xs = grid_points(&spec);
        let step = (PI / 2.0).sqrt();
        let expect = [-2.0 * step, -step, 0.0, step];
        for (a, b) in xs.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let spec8 = GridSpec::new(8).unwrap();
        assert_eq!(spec8.x(0), 0.0);
        // √(2π/2048) evaluated in extended precision.
        let spec2048 = GridSpec::new(2048).unwrap();
        assert!((spec2048.x(1) - 0.055_389_182_840_797_38).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_dimension() {
        assert!(GridSpec::new(7).is_err());
        assert!(GridSpec::new(2).is_err());
    }

    #[test]
    fn grid_spacing_identity() {
        for m in [4usize, 8, 64, 1024, 100_000] {
            let s = GridSpec::new(m).unwrap();
            let lhs = s.h() * m as f64;
            let rhs = (2.0 * PI * m as f64).sqrt();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn hermite_values_at_origin() {
        let spec = GridSpec::new(64).unwrap();
        let t = hermite_table(6, &spec);
        assert!((t.get(0, 0) - PI_POW_MINUS_QUARTER).abs() < 1e-15);
        assert_eq!(t.get(1, 0), 0.0);
    }

    #[test]
    fn hermite_quadrature_normalization() {
        let spec = GridSpec::new(512).unwrap();
        let t = hermite_table(3, &spec);
        let s: f64 = t.row(3).iter().map(|v| v * v).sum::<f64>() * spec.h();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hermite_high_degree_stays_bounded() {
        // Deep in the oscillatory region of ψ_3000, where e^{−x²/2} alone
        // underflows.
        let mut out = vec![0.0; 3001];
        for x in [0.3, 20.0, 45.0, 70.0, 77.0] {
            hermite_functions(x, 3000, &mut out);
            assert!(out.iter().all(|v| v.is_finite() && v.abs() <= 1.1));
        }
        hermite_functions(50.0, 3000, &mut out);
        assert!(out[3000].abs() > 1e-3);
    }

    #[test]
    fn dft_of_delta_at_origin_is_uniform() {
        let spec = GridSpec::new(16).unwrap();
        let fft = default_fft(16);
        let v = StateVector::basis(16, spec.offset(0));
        let w = centered_dft(fft.as_ref(), &v, &spec, false).unwrap();
        for a in &w.amps {
            assert!(close(*a, C64::new(0.25, 0.0), 1e-15));
        }
    }

    #[test]
    fn dft_of_delta_at_one_matches_dense_oracle() {
        let spec = GridSpec::new(8).unwrap();
        let fft = default_fft(8);
        let v = StateVector::basis(8, spec.offset(1));
        let w = centered_dft(fft.as_ref(), &v, &spec, false).unwrap();
        for k in spec.labels() {
            let th = 2.0 * PI * k as f64 / 8.0;
            let expect = C64::new(th.cos(), th.sin()) / 8f64.sqrt();
            assert!(close(w.amps[spec.offset(k)], expect, 1e-15));
        }
    }

    #[test]
    fn diagonal_phase_examples() {
        let spec = GridSpec::new(8).unwrap();
        let v = StateVector::new((0..8).map(|i| C64::new(i as f64, 1.0)).collect());
        assert_eq!(apply_diagonal_phase(&v, &[0.0; 8]).unwrap(), v);
        let w = apply_diagonal_phase(&v, &[PI; 8]).unwrap();
        for (a, b) in w.amps.iter().zip(&v.amps) {
            assert!(close(*a, -b, 1e-14));
        }
        let xs = grid_points(&spec);
        let ph: Vec<f64> = xs.iter().map(|x| 0.5 * x * x).collect();
        let w = apply_diagonal_phase(&v, &ph).unwrap();
        for (i, x) in xs.iter().enumerate() {
            let e = C64::new(0.0, -x * x / 2.0).exp();
            assert!(close(w.amps[i], e * v.amps[i], 1e-14));
        }
        assert!(apply_diagonal_phase(&v, &[0.0; 3]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let spec = GridSpec::new(8).unwrap();
        let fft = default_fft(8);
        let v = StateVector::zeros(6);
        assert!(centered_dft(fft.as_ref(), &v, &spec, false).is_err());
    }
}
