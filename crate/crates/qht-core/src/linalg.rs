//! Small dense linear-algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::C64;

/// Column-major complex matrix from a list of equal-length columns.
pub fn from_columns(cols: &[Vec<C64>]) -> DMatrix<C64> {
    let rows = cols.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r])
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Spectral (operator 2-) norm of a complex matrix.
pub fn spectral_norm(a: &DMatrix<C64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Gram matrix `G_kl = ⟨v_k|v_l⟩` of a family of vectors.
pub fn gram(vectors: &[Vec<C64>]) -> DMatrix<C64> {
    let n = vectors.len();
    DMatrix::from_fn(n, n, |k, l| crate::spectral_core::inner(&vectors[k], &vectors[l]))
}

/// Löwdin symmetric orthogonalization: returns `V·G^{−1/2}` as columns.
///
/// Among all orthonormal families spanning the same subspace this one is
/// closest to the input in Frobenius norm.
pub fn lowdin(vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let g = gram(vectors);
    let eig = g.symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
    let q = &eig.eigenvectors;
    let g_inv_sqrt = q * inv_sqrt * q.adjoint();
    let v = from_columns(vectors);
    let out = v * g_inv_sqrt;
    (0..out.ncols())
        .map(|c| out.column(c).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.5, 0.0),
            C64::new(0.0, -2.0),
        ]));
        assert!((spectral_norm(&a) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lowdin_orthonormalizes() {
        let v = vec![
            vec![C64::new(1.0, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.1, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.2)],
        ];
        let w = lowdin(&v);
        let g = gram(&w);
        for k in 0..2 {
            for l in 0..2 {
                let e = if k == l { 1.0 } else { 0.0 };
                assert!((g[(k, l)] - C64::new(e, 0.0)).norm() < 1e-13);
            }
        }
    }
}
