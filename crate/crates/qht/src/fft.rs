//! `rustfft`-backed discrete Fourier transforms.

use std::sync::Arc;

use qht_core::spectral_core::{Fft, FftBackend};
use qht_core::C64;
use rustfft::FftPlanner;

/// Planned forward and backward transforms of one length.
pub struct RustFftBackend {
    len: usize,
    forward: Arc<dyn rustfft::Fft<f64>>,
    backward: Arc<dyn rustfft::Fft<f64>>,
}

impl RustFftBackend {
    /// Plans both directions for length `m`.
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len: m,
            forward: planner.plan_fft_forward(m),
            backward: planner.plan_fft_inverse(m),
        }
    }
}

impl std::fmt::Debug for RustFftBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RustFftBackend").field("len", &self.len).finish()
    }
}

impl FftBackend for RustFftBackend {
    fn len(&self) -> usize {
        self.len
    }

    fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    fn backward(&self, buf: &mut [C64]) {
        self.backward.process(buf);
    }
}

/// Shared handle to a [`RustFftBackend`] of length `m`.
pub fn rustfft_backend(m: usize) -> Fft {
    Arc::new(RustFftBackend::new(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qht_core::spectral_core::DenseDft;

    #[test]
    fn agrees_with_the_dense_transform() {
        for m in [8usize, 96, 100, 256] {
            let input: Vec<C64> = (0..m)
                .map(|s| C64::new((0.37 * s as f64).sin(), (1.3 * s as f64).cos()))
                .collect();
            let dense = DenseDft::new(m);
            let fast = RustFftBackend::new(m);
            assert_eq!(fast.len(), m);
            for inverse in [false, true] {
                let (mut a, mut b) = (input.clone(), input.clone());
                if inverse {
                    dense.backward(&mut a);
                    fast.backward(&mut b);
                } else {
                    dense.forward(&mut a);
                    fast.forward(&mut b);
                }
                let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                assert!(err < 1e-10 * m as f64, "m = {m}, inverse = {inverse}: {err}");
            }
        }
    }
}
