//! Smooth window `g_n` confining Plancherel–Rotach states to the
//! oscillatory region, built by integrating a compact bump.

use alloc::vec::Vec;

/// Order of the Gauss–Legendre rule used for the bump integral.
pub const QUADRATURE_ORDER: usize = 64;

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton iteration on the
/// Legendre three-term recurrence).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; order];
    let mut weights = alloc::vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Window `g_n(x)`: 1 on `|x| ≤ x_max`, 0 beyond `x_max + 2δ`, and the
/// normalized running integral of `e^{−1/(1−(u/δ)²)}` across the band.
#[derive(Debug, Clone)]
pub struct WindowFunction {
    n: usize,
    x_max: f64,
    delta: f64,
    norm: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl WindowFunction {
    /// Window for degree `n`: `x_max = √((3/4)(2n+1))`, `δ = 1/(20√(2n+1))`.
    pub fn new(n: usize) -> Self {
        let s = (2.0 * n as f64 + 1.0).sqrt();
        let (nodes, weights) = gauss_legendre(QUADRATURE_ORDER);
        let mut w = Self {
            n,
            x_max: (0.75 * (2.0 * n as f64 + 1.0)).sqrt(),
            delta: 1.0 / (20.0 * s),
            norm: 1.0,
            nodes,
            weights,
        };
        w.norm = 2.0 * w.half_integral(0.0);
        w
    }

    /// Degree `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Inner edge of the transition band.
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Half-width of the transition band.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `∫_{−δ}^{s} e^{−1/(1−(u/δ)²)} du`. The upper half uses the bump's
    /// symmetry so every quadrature spans at most half the support, which
    /// keeps the result monotone in `s` to rounding.
    fn bump_integral(&self, s: f64) -> f64 {
        if s > 0.0 {
            self.norm - self.half_integral(-s)
        } else {
            self.half_integral(s)
        }
    }

    /// `∫_{−δ}^{s}` for `s ≤ 0`.
    fn half_integral(&self, s: f64) -> f64 {
        let d = self.delta;
        let s = s.clamp(-d, 0.0);
        if s <= -d {
            return 0.0;
        }
        let (half, mid) = ((s + d) / 2.0, (s - d) / 2.0);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| {
                let u = (half * z + mid) / d;
                w * (-1.0 / (1.0 - u * u)).exp()
            })
            .sum::<f64>()
    }

    /// `g_n(x) ∈ [0, 1]`.
    pub fn value(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.x_max {
            1.0
        } else if ax >= self.x_max + 2.0 * self.delta {
            0.0
        } else {
            (self.bump_integral(self.x_max + self.delta - ax) / self.norm).clamp(0.0, 1.0)
        }
    }
}

/// One-shot `g_n(x)`.
pub fn window_value(n: usize, x: f64) -> f64 {
    WindowFunction::new(n).value(x)
}
