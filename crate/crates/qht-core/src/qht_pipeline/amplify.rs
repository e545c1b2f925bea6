//! Fixed-point amplitude amplification by quantum singular value
//! transformation.
//!
//! An odd real polynomial `P` with `|P| ≤ 1` on `[−1, 1]` and
//! `P ≥ 1 − ε` on `[δ, 1]` is designed by Lawson's iteratively reweighted
//! least squares in the odd Chebyshev basis. Its phase factors are found by
//! Newton's method on the symmetric phase sequence. Applied to an initial
//! overlap `a ≥ δ`, the circuit maps the flagged amplitude to `P(a)` without
//! overshoot, simultaneously for every block. This is the fixed-point
//! property: only a lower bound on `a` is needed.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Peak of the designed polynomial: `max |P| = 1 − MARGIN` keeps the phase
/// problem strictly inside the unit ball.
pub const MARGIN: f64 = 1e-4;
const DESIGN_GRID: usize = 3000;
const LAWSON_ITERS: usize = 300;
const NEWTON_TOL: f64 = 1e-13;
const NEWTON_ITERS: usize = 100;

/// Smallest odd `L ≥ ln(2/ε)/δ_lower`.
pub fn amplification_degree(delta_lower: f64, eps: f64) -> Result<usize> {
    if !(delta_lower > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "overlap lower bound must be positive, got {delta_lower}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1), got {eps}")));
    }
    let l = ((2.0 / eps).ln() / delta_lower).ceil().max(1.0) as usize;
    Ok(if l % 2 == 0 { l + 1 } else { l })
}

/// `T_k(x)` for `k = 0..=deg` by the three-term recurrence.
fn chebyshev_row(x: f64, deg: usize) -> Vec<f64> {
    let mut t = alloc::vec![0.0; deg + 1];
    t[0] = 1.0;
    if deg >= 1 {
        t[1] = x;
    }
    for k in 2..=deg {
        t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    }
    t
}

/// Odd polynomial in the Chebyshev basis: `P(x) = Σ_k c_k T_{2k+1}(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddPolynomial {
    /// Coefficients of `T_1, T_3, …, T_L`.
    pub coeffs: Vec<f64>,
}

impl OddPolynomial {
    /// Degree `L`.
    pub fn degree(&self) -> usize {
        2 * self.coeffs.len() - 1
    }

    /// `P(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = chebyshev_row(x, self.degree());
        self.coeffs.iter().enumerate().map(|(k, c)| c * t[2 * k + 1]).sum()
    }

    /// `max_{x ∈ [0,1]} |P(x)|` on a dense cosine grid.
    pub fn sup_norm(&self) -> f64 {
        let g = 20_000;
        (0..=g)
            .map(|i| self.eval((FRAC_PI_2 * i as f64 / g as f64).cos()).abs())
            .fold(0.0, f64::max)
    }
}

/// Designs the fixed-point polynomial of odd degree `l` for the band
/// `[delta, 1]`: near-minimax fit of 1, then scaled so `max |P| = 1 − MARGIN`.
/// Returns the polynomial and its worst deficit `1 − min_{[δ,1]} P`.
pub fn design_polynomial(l: usize, delta: f64) -> Result<(OddPolynomial, f64)> {
    if l % 2 == 0 {
        return Err(Error::InvalidArgument(format!("degree must be odd, got {l}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "band edge must lie in (0, 1), got {delta}"
        )));
    }
    let k = l.div_ceil(2);
    let xs: Vec<f64> = (0..DESIGN_GRID)
        .map(|i| {
            let th = PI * i as f64 / (DESIGN_GRID - 1) as f64;
            delta + (1.0 - delta) * (1.0 - th.cos()) / 2.0
        })
        .collect();
    let basis = DMatrix::from_fn(DESIGN_GRID, k, |r, c| chebyshev_row(xs[r], l)[2 * c + 1]);
    let mut w = alloc::vec![1.0 / DESIGN_GRID as f64; DESIGN_GRID];
    let mut coeffs = DVector::zeros(k);
    for _ in 0..LAWSON_ITERS {
        let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        let a = DMatrix::from_fn(DESIGN_GRID, k, |r, c| basis[(r, c)] * sw[r]);
        let b = DVector::from_vec(sw.clone());
        coeffs = a
            .svd(true, true)
            .solve(&b, 1e-14)
            .map_err(|e| Error::InvalidSpec(format!("least-squares solve failed: {e}")))?;
        let fit = &basis * &coeffs;
        let mut total = 0.0;
        for (wi, f) in w.iter_mut().zip(fit.iter()) {
            *wi *= (f - 1.0).abs();
            total += *wi;
        }
        if total == 0.0 {
            break;
        }
        w.iter_mut().for_each(|wi| *wi /= total);
    }
    let mut p = OddPolynomial {
        coeffs: coeffs.iter().copied().collect(),
    };
    let scale = (1.0 - MARGIN) / p.sup_norm();
    p.coeffs.iter_mut().for_each(|c| *c *= scale);
    let deficit = xs.iter().map(|&x| 1.0 - p.eval(x)).fold(f64::MIN, f64::max);
    Ok((p, deficit))
}

/// `⟨0|e^{iφ₀Z} Π_k [S(a) e^{iφ_kZ}]|0⟩` for a 2×2 signal `S(a)`.
fn qsp_element(phases: &[f64], signal: [[C64; 2]; 2]) -> C64 {
    let z = |p: f64| (C64::new(0.0, p).exp(), C64::new(0.0, -p).exp());
    let (d0, d1) = z(phases[0]);
    let mut u = [[d0, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), d1]];
    for &p in &phases[1..] {
        let (e0, e1) = z(p);
        let mut v = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in v.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                let s = u[r][0] * signal[0][c] + u[r][1] * signal[1][c];
                *cell = s * if c == 0 { e0 } else { e1 };
            }
        }
        u = v;
    }
    u[0][0]
}

fn signal_wx(a: f64) -> [[C64; 2]; 2] {
    let s = (1.0 - a * a).max(0.0).sqrt();
    [
        [C64::new(a, 0.0), C64::new(0.0, s)],
        [C64::new(0.0, s), C64::new(a, 0.0)],
    ]
}

fn signal_reflection(a: f64) -> [[C64; 2]; 2] {
    let s = (1.0 - a * a).max(0.0).sqrt();
    [
        [C64::new(a, 0.0), C64::new(s, 0.0)],
        [C64::new(s, 0.0), C64::new(-a, 0.0)],
    ]
}

fn symmetric(reduced: &[f64], l: usize) -> Vec<f64> {
    let mut ph = alloc::vec![0.0; l + 1];
    for (i, &r) in reduced.iter().enumerate() {
        ph[i] = r;
        ph[l - i] = r;
    }
    ph
}

/// Phase schedule of the amplification circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct QsvtSchedule {
    /// Target polynomial.
    pub polynomial: OddPolynomial,
    /// `L + 1` phases in the reflection convention: the circuit alternates
    /// `e^{iφ(2Π−I)}` with the prepare unitary and its inverse.
    pub phases: Vec<f64>,
    /// Worst polynomial deficit `1 − min_{[δ,1]} P`.
    pub deficit: f64,
    /// Largest residual of the phase solve at the interpolation nodes.
    pub phase_residual: f64,
}

impl QsvtSchedule {
    /// Number of reflections `L` (zero for the identity schedule).
    pub fn degree(&self) -> usize {
        self.phases.len().saturating_sub(1)
    }

    /// The schedule that does nothing (initial overlap already 1).
    pub fn identity() -> Self {
        Self {
            polynomial: OddPolynomial {
                coeffs: alloc::vec![1.0],
            },
            phases: Vec::new(),
            deficit: 0.0,
            phase_residual: 0.0,
        }
    }

    /// Designs polynomial and phases for overlap bound `delta_lower` and
    /// target error `eps`. `delta_lower ≥ 1` needs no amplification.
    pub fn design(delta_lower: f64, eps: f64) -> Result<Self> {
        let l = amplification_degree(delta_lower, eps)?;
        if delta_lower >= 1.0 {
            return Ok(Self::identity());
        }
        let (polynomial, deficit) = design_polynomial(l, delta_lower)?;
        let (wx, phase_residual) = solve_phases(&polynomial)?;
        let mut phases: Vec<f64> = wx.iter().map(|p| p + FRAC_PI_2).collect();
        phases[0] = wx[0] + FRAC_PI_4;
        phases[l] = wx[l] + FRAC_PI_4;
        Ok(Self {
            polynomial,
            phases,
            deficit,
            phase_residual,
        })
    }

    /// Flagged amplitude produced by the circuit on a block with initial
    /// overlap `a`: the real part (taken by a one-ancilla linear combination
    /// of the circuit and its phase-negated twin) of `(−i)^L⟨0|U_Φ|0⟩`
    /// evaluated on the block's two-dimensional invariant subspace.
    pub fn amplitude(&self, a: f64) -> f64 {
        if self.phases.is_empty() {
            return a;
        }
        let l = self.degree();
        let global = C64::new(0.0, -1.0).powu(l as u32);
        (global * qsp_element(&self.phases, signal_reflection(a))).re
    }
}

/// Newton solve for symmetric phases in the `W_x` convention so that
/// `Re⟨0|U_Φ(a)|0⟩ = P(a)` at the `K = (L+1)/2` nodes
/// `cos((2k+1)π/(4K))`, starting from `(π/4, 0, …, 0)`.
fn solve_phases(p: &OddPolynomial) -> Result<(Vec<f64>, f64)> {
    let l = p.degree();
    let k = l.div_ceil(2);
    let nodes: Vec<f64> = (0..k)
        .map(|i| ((2 * i + 1) as f64 * PI / (4 * k) as f64).cos())
        .collect();
    let target: Vec<f64> = nodes.iter().map(|&x| p.eval(x)).collect();
    let residual = |red: &[f64]| -> Vec<f64> {
        let ph = symmetric(red, l);
        nodes
            .iter()
            .zip(&target)
            .map(|(&x, t)| qsp_element(&ph, signal_wx(x)).re - t)
            .collect()
    };
    let mut red = alloc::vec![0.0; k];
    red[0] = FRAC_PI_4;
    let mut f = residual(&red);
    let step = 1e-7;
    for _ in 0..NEWTON_ITERS {
        if f.iter().all(|v| v.abs() < NEWTON_TOL) {
            break;
        }
        let mut jac = DMatrix::zeros(k, k);
        for c in 0..k {
            let mut r = red.clone();
            r[c] += step;
            let fp = residual(&r);
            r[c] -= 2.0 * step;
            let fm = residual(&r);
            for row in 0..k {
                jac[(row, c)] = (fp[row] - fm[row]) / (2.0 * step);
            }
        }
        let delta = jac
            .lu()
            .solve(&DVector::from_vec(f.clone()))
            .ok_or_else(|| Error::InvalidSpec("singular Jacobian in the phase solve".into()))?;
        red.iter_mut().zip(delta.iter()).for_each(|(r, d)| *r -= d);
        f = residual(&red);
    }
    let worst = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(worst < 1e-10) {
        return Err(Error::InvalidSpec(format!(
            "phase solve did not converge (residual {worst:e})"
        )));
    }
    Ok((symmetric(&red, l), worst))
}

/// Explicit circuit action for direct simulation: the amplification
/// sequence on an arbitrary register, given the prepare unitary, its
/// inverse and the two projectors as callbacks.
pub trait AmplificationOracle {
    /// `U|v⟩`.
    fn prepare(&self, v: &mut [C64]);
    /// `U†|v⟩`.
    fn unprepare(&self, v: &mut [C64]);
    /// Whether basis index `i` lies in the initial subspace `Π`.
    fn in_initial(&self, i: usize) -> bool;
    /// Whether basis index `i` is flagged (`Π̃`).
    fn in_flagged(&self, i: usize) -> bool;
}

fn reflect(v: &mut [C64], phi: f64, inside: impl Fn(usize) -> bool) {
    let (pos, neg) = (C64::new(0.0, phi).exp(), C64::new(0.0, -phi).exp());
    for (i, a) in v.iter_mut().enumerate() {
        *a *= if inside(i) { pos } else { neg };
    }
}

/// Runs `U_Φ = e^{iφ_L(2Π̃−I)} U ⋯ e^{iφ_2(2Π−I)} U† e^{iφ_1(2Π̃−I)} U e^{iφ_0(2Π−I)}`
/// phase-by-phase on `v` (phases given in application order) and returns
/// the real-part combination `½((−i)^L U_Φ + i^L U_{−Φ})|v⟩`.
pub fn run_circuit<O: AmplificationOracle>(schedule: &QsvtSchedule, oracle: &O, v: &[C64]) -> Vec<C64> {
    if schedule.phases.is_empty() {
        return v.to_vec();
    }
    let l = schedule.degree();
    let branch = |sign: f64| {
        let mut w = v.to_vec();
        reflect(&mut w, sign * schedule.phases[0], |i| oracle.in_initial(i));
        for (step, &phi) in schedule.phases[1..].iter().enumerate() {
            if step % 2 == 0 {
                oracle.prepare(&mut w);
                reflect(&mut w, sign * phi, |i| oracle.in_flagged(i));
            } else {
                oracle.unprepare(&mut w);
                reflect(&mut w, sign * phi, |i| oracle.in_initial(i));
            }
        }
        w
    };
    let (plus, minus) = (branch(1.0), branch(-1.0));
    let gp = C64::new(0.0, -1.0).powu(l as u32) * 0.5;
    let gm = C64::new(0.0, 1.0).powu(l as u32) * 0.5;
    plus.iter().zip(&minus).map(|(a, b)| gp * a + gm * b).collect()
}
