//! Nested-commutator laboratory.
//!
//! For a diagonal `A = diag(a)` the nested commutator
//! `[A,B]_t = [A,[A,B]_{t−1}]` has entries `(a_i − a_k)^t·B_ik`, so the
//! truncated tail `Σ_{t=t₀}^{t_max} [A,B]_t/t!` is the Hadamard product of
//! `B` with `s(a_i − a_k)`, `s(d) = Σ_{t=t₀}^{t_max} d^t/t!`. All three tail
//! families are evaluated in the basis that diagonalizes their nesting
//! operator:
//!
//! * `[x̄², p̄²]_t`: position basis, `B = p̄²`, states `ψ̄_n`;
//! * `[p̄², x̄²]_t`: momentum basis (`w = F v`), `B = F x̄² F⁻¹`, states `Fψ̄_n`;
//! * `[p̄², {x̄,p̄}]_t`: momentum basis, `B = {Y, x̄}` with `Y = F x̄ F⁻¹`.
//!
//! The low-energy projection `Π_N T Π_N` of these tails is a cancellation of
//! terms as large as `max|d|^t/t! ~ 10^{45}` (at `M = 256`) down to values
//! near `10^{−120}`. Double precision cannot resolve that, whatever the
//! summation order: [`commutator_tail_norm`] reports its own noise floor so
//! the limitation is visible, and [`commutator_tail_norm_mp`] repeats the
//! computation in multiprecision, accepting a result only once two
//! different precisions agree.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use astro_float::BigFloat;
use nalgebra::DMatrix;

use super::mp::{MpComplex, MpContext};
use super::{hermite_basis, p2_circulant, DiscreteQho};
use crate::linalg;
use crate::spectral_core::{centered_dft_in_place, GridSpec};
use crate::{Error, Result, C64};

/// Largest grid accepted by the dense laboratory.
pub const TAIL_BUDGET_M: usize = 256;
/// Largest truncation order accepted.
pub const TAIL_BUDGET_T: usize = 40;

/// The three nested-commutator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailFamily {
    /// `[x̄², p̄²]_t`, summed from `t = 3`.
    PositionOnMomentum,
    /// `[p̄², x̄²]_t`, summed from `t = 3`.
    MomentumOnPosition,
    /// `[p̄², {x̄, p̄}]_t`, summed from `t = 2`.
    MomentumOnAnticommutator,
}

impl TailFamily {
    /// All families in a fixed order.
    pub const ALL: [TailFamily; 3] = [
        TailFamily::PositionOnMomentum,
        TailFamily::MomentumOnPosition,
        TailFamily::MomentumOnAnticommutator,
    ];

    /// First order whose continuum counterpart vanishes.
    pub fn first_order(self) -> usize {
        match self {
            TailFamily::MomentumOnAnticommutator => 2,
            _ => 3,
        }
    }

    /// Short machine-readable name.
    pub fn label(self) -> &'static str {
        match self {
            TailFamily::PositionOnMomentum => "x2_p2",
            TailFamily::MomentumOnPosition => "p2_x2",
            TailFamily::MomentumOnAnticommutator => "p2_xp",
        }
    }

    fn momentum_basis(self) -> bool {
        !matches!(self, TailFamily::PositionOnMomentum)
    }
}

/// Result of a tail evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    /// Family evaluated.
    pub family: TailFamily,
    /// Grid dimension.
    pub m: usize,
    /// Projector rank.
    pub n: usize,
    /// Truncation order.
    pub t_max: usize,
    /// `‖Π_N Σ_t [A,B]_t/t! Π_N‖`.
    pub tail_norm: f64,
    /// `(t, ‖Π_N [A,B]_t/t! Π_N‖)` for every summed order.
    pub term_norms: Vec<(usize, f64)>,
    /// Rounding-noise scale of the evaluation; values of `tail_norm` below
    /// it are not resolved.
    pub noise_floor: f64,
    /// Mantissa bits used (53 for the double-precision path).
    pub precision_bits: usize,
    /// Whether two independent precisions agreed on `tail_norm`.
    pub certified: bool,
}

/// Projector rank `N = ⌊M/(40 log₂ 2M)⌋`, clamped to at least 1; the flag
/// reports whether the clamp was active.
pub fn tail_dimension(m: usize) -> (usize, bool) {
    let raw = (m as f64 / (40.0 * (2.0 * m as f64).log2())).floor() as usize;
    (raw.max(1), raw == 0)
}

fn check_budget(spec: &GridSpec, n: usize, t_max: usize) -> Result<()> {
    if spec.m() > TAIL_BUDGET_M || t_max > TAIL_BUDGET_T {
        return Err(Error::BudgetExceeded(format!(
            "commutator tails limited to M <= {TAIL_BUDGET_M}, t_max <= {TAIL_BUDGET_T}; got M = {}, t_max = {t_max}",
            spec.m()
        )));
    }
    if n == 0 || n > spec.m() / 2 {
        return Err(Error::InvalidArgument(format!(
            "projector rank must lie in [1, M/2], got {n}"
        )));
    }
    Ok(())
}

fn empty_report(spec: &GridSpec, family: TailFamily, n: usize, t_max: usize, bits: usize) -> TailReport {
    TailReport {
        family,
        m: spec.m(),
        n,
        t_max,
        tail_norm: 0.0,
        term_norms: Vec::new(),
        noise_floor: 0.0,
        precision_bits: bits,
        certified: true,
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: C64,
    comp: C64,
}

impl Kahan {
    fn add(&mut self, v: C64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Double-precision evaluation with compensated summation over orders and
/// matrix entries.
pub fn commutator_tail_norm(qho: &DiscreteQho, family: TailFamily, n: usize, t_max: usize) -> Result<TailReport> {
    let spec = *qho.spec();
    check_budget(&spec, n, t_max)?;
    let t0 = family.first_order();
    if t_max < t0 {
        return Ok(empty_report(&spec, family, n, t_max, 53));
    }
    let m = spec.m();
    let x = qho.x();
    let x2 = qho.x2();
    // Low-energy states in the family's basis.
    let basis = hermite_basis(&spec, n - 1)?;
    let mut q: Vec<Vec<C64>> = (0..n).map(|k| basis.state(k).amps).collect();
    if family.momentum_basis() {
        for col in &mut q {
            centered_dft_in_place(qho.fft().as_ref(), col, false)?;
        }
    }
    let c = p2_circulant(&spec);
    let y = position_circulant_f64(&spec);
    let b = |i: usize, k: usize| -> C64 {
        let d = (i + m - k) % m;
        match family {
            TailFamily::MomentumOnAnticommutator => y[d] * (x[i] + x[k]),
            _ => C64::new(c[d], 0.0),
        }
    };
    // Absolute rounding scale of a circulant entry: each is a length-M sum
    // of terms of size x_k² (or |x_k|·|x_i + x_k|) divided by M.
    let b_err = |i: usize, k: usize| -> f64 {
        match family {
            TailFamily::MomentumOnAnticommutator => {
                (x[i].abs() + x[k].abs()) * x.iter().map(|v| v.abs()).sum::<f64>() / m as f64
            }
            _ => x2.iter().sum::<f64>() / m as f64,
        }
    };
    let orders = t_max - t0 + 1;
    let mut w_t = vec![vec![Kahan::default(); m * n]; orders];
    let mut w = vec![Kahan::default(); m * n];
    let mut floor = vec![0.0_f64; n];
    for i in 0..m {
        for k in 0..m {
            let d = x2[i] - x2[k];
            if d == 0.0 {
                continue;
            }
            let bik = b(i, k);
            let mut p = 1.0;
            let mut s = Kahan::default();
            let mut s_abs = 0.0;
            for t in 1..=t_max {
                p *= d / t as f64;
                if t >= t0 {
                    s.add(C64::new(p, 0.0));
                    s_abs += p.abs();
                    for col in 0..n {
                        w_t[t - t0][i * n + col].add(bik * q[col][k] * p);
                    }
                }
            }
            for col in 0..n {
                w[i * n + col].add(s.sum * bik * q[col][k]);
                floor[col] += q[col][i].norm() * s_abs * (bik.norm() + b_err(i, k)) * q[col][k].norm();
            }
        }
    }
    let project = |acc: &[Kahan]| -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |r, col| {
            let mut s = Kahan::default();
            for i in 0..m {
                s.add(q[r][i].conj() * acc[i * n + col].sum);
            }
            s.sum
        })
    };
    let tail_norm = linalg::spectral_norm(&project(&w));
    let term_norms = (0..orders)
        .map(|o| (o + t0, linalg::spectral_norm(&project(&w_t[o]))))
        .collect();
    let noise_floor = f64::EPSILON * floor.iter().copied().fold(0.0, f64::max);
    Ok(TailReport {
        family,
        m,
        n,
        t_max,
        tail_norm,
        term_norms,
        noise_floor,
        precision_bits: 53,
        certified: false,
    })
}

/// First column of `Y = F x̄ F⁻¹`: `y(d) = (1/M) Σ_k x_k e^{i2πkd/M}`.
fn position_circulant_f64(spec: &GridSpec) -> Vec<C64> {
    let m = spec.m();
    (0..m)
        .map(|d| {
            let s: C64 = spec
                .labels()
                .map(|k| {
                    let r = (k * d as i64).rem_euclid(m as i64) as f64;
                    let th = 2.0 * PI * r / m as f64;
                    C64::new(th.cos(), th.sin()) * spec.x(k)
                })
                .sum();
            s / m as f64
        })
        .collect()
}

/// Tuning of the multiprecision evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpOptions {
    /// First precision tried; `None` derives it from the term magnitudes.
    pub start_bits: Option<usize>,
    /// Extra bits of the confirming evaluation.
    pub confirm_extra_bits: usize,
    /// Precision ceiling.
    pub max_bits: usize,
    /// Relative agreement required between the two evaluations.
    pub rel_agreement: f64,
}

impl Default for MpOptions {
    fn default() -> Self {
        Self {
            start_bits: None,
            confirm_extra_bits: 128,
            max_bits: 8192,
            rel_agreement: 1e-6,
        }
    }
}

/// Multiprecision evaluation, certified by agreement of two precisions.
///
/// Starting from a precision sized to the largest Hadamard-tail entry, the
/// tail is evaluated at `p` and `p + confirm_extra_bits` bits; if the norms
/// disagree beyond `rel_agreement`, `p` doubles. The report carries the
/// higher-precision result and `certified = true` once agreement is reached
/// (or `false` if `max_bits` is exhausted).
pub fn commutator_tail_norm_mp(
    spec: &GridSpec,
    family: TailFamily,
    n: usize,
    t_max: usize,
    opts: MpOptions,
) -> Result<TailReport> {
    check_budget(spec, n, t_max)?;
    let t0 = family.first_order();
    if t_max < t0 {
        return Ok(empty_report(spec, family, n, t_max, 0));
    }
    let mut p = opts.start_bits.unwrap_or_else(|| {
        let dmax = PI * spec.m() as f64 / 2.0;
        let mut log2_max = 0.0_f64;
        let mut lp = 0.0_f64;
        for t in 1..=t_max {
            lp += dmax.log2() - (t as f64).log2();
            log2_max = log2_max.max(lp);
        }
        (((log2_max + 2.0 * (spec.m() as f64).log2() + 256.0) / 64.0).ceil() as usize) * 64
    });
    loop {
        let lo = tail_mp(spec, family, n, t_max, p);
        let hi = tail_mp(spec, family, n, t_max, p + opts.confirm_extra_bits);
        let scale = lo.tail_norm.abs().max(hi.tail_norm.abs());
        let agree = (lo.tail_norm - hi.tail_norm).abs() <= opts.rel_agreement * scale;
        if agree || 2 * p > opts.max_bits {
            let mut out = hi;
            out.certified = agree;
            out.noise_floor = (lo.tail_norm - out.tail_norm).abs();
            return Ok(out);
        }
        p *= 2;
    }
}

fn tail_mp(spec: &GridSpec, family: TailFamily, n: usize, t_max: usize, bits: usize) -> TailReport {
    let mut ctx = MpContext::new(bits);
    let m = spec.m();
    let mi = m as i64;
    let t0 = family.first_order();
    let pi = ctx.pi();
    let h2 = ctx.div(&ctx.mul(&ctx.int(2), &pi), &ctx.int(mi));
    let h = ctx.sqrt(&h2);
    let labels: Vec<i64> = spec.labels().collect();
    let x: Vec<BigFloat> = labels.iter().map(|&k| ctx.mul(&ctx.int(k), &h)).collect();
    let (cos_t, sin_t) = ctx.unit_circle(m);
    let inv_m = ctx.div(&ctx.int(1), &ctx.int(mi));

    // Circulant first columns.
    let mut b_real = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    for d in 0..mi {
        let mut cr = ctx.int(0);
        let mut yr = ctx.int(0);
        let mut yi = ctx.int(0);
        for (idx, &k) in labels.iter().enumerate() {
            let r = (k * d).rem_euclid(mi) as usize;
            let k2 = ctx.mul(&ctx.int(k * k), &h2);
            cr = ctx.add(&cr, &ctx.mul(&k2, &cos_t[r]));
            if family == TailFamily::MomentumOnAnticommutator {
                yr = ctx.add(&yr, &ctx.mul(&x[idx], &cos_t[r]));
                yi = ctx.add(&yi, &ctx.mul(&x[idx], &sin_t[r]));
            }
        }
        b_real.push(ctx.mul(&cr, &inv_m));
        y.push(MpComplex {
            re: ctx.mul(&yr, &inv_m),
            im: ctx.mul(&yi, &inv_m),
        });
    }

    // Sampled Hermite states ψ̄_n(x_k) = √h·ψ_n(x_k) via the recurrence.
    let quarter_pi = ctx.sqrt(&ctx.sqrt(&pi));
    let sqrt_h = ctx.sqrt(&h);
    let mut q: Vec<Vec<MpComplex>> = vec![Vec::with_capacity(m); n];
    for xk in &x {
        let half_sq = ctx.div(&ctx.mul(xk, xk), &ctx.int(-2));
        let g = ctx.exp(&half_sq);
        let mut prev = ctx.int(0);
        let mut cur = ctx.div(&g, &quarter_pi);
        for (deg, col) in q.iter_mut().enumerate() {
            col.push(MpComplex::real(&ctx, ctx.mul(&cur, &sqrt_h)));
            let a = ctx.sqrt(&ctx.div(&ctx.int(2), &ctx.int(deg as i64 + 1)));
            let bcoef = ctx.sqrt(&ctx.div(&ctx.int(deg as i64), &ctx.int(deg as i64 + 1)));
            let next = ctx.sub(&ctx.mul(&ctx.mul(&a, xk), &cur), &ctx.mul(&bcoef, &prev));
            prev = cur;
            cur = next;
        }
    }
    if family.momentum_basis() {
        let inv_sqrt_m = ctx.sqrt(&inv_m);
        for col in &mut q {
            let src = col.clone();
            for (jdx, &j) in labels.iter().enumerate() {
                let mut acc = MpComplex::zero(&ctx);
                for (kdx, &k) in labels.iter().enumerate() {
                    let r = (j * k).rem_euclid(mi) as usize;
                    let e = MpComplex {
                        re: cos_t[r].clone(),
                        im: sin_t[r].clone(),
                    };
                    acc.add_assign(&ctx, &MpComplex::mul(&ctx, &e, &src[kdx]));
                }
                col[jdx] = MpComplex::scale(&ctx, &inv_sqrt_m, &acc);
            }
        }
    }

    // g_t = h2^t / t!, so d^t/t! = (j² − k²)^t · g_t with an exact integer power.
    let mut g = Vec::with_capacity(t_max + 1);
    g.push(ctx.int(1));
    for t in 1..=t_max {
        let prev = g[t - 1].clone();
        g.push(ctx.div(&ctx.mul(&prev, &h2), &ctx.int(t as i64)));
    }

    let orders = t_max - t0 + 1;
    let mut w_t: Vec<Vec<MpComplex>> = (0..orders)
        .map(|_| (0..m * n).map(|_| MpComplex::zero(&ctx)).collect())
        .collect();
    let mut bq = vec![MpComplex::zero(&ctx); n];
    for i in 0..m {
        for k in 0..m {
            let e = labels[i] * labels[i] - labels[k] * labels[k];
            if e == 0 {
                continue;
            }
            let d = (i + m - k) % m;
            let bik = match family {
                TailFamily::MomentumOnAnticommutator => MpComplex::scale(&ctx, &ctx.add(&x[i], &x[k]), &y[d]),
                _ => MpComplex::real(&ctx, b_real[d].clone()),
            };
            for col in 0..n {
                bq[col] = MpComplex::mul(&ctx, &bik, &q[col][k]);
            }
            let ef = ctx.int(e);
            let mut pow = ctx.int(1);
            for t in 1..=t_max {
                pow = ctx.mul(&pow, &ef);
                if t >= t0 {
                    let coef = ctx.mul(&pow, &g[t]);
                    for col in 0..n {
                        let term = MpComplex::scale(&ctx, &coef, &bq[col]);
                        w_t[t - t0][i * n + col].add_assign(&ctx, &term);
                    }
                }
            }
        }
    }
    let project = |acc: &[MpComplex]| -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |r, col| {
            let mut s = MpComplex::zero(&ctx);
            for i in 0..m {
                s.add_assign(&ctx, &MpComplex::conj_mul(&ctx, &q[r][i], &acc[i * n + col]));
            }
            s.to_c64()
        })
    };
    let mut total: Vec<MpComplex> = (0..m * n).map(|_| MpComplex::zero(&ctx)).collect();
    for layer in &w_t {
        for (tot, v) in total.iter_mut().zip(layer) {
            tot.add_assign(&ctx, v);
        }
    }
    let tail_norm = linalg::spectral_norm(&project(&total));
    let term_norms = w_t
        .iter()
        .enumerate()
        .map(|(o, layer)| (o + t0, linalg::spectral_norm(&project(layer))))
        .collect();
    TailReport {
        family,
        m,
        n,
        t_max,
        tail_norm,
        term_norms,
        noise_floor: 0.0,
        precision_bits: bits,
        certified: false,
    }
}
