//! Thin multiprecision layer over `astro-float` for the commutator oracle.

use alloc::vec::Vec;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

/// Precision, rounding mode and constant cache bundled together.
pub struct MpContext {
    p: usize,
    rm: RoundingMode,
    cc: Consts,
}

impl MpContext {
    /// A context working with `bits` of mantissa.
    pub fn new(bits: usize) -> Self {
        Self {
            p: bits,
            rm: RoundingMode::ToEven,
            cc: Consts::new().expect("constant cache allocation"),
        }
    }

    /// Working precision in bits.
    pub fn bits(&self) -> usize {
        self.p
    }

    /// Exact conversion of an `f64`.
    pub fn f(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }

    /// Exact conversion of an integer.
    pub fn int(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.p)
    }

    /// `a + b`.
    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, self.rm)
    }

    /// `a − b`.
    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, self.rm)
    }

    /// `a·b`.
    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, self.rm)
    }

    /// `a/b`.
    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, self.rm)
    }

    /// `√a`.
    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, self.rm)
    }

    /// `e^a`.
    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, self.rm, &mut self.cc)
    }

    /// `cos a`.
    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.p, self.rm, &mut self.cc)
    }

    /// `sin a`.
    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.p, self.rm, &mut self.cc)
    }

    /// `ln a`.
    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, self.rm, &mut self.cc)
    }

    /// `π`.
    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, self.rm)
    }

    /// `cos(2πr/M)` and `sin(2πr/M)` for `r ∈ [0, M)`.
    pub fn unit_circle(&mut self, m: usize) -> (Vec<BigFloat>, Vec<BigFloat>) {
        let pi = self.pi();
        let two_pi = self.mul(&self.int(2), &pi);
        let step = self.div(&two_pi, &self.int(m as i64));
        let mut c = Vec::with_capacity(m);
        let mut s = Vec::with_capacity(m);
        for r in 0..m {
            let th = self.mul(&step, &self.int(r as i64));
            c.push(self.cos(&th));
            s.push(self.sin(&th));
        }
        (c, s)
    }
}

/// Nearest `f64` to a multiprecision value (truncated to the leading word,
/// which is ample for 53-bit output).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _bits, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let Some(top) = words.last() else {
        return 0.0;
    };
    // Value is 0.m × 2^exp with the top word holding the leading 64 bits.
    let lead = *top as f64 / 18_446_744_073_709_551_616.0;
    let mag = libm::ldexp(lead, exp);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

/// Complex number with multiprecision parts.
#[derive(Clone, Debug)]
pub struct MpComplex {
    /// Real part.
    pub re: BigFloat,
    /// Imaginary part.
    pub im: BigFloat,
}

impl MpComplex {
    /// Zero at the context precision.
    pub fn zero(ctx: &MpContext) -> Self {
        Self {
            re: ctx.int(0),
            im: ctx.int(0),
        }
    }

    /// Real value promoted to complex.
    pub fn real(ctx: &MpContext, re: BigFloat) -> Self {
        Self { re, im: ctx.int(0) }
    }

    /// `a·b`.
    pub fn mul(ctx: &MpContext, a: &Self, b: &Self) -> Self {
        Self {
            re: ctx.sub(&ctx.mul(&a.re, &b.re), &ctx.mul(&a.im, &b.im)),
            im: ctx.add(&ctx.mul(&a.re, &b.im), &ctx.mul(&a.im, &b.re)),
        }
    }

    /// `conj(a)·b`.
    pub fn conj_mul(ctx: &MpContext, a: &Self, b: &Self) -> Self {
        Self {
            re: ctx.add(&ctx.mul(&a.re, &b.re), &ctx.mul(&a.im, &b.im)),
            im: ctx.sub(&ctx.mul(&a.re, &b.im), &ctx.mul(&a.im, &b.re)),
        }
    }

    /// `r·a` for real `r`.
    pub fn scale(ctx: &MpContext, r: &BigFloat, a: &Self) -> Self {
        Self {
            re: ctx.mul(r, &a.re),
            im: ctx.mul(r, &a.im),
        }
    }

    /// `self += b`.
    pub fn add_assign(&mut self, ctx: &MpContext, b: &Self) {
        self.re = ctx.add(&self.re, &b.re);
        self.im = ctx.add(&self.im, &b.im);
    }

    /// Conversion to `f64` parts.
    pub fn to_c64(&self) -> crate::C64 {
        crate::C64::new(to_f64(&self.re), to_f64(&self.im))
    }
}
