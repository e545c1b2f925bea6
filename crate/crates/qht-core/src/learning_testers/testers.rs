//! Tolerant property testers driven by Hermite samples.
//!
//! Every tester works with the normalized spectrum `f̂(v)²/‖f‖²`, which is
//! exactly what a Hermite sampler draws from. Each compares an estimated
//! statistic against the promise midpoint `1 − (ε₁+ε₂)/2`; an estimate
//! exactly at the threshold accepts.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::hermite_sampling::{HermiteSampler, SampleOutcome};
use crate::{Error, Result};

/// Anything that produces Hermite samples, reporting the queries each one
/// cost.
pub trait HermiteSource {
    /// One accepted sample and the attempts it took.
    fn draw(&mut self, rng: &mut dyn rand::RngCore) -> Result<(SampleOutcome, u64)>;
    /// Degree cutoff `D` of the outcomes.
    fn cutoff(&self) -> usize;
}

impl HermiteSource for HermiteSampler {
    fn draw(&mut self, rng: &mut dyn rand::RngCore) -> Result<(SampleOutcome, u64)> {
        let s = self.sample_postselected(rng)?;
        Ok((s.outcome, s.attempts))
    }

    fn cutoff(&self) -> usize {
        self.distribution().d
    }
}

impl<S: HermiteSource + ?Sized> HermiteSource for &mut S {
    fn draw(&mut self, rng: &mut dyn rand::RngCore) -> Result<(SampleOutcome, u64)> {
        (**self).draw(rng)
    }

    fn cutoff(&self) -> usize {
        (**self).cutoff()
    }
}

/// Sample-count constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TesterConfig {
    /// `c` in `m = ⌈c·ln(1/δ)/ε²⌉`.
    pub c: f64,
    /// `c_find` in the `⌈c_find·log₂(1/ε)⌉` candidate-finding draws.
    pub c_find: f64,
}

impl Default for TesterConfig {
    fn default() -> Self {
        Self { c: 2.0, c_find: 2.0 }
    }
}

impl TesterConfig {
    /// `m = ⌈c·ln(1/δ)/ε²⌉` with `ε = ε₂ − ε₁`.
    pub fn sample_count(&self, eps1: f64, eps2: f64, delta: f64) -> usize {
        let eps = eps2 - eps1;
        (self.c * (1.0 / delta).ln() / (eps * eps)).ceil() as usize
    }

    /// Candidate-finding draws `⌈c_find·log₂(1/ε)⌉` (at least one).
    pub fn finding_count(&self, eps1: f64, eps2: f64) -> usize {
        ((self.c_find * (1.0 / (eps2 - eps1)).log2()).ceil() as usize).max(1)
    }
}

/// Evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Support `S` of the matching product-sign function.
    Support(Vec<usize>),
    /// The multi-index of the matching Hermite polynomial.
    Index(Vec<usize>),
    /// Estimated low-degree mass.
    LowDegreeMass(f64),
}

/// Outcome of a tester.
#[derive(Debug, Clone, PartialEq)]
pub struct TesterVerdict {
    /// Accept or reject.
    pub accept: bool,
    /// Evidence when accepting.
    pub witness: Option<Witness>,
    /// The statistic compared against the threshold.
    pub statistic: f64,
    /// `1 − (ε₁+ε₂)/2`.
    pub threshold: f64,
    /// Samples drawn.
    pub samples: usize,
    /// Queries to `f` (sampler attempts).
    pub queries: u64,
}

fn check_promise(eps1: f64, eps2: f64, delta: f64) -> Result<()> {
    if !(eps2 > eps1 && eps1 >= 0.0 && eps2 <= 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 ≤ ε₁ < ε₂ ≤ 1 and δ ∈ (0, 1), got ε₁ = {eps1}, ε₂ = {eps2}, δ = {delta}"
        )));
    }
    Ok(())
}

struct Draws<'a, S: HermiteSource + ?Sized> {
    source: &'a mut S,
    samples: usize,
    queries: u64,
}

impl<S: HermiteSource + ?Sized> Draws<'_, S> {
    fn next<R: Rng>(&mut self, rng: &mut R) -> Result<SampleOutcome> {
        let (o, q) = self.source.draw(rng)?;
        self.samples += 1;
        self.queries += q;
        Ok(o)
    }
}

/// Tolerant low-degree test: estimates the normalized mass on `|v| ≤ d`
/// from `m = ⌈c·ln(1/δ)/ε²⌉` samples and accepts iff it reaches
/// `1 − (ε₁+ε₂)/2`. The source's cutoff must be at least `d`, so an
/// above-cutoff coordinate certifies `|v| > d`.
pub fn test_low_degree<S: HermiteSource + ?Sized, R: Rng>(
    source: &mut S,
    d: usize,
    eps1: f64,
    eps2: f64,
    delta: f64,
    config: &TesterConfig,
    rng: &mut R,
) -> Result<TesterVerdict> {
    check_promise(eps1, eps2, delta)?;
    let cutoff = source.cutoff();
    if cutoff < d {
        return Err(Error::InvalidArgument(format!(
            "sampler cutoff D = {cutoff} is below the tested degree d = {d}"
        )));
    }
    let m = config.sample_count(eps1, eps2, delta);
    let mut draws = Draws {
        source,
        samples: 0,
        queries: 0,
    };
    let mut low = 0usize;
    for _ in 0..m {
        if draws.next(rng)?.degree_lower_bound(cutoff) <= d {
            low += 1;
        }
    }
    let x = low as f64 / m as f64;
    let threshold = 1.0 - (eps1 + eps2) / 2.0;
    let accept = x >= threshold;
    Ok(TesterVerdict {
        accept,
        witness: accept.then_some(Witness::LowDegreeMass(x)),
        statistic: x,
        threshold,
        samples: draws.samples,
        queries: draws.queries,
    })
}

/// Tolerant product-sign test: one sample fixes a candidate support `S`
/// (rejecting at once if `|S| ≠ k`). Then `m` further samples estimate the
/// normalized weight `W^{S*}` on multi-indices whose support is exactly
/// `S`, and the test accepts iff it reaches `1 − (ε₁+ε₂)/2`.
pub fn test_product_sign<S: HermiteSource + ?Sized, R: Rng>(
    source: &mut S,
    k: usize,
    eps1: f64,
    eps2: f64,
    delta: f64,
    config: &TesterConfig,
    rng: &mut R,
) -> Result<TesterVerdict> {
    check_promise(eps1, eps2, delta)?;
    let threshold = 1.0 - (eps1 + eps2) / 2.0;
    let mut draws = Draws {
        source,
        samples: 0,
        queries: 0,
    };
    let support = draws.next(rng)?.support();
    if support.len() != k {
        return Ok(TesterVerdict {
            accept: false,
            witness: None,
            statistic: 0.0,
            threshold,
            samples: draws.samples,
            queries: draws.queries,
        });
    }
    let m = config.sample_count(eps1, eps2, delta);
    let mut hits = 0usize;
    for _ in 0..m {
        if draws.next(rng)?.support() == support {
            hits += 1;
        }
    }
    let w = hits as f64 / m as f64;
    let accept = w >= threshold;
    Ok(TesterVerdict {
        accept,
        witness: accept.then_some(Witness::Support(support)),
        statistic: w,
        threshold,
        samples: draws.samples,
        queries: draws.queries,
    })
}

/// Tolerant Hermite-polynomial test, where "close to `h_v`" means
/// correlation `|f̂(v)|/‖f‖ ≥ 1 − ε₁`. First `⌈c_find·log₂(1/ε)⌉` samples
/// propose candidates with exactly `k` nonzero entries. Then `m` samples
/// estimate each candidate's correlation as `√(frequency)`, and the test
/// accepts iff the best one reaches `1 − (ε₁+ε₂)/2`.
pub fn test_hermite_polynomial<S: HermiteSource + ?Sized, R: Rng>(
    source: &mut S,
    k: usize,
    eps1: f64,
    eps2: f64,
    delta: f64,
    config: &TesterConfig,
    rng: &mut R,
) -> Result<TesterVerdict> {
    check_promise(eps1, eps2, delta)?;
    let threshold = 1.0 - (eps1 + eps2) / 2.0;
    let mut draws = Draws {
        source,
        samples: 0,
        queries: 0,
    };
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for _ in 0..config.finding_count(eps1, eps2) {
        if let SampleOutcome::Index(s) = draws.next(rng)? {
            if s.v.iter().filter(|&&a| a != 0).count() == k && !candidates.contains(&s.v) {
                candidates.push(s.v);
            }
        }
    }
    if candidates.is_empty() {
        return Ok(TesterVerdict {
            accept: false,
            witness: None,
            statistic: 0.0,
            threshold,
            samples: draws.samples,
            queries: draws.queries,
        });
    }
    let m = config.sample_count(eps1, eps2, delta);
    let mut hits = alloc::vec![0usize; candidates.len()];
    for _ in 0..m {
        if let SampleOutcome::Index(s) = draws.next(rng)? {
            if let Some(i) = candidates.iter().position(|c| *c == s.v) {
                hits[i] += 1;
            }
        }
    }
    let (best, count) = hits
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, &c)| (i, c))
        .unwrap_or((0, 0));
    let corr = (count as f64 / m as f64).sqrt();
    let accept = corr >= threshold;
    Ok(TesterVerdict {
        accept,
        witness: accept.then(|| Witness::Index(candidates[best].clone())),
        statistic: corr,
        threshold,
        samples: draws.samples,
        queries: draws.queries,
    })
}
