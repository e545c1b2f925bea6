//! Hermite-spectrum samplers.
//!
//! The boolean sampler prepares `|ψ̄_0⟩^{⊗n}` and multiplies the amplitudes
//! pointwise by `f(√2·x)`. It then applies the inverse transform per axis and
//! samples the squared amplitudes. Since
//! `⟨ψ̄_v|f(√2·)ψ̄_0⟩ ≈ ∫ f(√2x)ψ_v(x)ψ_0(x)dx = f̂(v)`, the outcome `v` has
//! probability `≈ f̂(v)²`.
//!
//! The general sampler first rotates an ancilla by `f/B` (with `B` the grid
//! maximum of `|f|`) and postselects on it. Its per-attempt success
//! probability is `E[(f/B)²]`.
//!
//! Measurements are simulated by exact inversion sampling from the computed
//! probabilities with a caller-supplied seeded generator.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::function::OracleFunction;
use super::quadrature::{grid_values, SpectrumTable};
use crate::discrete_qho::hermite_basis;
use crate::spectral_core::{GridSpec, StateVector};
use crate::{Error, Result, C64};

/// Which inverse transform the sampler applies per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformPath {
    /// Exact discrete Hermite states `ψ̄_v`.
    Reference,
    /// Block outputs of the simulated transform pipeline.
    Pipeline,
}

/// Per-axis inverse transform: rows `⟨row_v|` for `v ≤ D` and the ground
/// state used for preparation.
#[derive(Debug, Clone)]
pub struct AxisTransform {
    spec: GridSpec,
    rows: Vec<Vec<C64>>,
    ground: Vec<C64>,
    path: TransformPath,
}

impl AxisTransform {
    /// Reference transform from the discrete Hermite states.
    pub fn reference(m: usize, d: usize) -> Result<Self> {
        let spec = GridSpec::new(m)?;
        let basis = hermite_basis(&spec, d)?;
        let rows: Vec<Vec<C64>> = (0..=d).map(|v| basis.state(v).amps).collect();
        Ok(Self {
            spec,
            ground: rows[0].clone(),
            rows,
            path: TransformPath::Reference,
        })
    }

    /// Transform assembled from pipeline outputs `QHT|v⟩`, `v = 0..=D`;
    /// the ground state is `QHT|0⟩`.
    pub fn from_pipeline(outputs: &[StateVector]) -> Result<Self> {
        let first = outputs
            .first()
            .ok_or_else(|| Error::InvalidArgument("pipeline produced no blocks".into()))?;
        let spec = GridSpec::new(first.dim())?;
        let rows: Vec<Vec<C64>> = outputs.iter().map(|o| o.amps.clone()).collect();
        Ok(Self {
            spec,
            ground: rows[0].clone(),
            rows,
            path: TransformPath::Pipeline,
        })
    }

    /// Degree cutoff `D`.
    pub fn d(&self) -> usize {
        self.rows.len() - 1
    }

    /// Grid dimension per axis.
    pub fn m(&self) -> usize {
        self.spec.m()
    }

    /// Which transform this is.
    pub fn path(&self) -> TransformPath {
        self.path
    }

    fn nodes(&self) -> Vec<f64> {
        self.spec.labels().map(|j| SQRT_2 * self.spec.x(j)).collect()
    }
}

/// A sampled multi-index `v ∈ [0, D]ⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HermiteSample {
    /// Coordinates.
    pub v: Vec<usize>,
}

/// Outcome of one measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SampleOutcome {
    /// A multi-index within the cutoff.
    Index(HermiteSample),
    /// At least one coordinate exceeded `D`. Coordinates within the cutoff
    /// are kept; those above it are `None` (and known to be nonzero).
    AboveCutoff(Vec<Option<usize>>),
}

impl SampleOutcome {
    /// Coordinates that are certainly nonzero.
    pub fn support(&self) -> Vec<usize> {
        match self {
            SampleOutcome::Index(s) => {
                s.v.iter()
                    .enumerate()
                    .filter(|(_, &k)| k != 0)
                    .map(|(i, _)| i)
                    .collect()
            }
            SampleOutcome::AboveCutoff(p) => p
                .iter()
                .enumerate()
                .filter(|(_, k)| **k != Some(0))
                .map(|(i, _)| i)
                .collect(),
        }
    }

    /// Lower bound on the total degree `|v|` (above-cutoff coordinates count
    /// as `D + 1`).
    pub fn degree_lower_bound(&self, d: usize) -> usize {
        match self {
            SampleOutcome::Index(s) => s.v.iter().sum(),
            SampleOutcome::AboveCutoff(p) => p.iter().map(|k| k.unwrap_or(d + 1)).sum(),
        }
    }
}

/// Exact outcome distribution of a sampler.
#[derive(Debug, Clone)]
pub struct SamplerDistribution {
    /// Number of variables.
    pub arity: usize,
    /// Cutoff `D`.
    pub d: usize,
    /// Probabilities over `[0, D+1]ⁿ`, row-major, where a coordinate equal
    /// to `D + 1` stands for "above the cutoff".
    pub extended: Vec<f64>,
    /// `p_v` for `v ∈ [0, D]ⁿ`, row-major (coordinate 0 slowest).
    pub probs: Vec<f64>,
    /// Probability that some coordinate lies above the cutoff.
    pub above: f64,
    /// Per-attempt postselection success probability (`1` when no
    /// postselection is needed).
    pub success_probability: f64,
    /// Grid maximum `B` of `|f|` used to scale the rotation.
    pub scale: f64,
}

/// Full-grid budget of the sampler for functions without product
/// structure: `n·log₂M ≤ 22`.
pub const SAMPLER_GRID_BUDGET_BITS: u32 = 22;

fn grid_bits_ok(n: usize, m: usize) -> Result<()> {
    let bits = n as f64 * (m as f64).log2();
    if bits > SAMPLER_GRID_BUDGET_BITS as f64 {
        return Err(Error::BudgetExceeded(format!(
            "sampling grid needs n·log₂M = {bits:.1} > {SAMPLER_GRID_BUDGET_BITS} bits"
        )));
    }
    Ok(())
}

/// Splits one fiber `x` into its row coefficients `c_k = ⟨row_k|x⟩` and the
/// residual `x − Σ_k c_k·row_k`, written as `K + M` consecutive entries.
fn split_fiber(x: &[C64], rows: &[Vec<C64>], out: &mut [C64]) {
    let k = rows.len();
    let (coef, resid) = out.split_at_mut(k);
    resid.copy_from_slice(x);
    for (c, row) in coef.iter_mut().zip(rows) {
        *c = row.iter().zip(x).map(|(r, v)| r.conj() * v).sum();
        for (o, r) in resid.iter_mut().zip(row) {
            *o -= *c * r;
        }
    }
}

/// Like [`contract`] but keeps each fiber's residual, giving shape
/// `[K + M; n]`.
fn contract_extended(values: &[C64], m: usize, n: usize, rows: &[Vec<C64>]) -> Vec<C64> {
    let width = rows.len() + m;
    let mut cur = values.to_vec();
    let mut fiber = alloc::vec![C64::new(0.0, 0.0); m];
    let mut split = alloc::vec![C64::new(0.0, 0.0); width];
    for _ in 0..n {
        let rest = cur.len() / m;
        let mut out = alloc::vec![C64::new(0.0, 0.0); rest * width];
        for r in 0..rest {
            for (j, slot) in fiber.iter_mut().enumerate() {
                *slot = cur[j * rest + r];
            }
            split_fiber(&fiber, rows, &mut split);
            out[r * width..(r + 1) * width].copy_from_slice(&split);
        }
        cur = out;
    }
    cur
}

/// Folds squared amplitudes over `[K + M; n]` into buckets over
/// `[K + 1; n]` (the last bucket per axis collects the residual).
fn bucket(ext: &[C64], k: usize, m: usize, n: usize) -> Vec<f64> {
    let width = k + m;
    let mut out = alloc::vec![0.0; (k + 1).pow(n as u32)];
    for (i, a) in ext.iter().enumerate() {
        let (mut rem, mut flat, mut stride) = (i, 0usize, 1usize);
        for _ in 0..n {
            let c = (rem % width).min(k);
            rem /= width;
            flat += c * stride;
            stride *= k + 1;
        }
        out[flat] += a.norm_sqr();
    }
    out
}

/// Exact probabilities of the sampler for `f` under `transform`.
pub fn sampler_distribution(f: &OracleFunction, transform: &AxisTransform) -> Result<SamplerDistribution> {
    let n = f.arity();
    let m = transform.m();
    let d = transform.d();
    let k = d + 1;
    let nodes = transform.nodes();
    let ground_mass: f64 = transform.ground.iter().map(|g| g.norm_sqr()).sum();
    let (weights, norm_sq, sup) = if f.separable() {
        let mut weights = alloc::vec![1.0];
        let (mut norm_sq, mut sup) = (1.0, 1.0);
        let mut split = alloc::vec![C64::new(0.0, 0.0); k + m];
        for i in 0..n {
            let vals: Vec<f64> = nodes.iter().map(|&y| f.evaluate_factor(i, y).unwrap_or(0.0)).collect();
            let a: Vec<C64> = vals.iter().zip(&transform.ground).map(|(&v, g)| g * v).collect();
            split_fiber(&a, &transform.rows, &mut split);
            let axis = bucket(&split, k, m, 1);
            norm_sq *= a.iter().map(|v| v.norm_sqr()).sum::<f64>();
            sup *= vals.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
            weights = weights.iter().flat_map(|&w| axis.iter().map(move |&x| w * x)).collect();
        }
        (weights, norm_sq, sup)
    } else {
        grid_bits_ok(n, m)?;
        let vals = grid_values(f, &nodes);
        let mut a = Vec::with_capacity(vals.len());
        let mut idx = alloc::vec![0usize; n];
        for &fx in &vals {
            let g: C64 = idx.iter().map(|&j| transform.ground[j]).product();
            a.push(g * fx);
            for ax in (0..n).rev() {
                idx[ax] += 1;
                if idx[ax] < m {
                    break;
                }
                idx[ax] = 0;
            }
        }
        let sup = vals.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
        let norm_sq = a.iter().map(|v| v.norm_sqr()).sum();
        (
            bucket(&contract_extended(&a, m, n, &transform.rows), k, m, n),
            norm_sq,
            sup,
        )
    };
    if norm_sq == 0.0 || sup == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "function '{}' vanishes on the sampling grid",
            f.label()
        )));
    }
    // Rows from the pipeline are only approximately orthonormal, so the
    // buckets are renormalized rather than divided by ‖a‖².
    let total: f64 = weights.iter().sum();
    let extended: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut probs = Vec::with_capacity(k.pow(n as u32));
    let mut above = 0.0;
    for (i, &p) in extended.iter().enumerate() {
        if within(i, k, n) {
            probs.push(p);
        } else {
            above += p;
        }
    }
    Ok(SamplerDistribution {
        arity: n,
        d,
        extended,
        probs,
        above,
        success_probability: (norm_sq / (sup * sup * ground_mass.powi(n as i32))).min(1.0),
        scale: sup,
    })
}

/// Whether flat index `i` over `[0, K]ⁿ` has every coordinate below `K`.
fn within(mut i: usize, k: usize, n: usize) -> bool {
    for _ in 0..n {
        if i % (k + 1) == k {
            return false;
        }
        i /= k + 1;
    }
    true
}

impl SamplerDistribution {
    /// Multi-index of flat position `i` within `[0, D]ⁿ`.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut v = alloc::vec![0; self.arity];
        for slot in v.iter_mut().rev() {
            *slot = i % (self.d + 1);
            i /= self.d + 1;
        }
        v
    }

    fn outcome(&self, mut i: usize) -> SampleOutcome {
        let mut v = alloc::vec![None; self.arity];
        for slot in v.iter_mut().rev() {
            let c = i % (self.d + 2);
            i /= self.d + 2;
            *slot = (c <= self.d).then_some(c);
        }
        if v.iter().all(Option::is_some) {
            SampleOutcome::Index(HermiteSample {
                v: v.into_iter().map(|c| c.unwrap_or(0)).collect(),
            })
        } else {
            SampleOutcome::AboveCutoff(v)
        }
    }

    /// Largest `|p_v − q_v|` against a spectrum table (including the
    /// above-cutoff outcome).
    pub fn max_deviation(&self, table: &SpectrumTable) -> Result<f64> {
        if table.d != self.d || table.arity != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.probs.len(),
                got: table.coeffs.len(),
            });
        }
        let (q, q_above) = table.probabilities();
        Ok(self
            .probs
            .iter()
            .zip(&q)
            .map(|(p, q)| (p - q).abs())
            .fold((self.above - q_above).abs(), f64::max))
    }
}

/// A sampler with its distribution precomputed.
#[derive(Debug, Clone)]
pub struct HermiteSampler {
    dist: SamplerDistribution,
    index: WeightedIndex<f64>,
    attempt_cap: u64,
}

/// Result of a postselected draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostselectedSample {
    /// The measured outcome.
    pub outcome: SampleOutcome,
    /// Attempts used, the accepted one included.
    pub attempts: u64,
}

/// Attempt cap factor: at most `⌈64·κ⌉` postselection attempts, with `κ`
/// the larger of the declared distortion and `1/(2·success probability)`,
/// so a run of failures hits the cap with probability about `e^{−32}`.
pub const ATTEMPT_CAP_FACTOR: f64 = 64.0;

impl HermiteSampler {
    fn from_distribution(dist: SamplerDistribution, kappa: f64) -> Result<Self> {
        // The cap assumes a success probability of at least 1/(2κ). The grid
        // fixes the true probability, so κ is raised until that holds.
        let measured = 0.5 / dist.success_probability;
        let index = WeightedIndex::new(&dist.extended)
            .map_err(|e| Error::InvalidArgument(format!("degenerate sampling distribution: {e}")))?;
        Ok(Self {
            dist,
            index,
            attempt_cap: (ATTEMPT_CAP_FACTOR * kappa.max(measured).max(1.0)).ceil() as u64,
        })
    }

    /// Boolean sampler; rejects functions that take a value other than
    /// `±1` on the grid.
    pub fn boolean(f: &OracleFunction, transform: &AxisTransform) -> Result<Self> {
        if !f.is_boolean() {
            return Err(Error::InvalidArgument(format!(
                "function '{}' is not declared ±1-valued",
                f.label()
            )));
        }
        let dist = sampler_distribution(f, transform)?;
        // A ±1 function has B = 1 and full success probability; anything
        // else means the declaration was wrong.
        if (dist.scale - 1.0).abs() > 1e-12 || dist.success_probability < 1.0 - 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "function '{}' takes values other than ±1 on the grid",
                f.label()
            )));
        }
        Self::from_distribution(dist, 1.0)
    }

    /// General sampler with postselection.
    pub fn general(f: &OracleFunction, transform: &AxisTransform) -> Result<Self> {
        let dist = sampler_distribution(f, transform)?;
        Self::from_distribution(dist, f.kappa())
    }

    /// The exact distribution being sampled.
    pub fn distribution(&self) -> &SamplerDistribution {
        &self.dist
    }

    /// Attempt cap of the postselection loop.
    pub fn attempt_cap(&self) -> u64 {
        self.attempt_cap
    }

    /// One measurement of the (accepted) state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampleOutcome {
        self.dist.outcome(self.index.sample(rng))
    }

    /// Repeats the rotate-and-measure step until the ancilla reads 1, then
    /// measures. Exceeding the attempt cap is a reported failure.
    pub fn sample_postselected<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PostselectedSample> {
        for attempt in 1..=self.attempt_cap {
            if rng.random_bool(self.dist.success_probability) {
                return Ok(PostselectedSample {
                    outcome: self.sample(rng),
                    attempts: attempt,
                });
            }
        }
        Err(Error::BudgetExceeded(format!(
            "postselection failed {} times in a row",
            self.attempt_cap
        )))
    }
}

/// One boolean Hermite sample.
pub fn boolean_hermite_sample<R: Rng + ?Sized>(
    f: &OracleFunction,
    transform: &AxisTransform,
    rng: &mut R,
) -> Result<SampleOutcome> {
    Ok(HermiteSampler::boolean(f, transform)?.sample(rng))
}

/// One general Hermite sample with postselection.
pub fn general_hermite_sample<R: Rng + ?Sized>(
    f: &OracleFunction,
    transform: &AxisTransform,
    rng: &mut R,
) -> Result<PostselectedSample> {
    HermiteSampler::general(f, transform)?.sample_postselected(rng)
}

/// Empirical outcome counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Number of variables.
    pub arity: usize,
    /// Cutoff `D`.
    pub d: usize,
    /// Counts per `v`, row-major.
    pub counts: Vec<u64>,
    /// Count of above-cutoff outcomes.
    pub above: u64,
}

impl Histogram {
    /// Empty histogram over `[0, d]ⁿ`.
    pub fn new(arity: usize, d: usize) -> Self {
        Self {
            arity,
            d,
            counts: alloc::vec![0; (d + 1).pow(arity as u32)],
            above: 0,
        }
    }

    /// Records one outcome; indices outside `[0, d]ⁿ` count as above.
    pub fn record(&mut self, outcome: &SampleOutcome) {
        match outcome {
            SampleOutcome::Index(s) if s.v.len() == self.arity && s.v.iter().all(|&k| k <= self.d) => {
                let i = s.v.iter().fold(0, |acc, &k| acc * (self.d + 1) + k);
                self.counts[i] += 1;
            }
            _ => self.above += 1,
        }
    }

    /// Total recorded.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.above
    }

    /// Empirical probabilities and above-cutoff frequency.
    pub fn frequencies(&self) -> (Vec<f64>, f64) {
        let t = self.total().max(1) as f64;
        (
            self.counts.iter().map(|&c| c as f64 / t).collect(),
            self.above as f64 / t,
        )
    }
}

/// `½(Σ_v |p_v − q_v| + |p_above − q_above|)`.
pub fn tv_between(p: &[f64], p_above: f64, q: &[f64], q_above: f64) -> f64 {
    0.5 * (p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() + (p_above - q_above).abs())
}

/// Total variation between an empirical histogram and a spectrum table.
pub fn tv_distance(hist: &Histogram, table: &SpectrumTable) -> Result<f64> {
    if hist.d != table.d || hist.arity != table.arity {
        return Err(Error::DimensionMismatch {
            expected: table.coeffs.len(),
            got: hist.counts.len(),
        });
    }
    let (p, pa) = hist.frequencies();
    let (q, qa) = table.probabilities();
    Ok(tv_between(&p, pa, &q, qa))
}

/// Suggested grid size from `M = max{2L·2^P·P/C, 40γ·D·log₂(2D)}` with
/// `C = γ = 1` and the remaining unspecified factor taken as 1. The result
/// is rounded up to a power of two.
pub fn suggest_grid_size(l: f64, p: u32, d: usize) -> usize {
    let a = 2.0 * l * libm::ldexp(1.0, p as i32) * p as f64;
    let b = 40.0 * d as f64 * (2.0 * d.max(1) as f64).log2();
    (a.max(b).ceil() as usize).max(8).next_power_of_two()
}
