//! Gaussian Goldreich–Levin: prefix-tree search for every multi-index
//! with `|f̂(v)| ≥ τ`.
//!
//! Level `k` holds prefixes `(a₁, …, a_k)`. Each is extended by every
//! `a ≤ m`, and a child survives when its weight estimate (accurate to
//! `±τ²/4`) reaches `τ²/2`. Surviving full-length prefixes form the list.
//!
//! Two weight sources share the search logic:
//! - classical: paired Monte-Carlo draws of `f`;
//! - sampled: prefix frequencies in a pool of Hermite samples, scaled by
//!   `‖f‖²`.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::weights::{child_weights, weight_sample_count};
use crate::hermite_sampling::{HermiteSampler, OracleFunction, SampleOutcome, SpectrumTable};
use crate::{Error, Result};

/// Search parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GglConfig {
    /// Threshold `τ ∈ (0, 1)`.
    pub tau: f64,
    /// Overall failure probability `δ`.
    pub delta: f64,
    /// Variance proxy `γ_f²` (clamped below at 1).
    pub gamma_sq: f64,
    /// Per-coordinate degree cap `m`; `None` means `⌈4γ²/τ⌉ + 4`.
    pub degree_cap: Option<usize>,
    /// Maximum number of weight estimates before giving up.
    pub node_budget: usize,
}

impl GglConfig {
    /// Defaults for threshold `τ` and failure probability `δ`, with `γ² = 1`.
    pub fn new(tau: f64, delta: f64) -> Self {
        Self {
            tau,
            delta,
            gamma_sq: 1.0,
            degree_cap: None,
            node_budget: 100_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need τ, δ ∈ (0, 1), got τ = {}, δ = {}",
                self.tau, self.delta
            )));
        }
        Ok(())
    }

    /// `γ²` actually used.
    pub fn gamma_sq_used(&self) -> f64 {
        self.gamma_sq.max(1.0)
    }

    /// Degree cap `m`.
    pub fn cap(&self) -> usize {
        self.degree_cap
            .unwrap_or_else(|| (4.0 * self.gamma_sq_used() / self.tau).ceil() as usize + 4)
    }

    /// Largest list the retention threshold allows: `⌊4/τ²⌋`.
    pub fn list_bound(&self) -> usize {
        (4.0 / (self.tau * self.tau)).floor() as usize
    }

    /// Estimation accuracy `τ²/4`.
    pub fn accuracy(&self) -> f64 {
        self.tau * self.tau / 4.0
    }

    /// Per-estimate failure probability after a union bound over at most
    /// `n·⌊4/τ²⌋·(m+1)` estimates.
    pub fn node_delta(&self, n: usize) -> f64 {
        self.delta / (n.max(1) * self.list_bound().max(1) * (self.cap() + 1)) as f64
    }
}

/// Which weight source ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GglMode {
    /// Paired Monte-Carlo draws of `f`.
    Classical,
    /// Hermite-sample prefix frequencies.
    Sampled,
}

/// Result of a search.
#[derive(Debug, Clone, PartialEq)]
pub struct GglOutcome {
    /// Found multi-indices with their weight estimates.
    pub list: Vec<(Vec<usize>, f64)>,
    /// Function queries (evaluations, or sampler attempts).
    pub queries: u64,
    /// Weight estimates made.
    pub estimates: usize,
    /// Degree cap used.
    pub degree_cap: usize,
    /// Whether some level had more survivors than `⌊4/τ²⌋` and was cut to
    /// the largest estimates.
    pub truncated: bool,
    /// Whether the node budget ran out (the list is then partial).
    pub failed: bool,
    /// Which weight source ran.
    pub mode: GglMode,
}

impl GglOutcome {
    /// Found multi-indices.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        self.list.iter().map(|(v, _)| v.clone()).collect()
    }
}

/// Weight source for the prefix search.
trait PrefixWeights {
    /// Estimates for children `a = 0..=cap` of `prefix`.
    fn children(&mut self, prefix: &[usize], cap: usize) -> Result<Vec<f64>>;
    fn queries(&self) -> u64;
}

struct Classical<'a, R: Rng + ?Sized> {
    f: &'a OracleFunction,
    samples: usize,
    delta: f64,
    rng: &'a mut R,
    queries: u64,
}

impl<R: Rng + ?Sized> PrefixWeights for Classical<'_, R> {
    fn children(&mut self, prefix: &[usize], cap: usize) -> Result<Vec<f64>> {
        self.queries += 2 * self.samples as u64;
        Ok(child_weights(self.f, prefix, cap, self.samples, self.delta, self.rng)?
            .into_iter()
            .map(|(m, _)| m)
            .collect())
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

struct Sampled {
    pool: Vec<Vec<Option<usize>>>,
    norm_sq: f64,
    queries: u64,
}

impl PrefixWeights for Sampled {
    fn children(&mut self, prefix: &[usize], cap: usize) -> Result<Vec<f64>> {
        let k = prefix.len();
        let mut counts = alloc::vec![0usize; cap + 1];
        for v in &self.pool {
            if v[..k].iter().zip(prefix).all(|(c, &a)| *c == Some(a)) {
                if let Some(a) = v[k] {
                    if a <= cap {
                        counts[a] += 1;
                    }
                }
            }
        }
        let total = self.pool.len().max(1) as f64;
        Ok(counts.iter().map(|&c| self.norm_sq * c as f64 / total).collect())
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

fn search(n: usize, config: &GglConfig, source: &mut dyn PrefixWeights, mode: GglMode) -> Result<GglOutcome> {
    let cap = config.cap();
    let keep = config.tau * config.tau / 2.0;
    let bound = config.list_bound();
    let mut frontier: Vec<(Vec<usize>, f64)> = alloc::vec![(Vec::new(), f64::INFINITY)];
    let (mut estimates, mut truncated, mut failed) = (0usize, false, false);
    for _level in 0..n {
        let mut next = Vec::new();
        for (prefix, _) in &frontier {
            if estimates + cap + 1 > config.node_budget {
                failed = true;
                break;
            }
            let w = source.children(prefix, cap)?;
            estimates += w.len();
            for (a, &wa) in w.iter().enumerate() {
                // Ties at the threshold are kept.
                if wa >= keep {
                    let mut child = prefix.clone();
                    child.push(a);
                    next.push((child, wa));
                }
            }
        }
        if next.len() > bound {
            truncated = true;
            next.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            next.truncate(bound);
        }
        frontier = next;
        if failed || frontier.is_empty() {
            break;
        }
    }
    if failed {
        frontier.retain(|(v, _)| v.len() == n);
    }
    frontier.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(GglOutcome {
        list: frontier,
        queries: source.queries(),
        estimates,
        degree_cap: cap,
        truncated,
        failed,
        mode,
    })
}

/// Classical search: weights from `⌈γ²/(τ²/4)²·ln(2/δ′)⌉` paired draws per
/// expanded node, shared by its children.
pub fn gaussian_goldreich_levin<R: Rng + ?Sized>(
    f: &OracleFunction,
    config: &GglConfig,
    rng: &mut R,
) -> Result<GglOutcome> {
    config.validate()?;
    let n = f.arity();
    let delta = config.node_delta(n);
    let samples = weight_sample_count(config.gamma_sq_used(), config.accuracy(), delta)?;
    let mut source = Classical {
        f,
        samples,
        delta,
        rng,
        queries: 0,
    };
    search(n, config, &mut source, GglMode::Classical)
}

/// Pool size for the sampled search: Hoeffding for frequencies scaled by
/// `‖f‖²`, `⌈‖f‖⁴·ln(2/δ′)/(2(τ²/4)²)⌉`.
pub fn sampled_pool_size(config: &GglConfig, n: usize, norm_sq: f64) -> usize {
    let e = config.accuracy();
    (norm_sq * norm_sq * (2.0 / config.node_delta(n)).ln() / (2.0 * e * e)).ceil() as usize
}

/// Sampled search: one pool of Hermite samples answers every prefix
/// weight as `‖f‖²` times the prefix frequency. The sampler's cutoff must
/// reach the degree cap.
pub fn gaussian_goldreich_levin_sampled<R: Rng + ?Sized>(
    sampler: &HermiteSampler,
    norm_sq: f64,
    config: &GglConfig,
    rng: &mut R,
) -> Result<GglOutcome> {
    config.validate()?;
    let dist = sampler.distribution();
    if dist.d < config.cap() {
        return Err(Error::InvalidArgument(format!(
            "sampler cutoff D = {} is below the degree cap m = {}",
            dist.d,
            config.cap()
        )));
    }
    let n = dist.arity;
    let size = sampled_pool_size(config, n, norm_sq);
    let mut pool = Vec::with_capacity(size);
    let mut queries = 0;
    for _ in 0..size {
        let s = sampler.sample_postselected(rng)?;
        queries += s.attempts;
        pool.push(match s.outcome {
            SampleOutcome::Index(h) => h.v.into_iter().map(Some).collect(),
            SampleOutcome::AboveCutoff(p) => p,
        });
    }
    let mut source = Sampled { pool, norm_sq, queries };
    search(n, config, &mut source, GglMode::Sampled)
}

/// Checks a list against a reference spectrum on `[0, m]ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GglAudit {
    /// Every `v` with `|f̂(v)| ≥ τ` is listed.
    pub complete: bool,
    /// Every listed `v` has `|f̂(v)| ≥ τ/2`.
    pub sound: bool,
    /// `|L| ≤ 4/τ²`.
    pub within_bound: bool,
}

/// Audits `outcome` against `truth` (computed to at least the degree cap).
pub fn audit(outcome: &GglOutcome, truth: &SpectrumTable, tau: f64) -> GglAudit {
    let listed = outcome.indices();
    let in_range = |v: &[usize]| v.iter().all(|&k| k <= truth.d);
    let complete = truth
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() >= tau)
        .all(|(i, _)| listed.contains(&truth.multi_index(i)));
    let sound = listed.iter().all(|v| in_range(v) && truth.get(v).abs() >= tau / 2.0);
    GglAudit {
        complete,
        sound,
        within_bound: listed.len() as f64 <= 4.0 / (tau * tau),
    }
}
