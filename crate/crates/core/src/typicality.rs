//! Weakly typical and cost-typical sets for a grid density, and the uniform
//! law on their intersection.
//!
//! Membership of a tuple depends only on the cells its coordinates fall in,
//! with the cost of a cell taken at its midpoint. Cells sharing both the
//! density value and the cost form a *class*; membership then depends only on
//! the *type* of a tuple (how many coordinates land in each class). Exact
//! volumes, masses and marginals are sums over types, kept in log space.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::block::{checked_pow, BlockLaw, BlockModel, CellPartition};
use crate::density::{self, CostSpec, GridDensity};
use crate::error::{validation, Error, Result};
use crate::exec::ExecPolicy;
use crate::numeric::{self, LnFactorial};
use crate::rng;

pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e7;
/// Rejection mode gives up below this acceptance rate.
pub const ACCEPTANCE_FLOOR: f64 = 1e-6;
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;
/// Monte Carlo work is split into this many independently seeded shards.
pub const SHARDS: usize = 64;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypicalSpec {
    pub f: GridDensity,
    pub n: usize,
    pub eps: f64,
    pub cost: CostSpec,
}

/// Cells with equal density value and equal midpoint cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CellClass {
    pub ln_f: f64,
    pub cost: f64,
    pub cells: Vec<usize>,
}

impl TypicalSpec {
    pub fn new(f: GridDensity, n: usize, eps: f64, cost: CostSpec) -> Result<Self> {
        let spec = TypicalSpec { f, n, eps, cost };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.f.grid().same_as(&self.cost.grid) {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.f.grid(), self.cost.grid)));
        }
        if self.n == 0 || self.n > u16::MAX as usize {
            return validation(format!("block length must be in 1..=65535, got {}", self.n));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return validation(format!("ε must be positive, got {}", self.eps));
        }
        self.cost.validate()
    }

    /// Shannon entropy `h(f)`.
    pub fn h(&self) -> f64 {
        density::shannon_entropy(&self.f).nats
    }

    /// `∫ f r` with the cost at cell midpoints.
    pub fn mean_cost(&self) -> f64 {
        density::cost_expectation(&self.f, &self.cost.cost).mean
    }

    pub fn classes(&self) -> Vec<CellClass> {
        let costs = self.cost.cell_costs();
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        let mut classes: Vec<CellClass> = Vec::new();
        for (i, (&w, &r)) in self.f.weights().iter().zip(&costs).enumerate() {
            if w <= 0.0 {
                continue;
            }
            let key = (w.to_bits(), r.to_bits());
            match index.get(&key) {
                Some(&j) => classes[j].cells.push(i),
                None => {
                    index.insert(key, classes.len());
                    classes.push(CellClass { ln_f: w.ln(), cost: r, cells: vec![i] });
                }
            }
        }
        classes
    }

    pub(crate) fn bands(&self) -> Bands {
        Bands::new(self.h(), self.mean_cost(), self.eps)
    }

    /// `ln(1−ε) + n(h − ε)`: the cardinality lower bound that holds for all
    /// large `n`.
    pub fn card_bound(&self) -> f64 {
        card_bound(self.h(), self.eps, self.n)
    }
}

pub fn card_bound(h: f64, eps: f64, n: usize) -> f64 {
    (1.0 - eps).ln() + n as f64 * (h - eps)
}

/// `ln((1/(1−ε)) e^{2nε})`: log of the factor by which the block marginals
/// are dominated by products of `f`.
pub fn marginal_log_factor(eps: f64, n: usize) -> f64 {
    -(1.0 - eps).ln() + 2.0 * n as f64 * eps
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Bands {
    h: f64,
    mu: f64,
    eps: f64,
}

impl Bands {
    fn new(h: f64, mu: f64, eps: f64) -> Self {
        Bands { h, mu, eps }
    }

    /// Closed band `−n(h+ε) ≤ Σ ln f ≤ −n(h−ε)`, widened by a rounding slack.
    fn weak(&self, n: usize, sum_ln_f: f64) -> bool {
        let nf = n as f64;
        let slack = 1e-12 * nf * (1.0 + self.h.abs() + self.eps);
        sum_ln_f >= -nf * (self.h + self.eps) - slack && sum_ln_f <= -nf * (self.h - self.eps) + slack
    }

    /// Strict band `|Σ r / n − μ| < ε`.
    fn cost(&self, n: usize, sum_r: f64) -> bool {
        (sum_r / n as f64 - self.mu).abs() < self.eps
    }

    fn member(&self, n: usize, sum_ln_f: f64, sum_r: f64) -> bool {
        self.weak(n, sum_ln_f) && self.cost(n, sum_r)
    }
}

fn letter_sums(x: &[f64], spec: &TypicalSpec) -> Option<(f64, f64)> {
    let grid = spec.f.grid();
    let mut ln_f = 0.0;
    let mut r = 0.0;
    for &v in x {
        let cell = grid.cell_of(v)?;
        let w = spec.f.weights()[cell];
        if w <= 0.0 || !spec.cost.support.contains(v) {
            return None;
        }
        ln_f += w.ln();
        r += spec.cost.eval(grid.midpoint(cell));
    }
    Some((ln_f, r))
}

/// `e^{−n(h+ε)} ≤ ∏ f(x_k) ≤ e^{−n(h−ε)}` with `n = x.len()`. Points where
/// `f` vanishes (or outside the grid) make the product zero.
pub fn is_weakly_typical(x: &[f64], spec: &TypicalSpec) -> bool {
    letter_sums(x, spec).is_some_and(|(l, _)| spec.bands().weak(x.len(), l))
}

/// `|n⁻¹ Σ r(x_k) − ∫ f r| < ε`.
pub fn is_cost_typical(x: &[f64], spec: &TypicalSpec) -> bool {
    let grid = spec.f.grid();
    let mut sum = 0.0;
    for &v in x {
        match grid.cell_of(v) {
            Some(c) => sum += spec.cost.eval(grid.midpoint(c)),
            None => return false,
        }
    }
    spec.bands().cost(x.len(), sum)
}

pub fn is_member(x: &[f64], spec: &TypicalSpec) -> bool {
    is_weakly_typical(x, spec) && is_cost_typical(x, spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Cell sampler for IID draws from `f`.
struct CellSampler {
    cdf: Vec<f64>,
}

impl CellSampler {
    fn new(f: &GridDensity) -> Self {
        let mut acc = 0.0;
        let cdf = f
            .cell_masses()
            .into_iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        CellSampler { cdf }
    }

    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

fn shard_sizes(total: usize) -> Vec<usize> {
    let shards = SHARDS.min(total.max(1));
    (0..shards).map(|s| total / shards + usize::from(s < total % shards)).collect()
}

/// Monte Carlo estimate of `Pr[(X_1..X_n) ∈ T ∩ A]` under IID `f`.
pub fn typical_mass(spec: &TypicalSpec, samples: usize, seed: u64, policy: ExecPolicy) -> Result<MassEstimate> {
    spec.validate()?;
    if samples == 0 {
        return validation("at least one sample is required");
    }
    let bands = spec.bands();
    let sampler = CellSampler::new(&spec.f);
    let ln_f: Vec<f64> = spec.f.weights().iter().map(|w| w.ln()).collect();
    let costs = spec.cost.cell_costs();
    let sizes = shard_sizes(samples);
    let hits: usize = policy
        .map_indexed(sizes.len(), |s| {
            let mut rng = rng::stream(seed, s as u64);
            (0..sizes[s])
                .filter(|_| {
                    let (mut l, mut r) = (0.0, 0.0);
                    for _ in 0..spec.n {
                        let c = sampler.draw(&mut rng);
                        l += ln_f[c];
                        r += costs[c];
                    }
                    bands.member(spec.n, l, r)
                })
                .count()
        })
        .into_iter()
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(MassEstimate { estimate: p, std_error: (p * (1.0 - p) / samples as f64).sqrt(), samples })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    Enumerate,
    Rejection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    /// Enumerate when the number of types fits the budget, else reject.
    #[default]
    Auto,
    Enumerate,
    Rejection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub mode: ModeChoice,
    /// Largest number of types enumerated.
    pub budget: f64,
    /// Importance samples for the rejection-mode volume estimate.
    pub rejection_samples: usize,
    pub seed: u64,
    pub max_attempts: u64,
}

impl Default for BlockConfig {
    fn default() -> Self {
        BlockConfig {
            mode: ModeChoice::Auto,
            budget: DEFAULT_ENUMERATION_BUDGET,
            rejection_samples: 200_000,
            seed: 0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

/// A type (class counts) contained in the typical intersection.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberType {
    pub counts: Vec<u16>,
    /// ln of the number of cell tuples of this type.
    pub ln_tuples: f64,
}

/// The uniform density on `T ∩ A`.
#[derive(Clone, Debug)]
pub struct TypicalBlockDensity {
    pub spec: TypicalSpec,
    pub h: f64,
    pub mean_cost: f64,
    /// ln of the Lebesgue measure of the member set.
    pub log_volume: f64,
    pub sampler_mode: SamplerMode,
    pub card_bound: f64,
    /// Whether `log_volume ≥ card_bound`.
    pub n_threshold_ok: bool,
    pub classes: Vec<CellClass>,
    /// Enumerate mode only.
    pub members: Vec<MemberType>,
    /// Enumerate mode only: ln of the number of member cell tuples.
    pub ln_member_tuples: f64,
    /// Enumerate mode only: `Pr[X ∈ T ∩ A]` under IID `f`.
    pub exact_mass: Option<f64>,
    /// Rejection mode only.
    pub acceptance: Option<f64>,
    /// Rejection mode only: relative standard error of the volume estimate.
    pub volume_rel_stderr: Option<f64>,
    member_cdf: Vec<f64>,
    max_attempts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub n: usize,
    pub eps: f64,
    pub h: f64,
    pub mean_cost: f64,
    pub log_volume: f64,
    pub sampler_mode: SamplerMode,
    pub card_bound: f64,
    pub n_threshold_ok: bool,
    pub classes: usize,
    pub member_types: Option<usize>,
    pub exact_mass: Option<f64>,
    pub acceptance: Option<f64>,
    pub volume_rel_stderr: Option<f64>,
}

impl TypicalBlockDensity {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn summary(&self) -> BlockSummary {
        BlockSummary {
            n: self.spec.n,
            eps: self.spec.eps,
            h: self.h,
            mean_cost: self.mean_cost,
            log_volume: self.log_volume,
            sampler_mode: self.sampler_mode,
            card_bound: self.card_bound,
            n_threshold_ok: self.n_threshold_ok,
            classes: self.classes.len(),
            member_types: (self.sampler_mode == SamplerMode::Enumerate).then_some(self.members.len()),
            exact_mass: self.exact_mass,
            acceptance: self.acceptance,
            volume_rel_stderr: self.volume_rel_stderr,
        }
    }

    /// `h_α(f_n)`: the block is uniform, so every order gives `ln |T ∩ A|`.
    pub fn entropy(&self) -> f64 {
        self.log_volume
    }

    fn require_enumerated(&self, what: &str) -> Result<()> {
        if self.sampler_mode == SamplerMode::Enumerate {
            Ok(())
        } else {
            Err(Error::Mode(what.to_string()))
        }
    }

    /// Largest `n⁻¹ Σ r` over member tuples.
    pub fn max_member_average_cost(&self) -> Result<f64> {
        self.require_enumerated("member cost scan")?;
        Ok(self
            .members
            .iter()
            .map(|m| type_cost(&m.counts, &self.classes) / self.spec.n as f64)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `E[n⁻¹ Σ r(X_k)]` under the block, which by exchangeability is also
    /// `E[r(X_k)]` for every `k`.
    pub fn mean_average_cost(&self) -> Result<f64> {
        self.require_enumerated("member cost average")?;
        let n = self.spec.n as f64;
        Ok(numeric::sum(self.members.iter().map(|m| {
            (m.ln_tuples - self.ln_member_tuples).exp() * type_cost(&m.counts, &self.classes) / n
        })))
    }
}

impl BlockModel for TypicalBlockDensity {
    fn n(&self) -> usize {
        self.spec.n
    }

    fn block_entropy(&self, _alpha: f64) -> Result<f64> {
        Ok(self.log_volume)
    }

    fn prefix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        if rho == self.spec.n {
            return Ok(self.log_volume);
        }
        Ok(prefix_law(self, rho)?.entropy(alpha))
    }

    fn suffix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        // the member set is permutation invariant
        self.prefix_entropy(rho, alpha)
    }

    fn sample_block(&self, rng: &mut rng::Rng) -> Result<Vec<f64>> {
        sample_typical_uniform(self, rng)
    }

    fn dense_law(&self, max_tuples: usize) -> Result<BlockLaw> {
        to_block_law(self, max_tuples)
    }
}

fn type_ln_f(counts: &[u16], classes: &[CellClass]) -> f64 {
    counts.iter().zip(classes).map(|(&c, k)| c as f64 * k.ln_f).sum()
}

fn type_cost(counts: &[u16], classes: &[CellClass]) -> f64 {
    counts.iter().zip(classes).map(|(&c, k)| c as f64 * k.cost).sum()
}

fn type_ln_tuples(counts: &[u16], classes: &[CellClass], lf: &LnFactorial) -> f64 {
    lf.ln_multinomial(counts)
        + counts.iter().zip(classes).map(|(&c, k)| c as f64 * (k.cells.len() as f64).ln()).sum::<f64>()
}

pub fn build_typical_block(spec: &TypicalSpec) -> Result<TypicalBlockDensity> {
    build_typical_block_with(spec, &BlockConfig::default(), ExecPolicy::default())
}

pub fn build_typical_block_with(
    spec: &TypicalSpec,
    cfg: &BlockConfig,
    policy: ExecPolicy,
) -> Result<TypicalBlockDensity> {
    spec.validate()?;
    let classes = spec.classes();
    let types = numeric::compositions(spec.n, classes.len());
    let mode = match cfg.mode {
        ModeChoice::Enumerate => {
            if types > cfg.budget {
                return Err(Error::EnumerationBudget { needed: types, budget: cfg.budget });
            }
            SamplerMode::Enumerate
        }
        ModeChoice::Rejection => SamplerMode::Rejection,
        ModeChoice::Auto if types <= cfg.budget => SamplerMode::Enumerate,
        ModeChoice::Auto => SamplerMode::Rejection,
    };
    match mode {
        SamplerMode::Enumerate => enumerate_block(spec, classes, cfg),
        SamplerMode::Rejection => rejection_block(spec, classes, cfg, policy),
    }
}

fn enumerate_block(spec: &TypicalSpec, classes: Vec<CellClass>, cfg: &BlockConfig) -> Result<TypicalBlockDensity> {
    let n = spec.n;
    let bands = spec.bands();
    let lf = LnFactorial::new(n);
    let w = spec.f.cell_width();
    let mut members = Vec::new();
    let mut mass_logs = Vec::new();
    numeric::for_each_composition(n, classes.len(), |counts| {
        let l = type_ln_f(counts, &classes);
        if bands.member(n, l, type_cost(counts, &classes)) {
            let ln_tuples = type_ln_tuples(counts, &classes, &lf);
            // each tuple has probability ∏ f·w
            mass_logs.push(ln_tuples + l + n as f64 * w.ln());
            members.push(MemberType { counts: counts.to_vec(), ln_tuples });
        }
    });
    if members.is_empty() {
        return Err(Error::EmptyTypicalSet { n, eps: spec.eps });
    }
    let ln_counts: Vec<f64> = members.iter().map(|m| m.ln_tuples).collect();
    let ln_member_tuples = numeric::log_sum_exp(&ln_counts);
    let mut acc = 0.0;
    let member_cdf = ln_counts
        .iter()
        .map(|l| {
            acc += (l - ln_member_tuples).exp();
            acc
        })
        .collect();
    let log_volume = ln_member_tuples + n as f64 * w.ln();
    let card_bound = spec.card_bound();
    Ok(TypicalBlockDensity {
        h: spec.h(),
        mean_cost: spec.mean_cost(),
        log_volume,
        sampler_mode: SamplerMode::Enumerate,
        card_bound,
        n_threshold_ok: log_volume >= card_bound,
        classes,
        members,
        ln_member_tuples,
        exact_mass: Some(numeric::log_sum_exp(&mass_logs).exp().min(1.0)),
        acceptance: None,
        volume_rel_stderr: None,
        member_cdf,
        max_attempts: cfg.max_attempts,
        spec: spec.clone(),
    })
}

fn rejection_block(
    spec: &TypicalSpec,
    classes: Vec<CellClass>,
    cfg: &BlockConfig,
    policy: ExecPolicy,
) -> Result<TypicalBlockDensity> {
    let n = spec.n;
    let bands = spec.bands();
    let sampler = CellSampler::new(&spec.f);
    let ln_f: Vec<f64> = spec.f.weights().iter().map(|w| w.ln()).collect();
    let costs = spec.cost.cell_costs();
    let total = cfg.rejection_samples.max(1);
    let sizes = shard_sizes(total);
    // per shard: (hits, ln Σ 1/q, ln Σ 1/q²) over member draws
    let shards = policy.map_indexed(sizes.len(), |s| {
        let mut rng = rng::stream(rng::derive(cfg.seed, 0x766f6c), s as u64);
        let mut w1 = Vec::new();
        for _ in 0..sizes[s] {
            let (mut l, mut r) = (0.0, 0.0);
            for _ in 0..n {
                let c = sampler.draw(&mut rng);
                l += ln_f[c];
                r += costs[c];
            }
            if bands.member(n, l, r) {
                w1.push(-l);
            }
        }
        let w2: Vec<f64> = w1.iter().map(|v| 2.0 * v).collect();
        (w1.len(), numeric::log_sum_exp(&w1), numeric::log_sum_exp(&w2))
    });
    let hits: usize = shards.iter().map(|s| s.0).sum();
    let acceptance = hits as f64 / total as f64;
    if acceptance < ACCEPTANCE_FLOOR || hits == 0 {
        return Err(Error::Starvation { acceptance, floor: ACCEPTANCE_FLOOR });
    }
    let ln_n = (total as f64).ln();
    let ln_m1 = numeric::log_sum_exp(&shards.iter().map(|s| s.1).collect::<Vec<_>>()) - ln_n;
    let ln_m2 = numeric::log_sum_exp(&shards.iter().map(|s| s.2).collect::<Vec<_>>()) - ln_n;
    let rel_var = ((ln_m2 - 2.0 * ln_m1).exp() - 1.0).max(0.0);
    let card_bound = spec.card_bound();
    Ok(TypicalBlockDensity {
        h: spec.h(),
        mean_cost: spec.mean_cost(),
        log_volume: ln_m1,
        sampler_mode: SamplerMode::Rejection,
        card_bound,
        n_threshold_ok: ln_m1 >= card_bound,
        classes,
        members: Vec::new(),
        ln_member_tuples: f64::NAN,
        exact_mass: None,
        acceptance: Some(acceptance),
        volume_rel_stderr: Some((rel_var / total as f64).sqrt()),
        member_cdf: Vec::new(),
        max_attempts: cfg.max_attempts,
        spec: spec.clone(),
    })
}

/// Cells of one tuple drawn uniformly from the member cell tuples.
pub fn sample_cells<R: rand::Rng + ?Sized>(block: &TypicalBlockDensity, rng: &mut R) -> Result<Vec<usize>> {
    let n = block.spec.n;
    match block.sampler_mode {
        SamplerMode::Enumerate => {
            let u: f64 = rng.random::<f64>() * block.member_cdf[block.member_cdf.len() - 1];
            let t = block.member_cdf.partition_point(|&c| c <= u).min(block.members.len() - 1);
            let mut labels = Vec::with_capacity(n);
            for (j, &c) in block.members[t].counts.iter().enumerate() {
                labels.extend(std::iter::repeat_n(j, c as usize));
            }
            labels.shuffle(rng);
            Ok(labels
                .into_iter()
                .map(|j| {
                    let cells = &block.classes[j].cells;
                    cells[rng.random_range(0..cells.len())]
                })
                .collect())
        }
        SamplerMode::Rejection => {
            let bands = block.spec.bands();
            let sampler = CellSampler::new(&block.spec.f);
            let weights = block.spec.f.weights();
            let costs = block.spec.cost.cell_costs();
            let ln_c = -(n as f64) * (block.h + block.spec.eps);
            for _ in 0..block.max_attempts {
                let cells: Vec<usize> = (0..n).map(|_| sampler.draw(rng)).collect();
                let l: f64 = cells.iter().map(|&c| weights[c].ln()).sum();
                let r: f64 = cells.iter().map(|&c| costs[c]).sum();
                if bands.member(n, l, r) && rng.random::<f64>() < (ln_c - l).min(0.0).exp() {
                    return Ok(cells);
                }
            }
            Err(Error::Sampling { attempts: block.max_attempts })
        }
    }
}

/// One tuple drawn uniformly from `T ∩ A`.
pub fn sample_typical_uniform<R: rand::Rng + ?Sized>(block: &TypicalBlockDensity, rng: &mut R) -> Result<Vec<f64>> {
    let grid = block.spec.f.grid();
    let w = grid.width();
    Ok(sample_cells(block, rng)?
        .into_iter()
        .map(|c| grid.lo + (c as f64 + rng.random::<f64>()) * w)
        .collect())
}

/// Law of `(X_1, …, X_ρ)` under the uniform block, grouped by prefix type:
/// every cell tuple of a given type has the same probability.
#[derive(Clone, Debug)]
pub struct PrefixLaw {
    pub rho: usize,
    pub cell_width: f64,
    /// `(type, ln #cell tuples of that type, ln probability of each tuple)`
    pub types: Vec<(Vec<u16>, f64, f64)>,
}

impl PrefixLaw {
    /// `h_α(X_1..X_ρ)`, Shannon at `α = 1`.
    pub fn entropy(&self, alpha: f64) -> f64 {
        let ln_vol = self.rho as f64 * self.cell_width.ln();
        if alpha == 1.0 {
            return -numeric::sum(
                self.types.iter().map(|(_, ln_t, ln_p)| (ln_t + ln_p).exp() * (ln_p - ln_vol)),
            );
        }
        let logs: Vec<f64> =
            self.types.iter().map(|(_, ln_t, ln_p)| ln_t + alpha * ln_p + (1.0 - alpha) * ln_vol).collect();
        numeric::log_sum_exp(&logs) / (1.0 - alpha)
    }

    /// Total probability (should be one).
    pub fn mass(&self) -> f64 {
        numeric::sum(self.types.iter().map(|(_, t, p)| (t + p).exp()))
    }
}

/// Exact law of the first `rho` coordinates (enumerate mode). By
/// exchangeability it is also the law of any `rho` coordinates.
pub fn prefix_law(block: &TypicalBlockDensity, rho: usize) -> Result<PrefixLaw> {
    block.require_enumerated("prefix marginals")?;
    let n = block.spec.n;
    if rho == 0 || rho > n {
        return validation(format!("prefix length must be in 1..={n}, got {rho}"));
    }
    let j = block.classes.len();
    let lf = LnFactorial::new(n);
    let mut types = Vec::new();
    numeric::for_each_composition(rho, j, |p| {
        let mut completions = Vec::new();
        for m in &block.members {
            if m.counts.iter().zip(p).all(|(c, q)| c >= q) {
                let rest: Vec<u16> = m.counts.iter().zip(p).map(|(c, q)| c - q).collect();
                completions.push(type_ln_tuples(&rest, &block.classes, &lf));
            }
        }
        if !completions.is_empty() {
            let ln_p = numeric::log_sum_exp(&completions) - block.ln_member_tuples;
            types.push((p.to_vec(), type_ln_tuples(p, &block.classes, &lf), ln_p));
        }
    });
    Ok(PrefixLaw { rho, cell_width: block.spec.f.cell_width(), types })
}

/// `h_α(X_1..X_ρ)` for `ρ = 1..n−1` (index `ρ − 1`).
pub fn prefix_entropies(block: &TypicalBlockDensity, alpha: f64) -> Result<Vec<f64>> {
    (1..block.spec.n).map(|rho| prefix_law(block, rho).map(|l| l.entropy(alpha))).collect()
}

/// Density of `X_1` on each grid cell (enumerate mode).
pub fn first_marginal(block: &TypicalBlockDensity) -> Result<Vec<f64>> {
    let law = prefix_law(block, 1)?;
    let mut out = vec![0.0; block.spec.f.len()];
    for (t, _, ln_p) in &law.types {
        let j = t.iter().position(|&c| c == 1).expect("prefix of length one");
        for &cell in &block.classes[j].cells {
            out[cell] = ln_p.exp() / law.cell_width;
        }
    }
    Ok(out)
}

/// Lower bound `(α/(1−α)) ln((1/(1−ε))e^{2nε}) + ρ h_α(f)` on the prefix
/// entropy, for `α > 1`.
pub fn prefix_entropy_floor(block: &TypicalBlockDensity, rho: usize, alpha: f64) -> Result<f64> {
    let h_alpha = density::renyi_entropy(&block.spec.f, alpha)?.nats;
    Ok(alpha / (1.0 - alpha) * marginal_log_factor(block.spec.eps, block.spec.n) + rho as f64 * h_alpha)
}

/// Dense law on all `cells^n` tuples, built by direct per-tuple membership
/// tests (independent of the type bookkeeping).
pub fn to_block_law(block: &TypicalBlockDensity, max_tuples: usize) -> Result<BlockLaw> {
    let spec = &block.spec;
    let k = spec.f.len();
    let total = checked_pow(k, spec.n)
        .filter(|&t| t <= max_tuples)
        .ok_or(Error::EnumerationBudget { needed: (k as f64).powi(spec.n as i32), budget: max_tuples as f64 })?;
    let bands = spec.bands();
    let ln_f: Vec<f64> = spec.f.weights().iter().map(|w| if *w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
    let costs = spec.cost.cell_costs();
    let mut member = vec![false; total];
    let mut digits = vec![0usize; spec.n];
    for slot in member.iter_mut() {
        let l: f64 = digits.iter().map(|&c| ln_f[c]).sum();
        let r: f64 = digits.iter().map(|&c| costs[c]).sum();
        *slot = l.is_finite() && bands.member(spec.n, l, r);
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < k {
                break;
            }
            *d = 0;
        }
    }
    let count = member.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::EmptyTypicalSet { n: spec.n, eps: spec.eps });
    }
    let p = 1.0 / count as f64;
    let probs = member.into_iter().map(|m| if m { p } else { 0.0 }).collect();
    BlockLaw::new(CellPartition::uniform(&spec.f.grid()), spec.n, probs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    /// `(n, log_volume, card_bound)` per scanned block length.
    pub rows: Vec<(usize, f64, f64)>,
    /// Smallest `n0` such that the bound holds for every scanned `n ≥ n0`.
    pub n_threshold: Option<usize>,
}

/// Scan `n = 1..=n_max` in enumerate mode and record where the cardinality
/// lower bound starts to hold for good.
pub fn find_n_threshold(
    f: &GridDensity,
    eps: f64,
    cost: &CostSpec,
    n_max: usize,
    policy: ExecPolicy,
) -> Result<ThresholdScan> {
    let cfg = BlockConfig { mode: ModeChoice::Enumerate, ..BlockConfig::default() };
    let rows = policy
        .map_indexed(n_max, |i| -> Result<(usize, f64, f64)> {
            let spec = TypicalSpec::new(f.clone(), i + 1, eps, cost.clone())?;
            match build_typical_block_with(&spec, &cfg, ExecPolicy::Sequential) {
                Ok(b) => Ok((i + 1, b.log_volume, b.card_bound)),
                Err(Error::EmptyTypicalSet { .. }) => Ok((i + 1, f64::NEG_INFINITY, spec.card_bound())),
                Err(e) => Err(e),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut n_threshold = None;
    for &(n, v, b) in rows.iter().rev() {
        if v >= b {
            n_threshold = Some(n);
        } else {
            break;
        }
    }
    Ok(ThresholdScan { rows, n_threshold })
}

/// First `n` in `1, 2, 4, …, ≤ n_max` whose estimated typical mass reaches
/// `target`.
#[allow(clippy::too_many_arguments)]
pub fn suggest_n(
    f: &GridDensity,
    eps: f64,
    cost: &CostSpec,
    target: f64,
    samples: usize,
    seed: u64,
    n_max: usize,
    policy: ExecPolicy,
) -> Result<Option<usize>> {
    let mut n = 1;
    while n <= n_max {
        let spec = TypicalSpec::new(f.clone(), n, eps, cost.clone())?;
        if typical_mass(&spec, samples, seed, policy)?.estimate >= target {
            return Ok(Some(n));
        }
        n *= 2;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{CostFn, GridSpec, Support};

    fn two_cell_spec(n: usize, eps: f64) -> TypicalSpec {
        let f = GridDensity::new(0.0, 1.0, vec![1.5, 0.5]).unwrap();
        let cost = CostSpec::new(CostFn::Linear, Support::Interval { lo: 0.0, hi: 1.0 }, f.grid(), 1.0).unwrap();
        TypicalSpec::new(f, n, eps, cost).unwrap()
    }

    fn uniform_spec(cells: usize, n: usize, eps: f64) -> TypicalSpec {
        let f = GridDensity::uniform(0.0, 1.0, cells).unwrap();
        let cost = CostSpec::new(CostFn::Linear, Support::Interval { lo: 0.0, hi: 1.0 }, f.grid(), 1.0).unwrap();
        TypicalSpec::new(f, n, eps, cost).unwrap()
    }

    #[test]
    fn predicate_examples() {
        let u = uniform_spec(1000, 2, 0.1);
        assert!(is_weakly_typical(&[0.3, 0.99], &u));
        assert!(!is_cost_typical(&[0.9, 0.9], &u));
        assert!(is_cost_typical(&[0.45, 0.6], &u));
        assert!(!is_weakly_typical(&[0.3, 1.5], &u));

        let t = two_cell_spec(4, 0.05);
        assert!(!is_weakly_typical(&[0.1, 0.2, 0.3, 0.4], &t));
        // 3 heavy + 1 light: Σ ln f = 3 ln 1.5 + ln 0.5 ≈ 0.5232, band ≈ [0.323, 0.723]
        assert!(is_weakly_typical(&[0.1, 0.2, 0.3, 0.9], &t));

        let c = TypicalSpec { cost: t.cost.clone().with_gamma(1.0), ..t.clone() };
        let constant = TypicalSpec {
            cost: CostSpec::new(CostFn::Constant { value: 3.0 }, Support::Line, c.f.grid(), 5.0).unwrap(),
            ..c
        };
        assert!(is_cost_typical(&[0.0, 1.0, 0.2, 0.7], &constant));
    }

    #[test]
    fn closed_band_boundary() {
        // uniform on [0, 2]: Σ ln f = −n ln 2 = −n h sits inside; choose the
        // two-cell density and ε so that the all-heavy product is on the edge
        let f = GridDensity::new(0.0, 1.0, vec![1.5, 0.5]).unwrap();
        let h = density::shannon_entropy(&f).nats;
        let eps = 1.5f64.ln() + h; // −n(h − ε) = n ln 1.5
        let cost = CostSpec::new(CostFn::Constant { value: 0.0 }, Support::Line, f.grid(), 1.0).unwrap();
        let spec = TypicalSpec::new(f, 3, eps, cost).unwrap();
        assert!(is_weakly_typical(&[0.1, 0.2, 0.3], &spec));
    }

    #[test]
    fn uniform_block_fills_the_cube() {
        let spec = uniform_spec(4, 3, 10.0);
        let b = build_typical_block(&spec).unwrap();
        assert!(b.log_volume.abs() < 1e-12);
        assert_eq!(b.sampler_mode, SamplerMode::Enumerate);
        assert!((b.exact_mass.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_cell_volume_matches_binomial_count() {
        let spec = two_cell_spec(10, 0.1);
        let b = build_typical_block(&spec).unwrap();
        // direct oracle: count heavy-cell occupancies k whose tuples qualify
        let h = spec.h();
        let mu = spec.mean_cost();
        let mut count = 0.0;
        let mut binom = 1.0;
        for k in 0..=10u32 {
            if k > 0 {
                binom *= (10 - k + 1) as f64 / k as f64;
            }
            let l = k as f64 * 1.5f64.ln() + (10 - k) as f64 * 0.5f64.ln();
            let r = (k as f64 * 0.25 + (10 - k) as f64 * 0.75) / 10.0;
            let weak = l >= -10.0 * (h + 0.1) && l <= -10.0 * (h - 0.1);
            if weak && (r - mu).abs() < 0.1 {
                count += binom;
            }
        }
        let oracle = count.ln() + 10.0 * 0.5f64.ln();
        assert!((b.log_volume - oracle).abs() < 1e-9, "{} vs {oracle}", b.log_volume);
        let dense = to_block_law(&b, 1 << 12).unwrap();
        let support = dense.probs().iter().filter(|&&p| p > 0.0).count() as f64;
        assert!((support.ln() - b.ln_member_tuples).abs() < 1e-9);
    }

    #[test]
    fn mass_estimates() {
        let spec = uniform_spec(64, 200, 0.2);
        let m = typical_mass(&spec, 10_000, 7, ExecPolicy::Parallel).unwrap();
        assert!(m.estimate >= 0.95);
        let seq = typical_mass(&spec, 10_000, 7, ExecPolicy::Sequential).unwrap();
        assert_eq!(m, seq);

        let wide = uniform_spec(16, 5, 10.0);
        assert_eq!(typical_mass(&wide, 1000, 1, ExecPolicy::Parallel).unwrap().estimate, 1.0);

        // n = 1: only cells with |x − 1/2| < ε qualify, mass 2ε
        let narrow = uniform_spec(1000, 1, 0.01);
        let m = typical_mass(&narrow, 20_000, 2, ExecPolicy::Parallel).unwrap();
        assert!((m.estimate - 0.02).abs() < 4.0 * m.std_error.max(1e-3));
    }

    #[test]
    fn rejection_volume_agrees_with_enumeration() {
        let spec = two_cell_spec(12, 0.1);
        let exact = build_typical_block(&spec).unwrap();
        let cfg = BlockConfig { mode: ModeChoice::Rejection, seed: 5, ..BlockConfig::default() };
        let est = build_typical_block_with(&spec, &cfg, ExecPolicy::Parallel).unwrap();
        let se = est.volume_rel_stderr.unwrap();
        assert!((est.log_volume - exact.log_volume).abs() < 5.0 * se + 1e-3);
        let seq = build_typical_block_with(&spec, &cfg, ExecPolicy::Sequential).unwrap();
        assert_eq!(est.log_volume, seq.log_volume);
    }

    #[test]
    fn budget_and_starvation() {
        let spec = uniform_spec(64, 8, 0.05);
        let cfg = BlockConfig { mode: ModeChoice::Enumerate, budget: 1e3, ..BlockConfig::default() };
        assert!(matches!(
            build_typical_block_with(&spec, &cfg, ExecPolicy::Sequential),
            Err(Error::EnumerationBudget { .. })
        ));
        let f = GridDensity::uniform(0.0, 1.0, 1000).unwrap();
        let cost = CostSpec::new(CostFn::Quadratic, Support::Line, f.grid(), 1.0).unwrap();
        let thin = TypicalSpec::new(f, 1, 1e-9, cost).unwrap();
        let cfg = BlockConfig { mode: ModeChoice::Rejection, rejection_samples: 1000, ..BlockConfig::default() };
        assert!(matches!(
            build_typical_block_with(&thin, &cfg, ExecPolicy::Sequential),
            Err(Error::Starvation { .. })
        ));
    }

    #[test]
    fn sampler_is_uniform_over_members() {
        let spec = two_cell_spec(6, 0.15);
        let b = build_typical_block(&spec).unwrap();
        let law = to_block_law(&b, 1 << 12).unwrap();
        let mut r = rng::stream(11, 0);
        let draws = 100_000;
        let mut counts = vec![0usize; law.probs().len()];
        for _ in 0..draws {
            let cells = sample_cells(&b, &mut r).unwrap();
            counts[law.index_of(&cells)] += 1;
        }
        let mut chi2 = 0.0;
        let mut dof = 0usize;
        for (c, &p) in counts.iter().zip(law.probs()) {
            if p > 0.0 {
                let e = p * draws as f64;
                chi2 += (*c as f64 - e).powi(2) / e;
                dof += 1;
            } else {
                assert_eq!(*c, 0);
            }
        }
        // Wilson-Hilferty p = 0.001 critical value
        let k = (dof - 1) as f64;
        let crit = k * (1.0 - 2.0 / (9.0 * k) + 3.09 * (2.0 / (9.0 * k)).sqrt()).powi(3);
        assert!(chi2 < crit, "χ² = {chi2}, critical {crit}");
    }

    #[test]
    fn rejection_sampler_stays_in_members() {
        let spec = two_cell_spec(8, 0.1);
        let cfg = BlockConfig { mode: ModeChoice::Rejection, ..BlockConfig::default() };
        let b = build_typical_block_with(&spec, &cfg, ExecPolicy::Sequential).unwrap();
        let mut r = rng::stream(3, 1);
        for _ in 0..200 {
            let x = sample_typical_uniform(&b, &mut r).unwrap();
            assert!(is_member(&x, &spec));
        }
    }

    #[test]
    fn prefix_laws_match_dense_marginals() {
        let spec = two_cell_spec(7, 0.12);
        let b = build_typical_block(&spec).unwrap();
        let law = to_block_law(&b, 1 << 14).unwrap();
        for rho in 1..=3 {
            let p = prefix_law(&b, rho).unwrap();
            assert!((p.mass() - 1.0).abs() < 1e-12);
            let dense = law.marginal(0, rho).unwrap();
            let tail = law.marginal(7 - rho, rho).unwrap();
            for alpha in [0.5, 1.0, 2.0] {
                assert!((p.entropy(alpha) - dense.entropy(alpha)).abs() < 1e-9);
                assert!((p.entropy(alpha) - tail.entropy(alpha)).abs() < 1e-9);
            }
        }
        assert!((law.entropy(2.0) - b.log_volume).abs() < 1e-9);
    }

    #[test]
    fn marginal_domination_and_prefix_floor() {
        let grid = GridSpec::new(-4.0, 4.0, 8).unwrap();
        let f = GridDensity::from_fn(grid, |x| (-0.5 * x * x).exp()).unwrap();
        let cost = CostSpec::new(CostFn::Quadratic, Support::Line, grid, 2.0).unwrap();
        let mut checked = 0;
        for n in [6, 8, 10] {
            let spec = TypicalSpec::new(f.clone(), n, 0.2, cost.clone()).unwrap();
            let b = build_typical_block(&spec).unwrap();
            if !b.n_threshold_ok {
                continue;
            }
            checked += 1;
            let factor = marginal_log_factor(0.2, n).exp();
            for (m, fv) in first_marginal(&b).unwrap().iter().zip(f.weights()) {
                assert!(*m <= factor * fv * (1.0 + 1e-12));
            }
            for rho in 1..=2 {
                let h = prefix_law(&b, rho).unwrap().entropy(2.0);
                assert!(h >= prefix_entropy_floor(&b, rho, 2.0).unwrap() - 1e-12);
            }
            // cost bound: with μ < Γ − ε every member keeps n⁻¹Σr below Γ
            assert!(spec.mean_cost() < 2.0 - 0.2);
            assert!(b.max_member_average_cost().unwrap() < 2.0);
        }
        assert!(checked > 0);
    }

    #[test]
    fn threshold_scan() {
        let spec = two_cell_spec(1, 0.2);
        let scan = find_n_threshold(&spec.f, 0.2, &spec.cost, 24, ExecPolicy::Parallel).unwrap();
        let n0 = scan.n_threshold.expect("bound eventually holds");
        for &(n, v, bound) in &scan.rows {
            if n >= n0 {
                assert!(v >= bound);
            }
        }
        let sug = suggest_n(&spec.f, 0.2, &spec.cost, 0.9, 4000, 1, 512, ExecPolicy::Parallel).unwrap();
        assert!(sug.is_some());
    }

    #[test]
    fn rejection_mode_rejects_marginal_queries() {
        let spec = two_cell_spec(6, 0.2);
        let cfg = BlockConfig { mode: ModeChoice::Rejection, ..BlockConfig::default() };
        let b = build_typical_block_with(&spec, &cfg, ExecPolicy::Sequential).unwrap();
        assert!(matches!(prefix_law(&b, 1), Err(Error::Mode(_))));
    }
}
