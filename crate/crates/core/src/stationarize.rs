//! Stationary processes from IID blocks and an independent uniform shift:
//! `Z_k = Y_{k+T}` with `T ~ U{0, …, n−1}`. Exact window entropies, the
//! boundary-entropy rate bounds, marginal constraint checks and the
//! second-moment construction.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::block::{BlockLaw, BlockModel, CellPartition};
use crate::burg::gauss_markov_shannon_rate;
use crate::density::{check_alpha, CostFn, CostSpec, GridDensity, GridSpec, Support};
use crate::error::{validation, Error, Result};
use crate::exec::ExecPolicy;
use crate::mixtures::TwoSetUniformBlock;
use crate::numeric;
use crate::rng;
use crate::typicality::{self, BlockConfig, ModeChoice, TypicalSpec, SHARDS};

/// Default cap on the number of window tuples visited by exact enumeration.
pub const DEFAULT_WINDOW_BUDGET: u64 = 1 << 26;

#[derive(Clone)]
pub struct BlockProcess {
    block: Arc<dyn BlockModel>,
    scale: f64,
    seed: u64,
}

impl std::fmt::Debug for BlockProcess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockProcess").field("n", &self.n()).field("scale", &self.scale).field("seed", &self.seed).finish()
    }
}

pub fn build_block_process(block: Arc<dyn BlockModel>, seed: u64) -> BlockProcess {
    BlockProcess { block, scale: 1.0, seed }
}

impl BlockProcess {
    pub fn n(&self) -> usize {
        self.block.n()
    }

    pub fn block(&self) -> &dyn BlockModel {
        self.block.as_ref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The process `c·Z`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return validation(format!("scale must be positive, got {c}"));
        }
        Ok(BlockProcess { scale: self.scale * c, ..self.clone() })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        BlockProcess { seed, ..self.clone() }
    }

    /// Window `(Z_1, …, Z_m)` number `draw`; each draw owns its own stream.
    pub fn sample_window(&self, m: usize, draw: u64) -> Result<Vec<f64>> {
        let mut rng = rng::stream(self.seed, draw);
        self.sample_window_with(m, &mut rng)
    }

    pub fn sample_window_with(&self, m: usize, rng: &mut rng::Rng) -> Result<Vec<f64>> {
        let n = self.n();
        let t = rng.random_range(0..n);
        let mut y = Vec::with_capacity(t + m + n);
        while y.len() < t + m {
            y.extend(self.block.sample_block(rng)?);
        }
        Ok(y[t..t + m].iter().map(|v| v * self.scale).collect())
    }

    pub fn sample_windows(&self, m: usize, count: usize, policy: ExecPolicy) -> Result<Vec<Vec<f64>>> {
        policy.map_indexed(count, |i| self.sample_window(m, i as u64)).into_iter().collect()
    }
}

/// Block-level entropies needed by the window bounds. `prefix[ρ]` and
/// `suffix[ρ]` hold `h_α` of the first and last `ρ` coordinates, with
/// `prefix[0] = suffix[0] = 0` and `prefix[n] = suffix[n] = block`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    pub n: usize,
    pub alpha: f64,
    #[serde(with = "crate::serde_ext")]
    pub block: f64,
    #[serde(with = "crate::serde_ext::vec")]
    pub prefix: Vec<f64>,
    #[serde(with = "crate::serde_ext::vec")]
    pub suffix: Vec<f64>,
}

impl BoundaryStats {
    pub fn from_model(block: &dyn BlockModel, alpha: f64) -> Result<Self> {
        let n = block.n();
        let h = block.block_entropy(alpha)?;
        let mut prefix = vec![0.0; n + 1];
        let mut suffix = vec![0.0; n + 1];
        for rho in 1..n {
            prefix[rho] = block.prefix_entropy(rho, alpha)?;
            suffix[rho] = block.suffix_entropy(rho, alpha)?;
        }
        prefix[n] = h;
        suffix[n] = h;
        Ok(BoundaryStats { n, alpha, block: h, prefix, suffix })
    }

    pub fn from_process(p: &BlockProcess, alpha: f64) -> Result<Self> {
        Self::from_model(p.block(), alpha)?.scaled(p.scale())
    }

    /// Entropies after scaling every coordinate by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return validation(format!("scale must be positive, got {c}"));
        }
        let shift = |v: &[f64]| v.iter().enumerate().map(|(rho, h)| h + rho as f64 * c.ln()).collect();
        Ok(BoundaryStats {
            block: self.block + self.n as f64 * c.ln(),
            prefix: shift(&self.prefix),
            suffix: shift(&self.suffix),
            ..self.clone()
        })
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 || self.prefix.len() != self.n + 1 || self.suffix.len() != self.n + 1 {
            return validation("boundary tables must have n + 1 entries");
        }
        if self.prefix.iter().chain(&self.suffix).any(|h| h.is_nan()) {
            return Err(Error::Mode("boundary entropies are unavailable".into()));
        }
        Ok(())
    }
}

/// The window `Z_1..Z_m` given `T = t` splits into a leading suffix of
/// length `lead`, `full` whole blocks and a trailing prefix of length `trail`.
fn window_split(n: usize, m: usize, t: usize) -> (usize, usize, usize) {
    if t == 0 {
        (0, m / n, m % n)
    } else {
        let rest = m - (n - t);
        (n - t, rest / n, rest % n)
    }
}

/// `h_α(Z_1..Z_m | T = t)`; empty boundary pieces contribute zero.
pub fn conditional_window_entropy(stats: &BoundaryStats, m: usize, t: usize) -> Result<f64> {
    stats.check()?;
    let n = stats.n;
    if m <= 2 * n {
        return validation(format!("window length must exceed 2n = {}, got {m}", 2 * n));
    }
    if t >= n {
        return validation(format!("shift must lie in 0..{n}, got {t}"));
    }
    let (lead, full, trail) = window_split(n, m, t);
    Ok(stats.suffix[lead] + full as f64 * stats.block + stats.prefix[trail])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBoundReport {
    pub m: usize,
    pub alpha: f64,
    /// `min_t h_α(Z_1^m | T = t)`.
    #[serde(with = "crate::serde_ext")]
    pub lower: f64,
    /// Sum of the separate minima over leading pieces, trailing pieces and
    /// block counts; never above `lower`.
    #[serde(with = "crate::serde_ext")]
    pub lower_literal: f64,
    #[serde(with = "crate::serde_ext")]
    pub upper: f64,
    pub block_rate: f64,
    #[serde(with = "crate::serde_ext::vec")]
    pub conditional: Vec<f64>,
    /// Shifts whose trailing piece is empty.
    pub vanishing_trailing: Vec<usize>,
}

/// Bounds on `h_α(Z_1^m)` from the shift mixture: the minimum over `t` below,
/// and the mixture upper bound with weights `1/n` above. At `α = 1` the
/// upper bound is `ln n` plus the average conditional entropy.
pub fn window_rate_bounds(stats: &BoundaryStats, m: usize) -> Result<RateBoundReport> {
    if stats.alpha != 1.0 {
        check_alpha(stats.alpha)?;
    }
    let n = stats.n;
    let alpha = stats.alpha;
    let conditional = (0..n).map(|t| conditional_window_entropy(stats, m, t)).collect::<Result<Vec<_>>>()?;
    let lower = conditional.iter().copied().fold(f64::INFINITY, f64::min);
    let highest = conditional.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_n = (n as f64).ln();
    let upper = if alpha == 1.0 {
        ln_n + numeric::sum(conditional.iter().copied()) / n as f64
    } else if alpha > 1.0 {
        alpha / (alpha - 1.0) * ln_n + lower
    } else {
        ln_n / (1.0 - alpha) + highest
    };
    let splits: Vec<_> = (0..n).map(|t| window_split(n, m, t)).collect();
    let lead_min = splits.iter().map(|s| stats.suffix[s.0]).fold(f64::INFINITY, f64::min);
    let trail_min = splits.iter().map(|s| stats.prefix[s.2]).fold(f64::INFINITY, f64::min);
    let full_min = splits.iter().map(|s| s.1 as f64 * stats.block).fold(f64::INFINITY, f64::min);
    let vanishing_trailing = (1..n).filter(|&t| splits[t].2 == 0).collect();
    Ok(RateBoundReport {
        m,
        alpha,
        lower,
        lower_literal: lead_min + trail_min + full_min,
        upper,
        block_rate: stats.block / n as f64,
        conditional,
        vanishing_trailing,
    })
}

/// Marginal tables `marg[start][len]` of a block law, indexed big-endian.
struct WindowTables {
    n: usize,
    k: usize,
    widths: Vec<f64>,
    marg: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Default)]
struct ShiftState {
    acc: f64,
    start: usize,
    idx: usize,
}

impl WindowTables {
    fn new(law: &BlockLaw) -> Result<Self> {
        let n = law.n();
        let mut marg = Vec::with_capacity(n);
        for start in 0..n {
            let mut row = vec![Vec::new()];
            for len in 1..=n - start {
                row.push(law.marginal(start, len)?.probs().to_vec());
            }
            marg.push(row);
        }
        let p = law.partition();
        Ok(WindowTables { n, k: p.cells(), widths: (0..p.cells()).map(|c| p.width(c)).collect(), marg })
    }

    /// Extend the shift states by cell `c` at window position `j`.
    fn step(&self, prev: &[ShiftState], next: &mut [ShiftState], j: usize, m: usize, c: usize) -> bool {
        let mut alive = false;
        for (t, (p, q)) in prev.iter().zip(next.iter_mut()).enumerate() {
            if p.acc == 0.0 {
                q.acc = 0.0;
                continue;
            }
            let offset = (t + j) % self.n;
            let (start, idx) = if offset == 0 || j == 0 { (offset, c) } else { (p.start, p.idx * self.k + c) };
            let prob = self.marg[start][offset - start + 1][idx];
            if prob == 0.0 {
                q.acc = 0.0;
                continue;
            }
            alive = true;
            if offset == self.n - 1 || j == m - 1 {
                *q = ShiftState { acc: p.acc * prob, start: 0, idx: 0 };
            } else {
                *q = ShiftState { acc: p.acc, start, idx };
            }
        }
        alive
    }

    /// Depth-first walk over all window tuples with positive probability
    /// starting with `head`; `leaf` receives (tuple, probability, volume).
    fn walk(&self, m: usize, head: &[usize], leaves: &AtomicU64, budget: u64, leaf: &mut dyn FnMut(&[usize], f64, f64)) -> Result<()> {
        let n = self.n;
        let mut states = vec![vec![ShiftState::default(); n]; m + 1];
        for s in states[0].iter_mut() {
            s.acc = 1.0;
        }
        let mut tuple = vec![0usize; m];
        let mut vols = vec![1.0; m + 1];
        for (j, &c) in head.iter().enumerate() {
            let (a, b) = states.split_at_mut(j + 1);
            if !self.step(&a[j], &mut b[0], j, m, c) {
                return Ok(());
            }
            tuple[j] = c;
            vols[j + 1] = vols[j] * self.widths[c];
        }
        self.descend(m, head.len(), &mut states, &mut tuple, &mut vols, leaves, budget, leaf)
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        m: usize,
        j: usize,
        states: &mut [Vec<ShiftState>],
        tuple: &mut [usize],
        vols: &mut [f64],
        leaves: &AtomicU64,
        budget: u64,
        leaf: &mut dyn FnMut(&[usize], f64, f64),
    ) -> Result<()> {
        if j == m {
            if leaves.fetch_add(1, Ordering::Relaxed) >= budget {
                return Err(Error::EnumerationBudget { needed: budget as f64 + 1.0, budget: budget as f64 });
            }
            let p = numeric::sum(states[m].iter().map(|s| s.acc)) / self.n as f64;
            leaf(tuple, p, vols[m]);
            return Ok(());
        }
        for c in 0..self.k {
            let (a, b) = states.split_at_mut(j + 1);
            if self.step(&a[j], &mut b[0], j, m, c) {
                tuple[j] = c;
                vols[j + 1] = vols[j] * self.widths[c];
                self.descend(m, j + 1, states, tuple, vols, leaves, budget, leaf)?;
            }
        }
        Ok(())
    }

    /// Split depth for parallel work: at least 64 prefixes when possible.
    fn head_depth(&self, m: usize) -> usize {
        let mut d = 0;
        let mut count = 1usize;
        while d < m && count < SHARDS {
            d += 1;
            count *= self.k;
        }
        d
    }
}

fn heads(k: usize, depth: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        out = out.iter().flat_map(|h| (0..k).map(move |c| [h.as_slice(), &[c]].concat())).collect();
    }
    out
}

/// `h_α(Z_1, …, Z_m)` of the stationarized block law, by enumeration of all
/// window cell tuples with positive probability.
pub fn exact_window_entropy(law: &BlockLaw, m: usize, alpha: f64, policy: ExecPolicy) -> Result<f64> {
    exact_window_entropy_with_budget(law, m, alpha, DEFAULT_WINDOW_BUDGET, policy)
}

pub fn exact_window_entropy_with_budget(law: &BlockLaw, m: usize, alpha: f64, budget: u64, policy: ExecPolicy) -> Result<f64> {
    if alpha != 1.0 {
        check_alpha(alpha)?;
    }
    if m == 0 {
        return validation("window length must be positive");
    }
    let tables = WindowTables::new(law)?;
    let leaves = AtomicU64::new(0);
    let hs = heads(tables.k, tables.head_depth(m));
    // Σ P^α V^{1−α}, or −Σ P ln(P/V) at α = 1, kept as a plain sum per head.
    let parts = policy.map_slice(&hs, |head| {
        let mut acc = 0.0;
        tables
            .walk(m, head, &leaves, budget, &mut |_, p, v| {
                if p > 0.0 {
                    acc += if alpha == 1.0 { -p * (p / v).ln() } else { (alpha * p.ln() + (1.0 - alpha) * v.ln()).exp() };
                }
            })
            .map(|_| acc)
    });
    let total = numeric::sum(parts.into_iter().collect::<Result<Vec<_>>>()?);
    Ok(if alpha == 1.0 { total } else { total.ln() / (1.0 - alpha) })
}

/// Dense law of `(Z_1, …, Z_m)` on cell tuples.
pub fn window_law(law: &BlockLaw, m: usize, max_tuples: usize) -> Result<BlockLaw> {
    let k = law.cells();
    let size = crate::block::checked_pow(k, m).filter(|&s| s <= max_tuples);
    let size = size.ok_or(Error::EnumerationBudget { needed: (k as f64).powi(m as i32), budget: max_tuples as f64 })?;
    let tables = WindowTables::new(law)?;
    let leaves = AtomicU64::new(0);
    let mut probs = vec![0.0; size];
    tables.walk(m, &[], &leaves, u64::MAX, &mut |tuple, p, _| {
        let i = tuple.iter().fold(0, |acc, &c| acc * k + c);
        probs[i] = p;
    })?;
    BlockLaw::new(law.partition().clone(), m, probs)
}

/// `max |P(Z_1..Z_w = z) − P(Z_2..Z_{w+1} = z)|` over cell tuples.
pub fn stationarity_gap(law: &BlockLaw, w: usize, max_tuples: usize) -> Result<f64> {
    let joint = window_law(law, w + 1, max_tuples)?;
    let a = joint.marginal(0, w)?;
    let b = joint.marginal(1, w)?;
    Ok(a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Draws that landed on tuples of zero probability.
    pub impossible: usize,
}

/// Pearson test of sampled windows against the enumerated window law. Bins
/// with expected count below 5 are pooled.
pub fn window_goodness_of_fit(process: &BlockProcess, law: &BlockLaw, m: usize, draws: usize, policy: ExecPolicy) -> Result<GoodnessOfFit> {
    let wl = window_law(law, m, 1 << 20)?;
    let part = law.partition().scaled(process.scale());
    let windows = process.sample_windows(m, draws, policy)?;
    let mut counts = vec![0usize; wl.probs().len()];
    for w in &windows {
        let cells: Option<Vec<usize>> = w.iter().map(|&x| part.cell_of(x)).collect();
        match cells {
            Some(c) => counts[wl.index_of(&c)] += 1,
            None => return validation("a sampled value fell outside the block partition"),
        }
    }
    let total = draws as f64;
    let mut impossible = 0;
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&p, &c) in wl.probs().iter().zip(&counts) {
        let e = p * total;
        if p == 0.0 {
            impossible += c;
        } else if e < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += e;
        } else {
            stat += (c as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    let dof = bins.saturating_sub(1).max(1);
    let p_value = if impossible > 0 {
        0.0
    } else {
        ChiSquared::new(dof as f64).map_err(|e| Error::Validation(e.to_string()))?.sf(stat)
    };
    Ok(GoodnessOfFit { statistic: stat, dof, p_value, impossible })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Mean and standard error of `g(window)` over `samples` windows drawn in
/// [`SHARDS`] seeded shards, reduced in shard order.
fn window_stats(process: &BlockProcess, m: usize, samples: usize, label: u64, outputs: usize, g: &(dyn Fn(&[f64], &mut [f64]) + Sync), policy: ExecPolicy) -> Result<Vec<Estimate>> {
    if samples < 2 {
        return validation("at least two samples are required");
    }
    let base = rng::derive(process.seed(), label);
    let shards = policy.map_indexed(SHARDS, |s| -> Result<Vec<(f64, f64)>> {
        let mut rng = rng::stream(base, s as u64);
        let count = samples / SHARDS + usize::from(s < samples % SHARDS);
        let mut acc = vec![(0.0, 0.0); outputs];
        let mut out = vec![0.0; outputs];
        for _ in 0..count {
            let w = process.sample_window_with(m, &mut rng)?;
            g(&w, &mut out);
            for (a, v) in acc.iter_mut().zip(&out) {
                a.0 += v;
                a.1 += v * v;
            }
        }
        Ok(acc)
    });
    let shards = shards.into_iter().collect::<Result<Vec<_>>>()?;
    let nf = samples as f64;
    Ok((0..outputs)
        .map(|i| {
            let s = numeric::sum(shards.iter().map(|a| a[i].0));
            let s2 = numeric::sum(shards.iter().map(|a| a[i].1));
            let mean = s / nf;
            let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
            Estimate { estimate: mean, std_error: (var / nf).sqrt() }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalProbe {
    pub k: usize,
    pub mean_cost: f64,
    pub std_error: f64,
    pub support_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub gamma: f64,
    pub samples: usize,
    pub sigmas: f64,
    pub probes: Vec<MarginalProbe>,
    pub passed: bool,
    pub offending: Option<usize>,
}

/// Empirical check that every probed `Z_k` lies in the support and has
/// `E[r(Z_k)] ≤ Γ + sigmas·stderr`. Probes `k = 1..=min(2n, 8)`.
pub fn verify_marginal_constraints(process: &BlockProcess, cost: &CostSpec, samples: usize, seed: u64, sigmas: f64, policy: ExecPolicy) -> Result<MarginalReport> {
    let p = process.with_seed(seed);
    let probes = (2 * p.n()).clamp(1, 8);
    let f = &cost.cost;
    let support = cost.support;
    let g = |w: &[f64], out: &mut [f64]| {
        for k in 0..probes {
            out[k] = f.eval(w[k]);
            out[probes + k] = if support.contains(w[k]) { 1.0 } else { 0.0 };
        }
    };
    let est = window_stats(&p, probes, samples, 0x6d617267, 2 * probes, &g, policy)?;
    let rows: Vec<MarginalProbe> = (0..probes)
        .map(|k| MarginalProbe {
            k: k + 1,
            mean_cost: est[k].estimate,
            std_error: est[k].std_error,
            support_fraction: est[probes + k].estimate,
        })
        .collect();
    let offending = rows
        .iter()
        .find(|r| r.support_fraction < 1.0 || r.mean_cost > cost.gamma + sigmas * r.std_error)
        .map(|r| r.k);
    Ok(MarginalReport { gamma: cost.gamma, samples, sigmas, probes: rows, passed: offending.is_none(), offending })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub name: String,
    pub expected: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub samples: usize,
    pub sigmas: f64,
    pub checks: Vec<MomentCheck>,
    pub passed: bool,
}

/// `E[Z_1] = 0`, `E[Z_1²] = σ²` and `E[Z_1 Z_{1+ℓ}] = 0` for `ℓ = 1..=lags`,
/// each within `sigmas` standard errors.
pub fn verify_second_moments(process: &BlockProcess, sigma2: f64, lags: usize, samples: usize, seed: u64, sigmas: f64, policy: ExecPolicy) -> Result<MomentReport> {
    let p = process.with_seed(seed);
    let est = window_stats(&p, lags + 1, samples, 0x6d6f6d, lags + 2, &|w, out| moment_outputs(w, lags, out), policy)?;
    Ok(moment_report(&est, sigma2, lags, samples, sigmas))
}

fn moment_outputs(w: &[f64], lags: usize, out: &mut [f64]) {
    out[0] = w[0];
    for l in 0..=lags {
        out[1 + l] = w[0] * w[l];
    }
}

fn moment_report(est: &[Estimate], sigma2: f64, lags: usize, samples: usize, sigmas: f64) -> MomentReport {
    let mut checks = Vec::with_capacity(lags + 2);
    let mut push = |name: String, expected: f64, e: Estimate| {
        let passed = (e.estimate - expected).abs() <= sigmas * e.std_error;
        checks.push(MomentCheck { name, expected, estimate: e.estimate, std_error: e.std_error, passed });
    };
    push("mean".into(), 0.0, est[0]);
    push("lag0".into(), sigma2, est[1]);
    for l in 1..=lags {
        push(format!("lag{l}"), 0.0, est[1 + l]);
    }
    let passed = checks.iter().all(|c| c.passed);
    MomentReport { samples, sigmas, checks, passed }
}

/// [`verify_second_moments`] for the stationarized two-set block, stratified
/// on the shift and on the set labels of the (at most two) blocks a window
/// of length `lags + 1 ≤ n + 1` touches. The rare set is then sampled as
/// often as the common one, and strata are recombined with their exact
/// probabilities.
pub fn verify_two_set_moments(block: &TwoSetUniformBlock, sigma2: f64, lags: usize, samples: usize, seed: u64, sigmas: f64, policy: ExecPolicy) -> Result<MomentReport> {
    let n = block.n;
    if lags > n {
        return validation(format!("stratification needs lags ≤ n = {n}"));
    }
    let strata = 4 * n;
    let per = samples / strata;
    if per < 2 {
        return validation(format!("need at least {} samples", 2 * strata));
    }
    let pure = [TwoSetUniformBlock { delta: 0.0, ..block.clone() }, TwoSetUniformBlock { delta: 1.0, ..block.clone() }];
    let label_p = [1.0 - block.delta, block.delta];
    let outputs = lags + 2;
    let base = rng::derive(seed, 0x737472);
    let parts = policy.map_indexed(strata, |s| -> Result<(f64, Vec<(f64, f64)>)> {
        let (t, l1, l2) = (s / 4, (s / 2) % 2, s % 2);
        let weight = label_p[l1] * label_p[l2] / n as f64;
        let mut rng = rng::stream(base, s as u64);
        let mut acc = vec![(0.0, 0.0); outputs];
        let mut out = vec![0.0; outputs];
        for _ in 0..per {
            let mut y = pure[l1].sample_block(&mut rng)?;
            y.extend(pure[l2].sample_block(&mut rng)?);
            moment_outputs(&y[t..t + lags + 1], lags, &mut out);
            for (a, v) in acc.iter_mut().zip(&out) {
                a.0 += v;
                a.1 += v * v;
            }
        }
        Ok((weight, acc))
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let nf = per as f64;
    let est: Vec<Estimate> = (0..outputs)
        .map(|i| {
            let terms: Vec<(f64, f64)> = parts
                .iter()
                .map(|(w, acc)| {
                    let mean = acc[i].0 / nf;
                    let var = ((acc[i].1 - nf * mean * mean) / (nf - 1.0)).max(0.0);
                    (w * mean, w * w * var / nf)
                })
                .collect();
            Estimate {
                estimate: numeric::sum(terms.iter().map(|t| t.0)),
                std_error: numeric::sum(terms.iter().map(|t| t.1)).sqrt(),
            }
        })
        .collect();
    Ok(moment_report(&est, sigma2, lags, per * strata, sigmas))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateTarget {
    /// Rate at least `½ ln(2πeσ²) − ε̃` (for `α > 1`).
    EpsTilde(f64),
    /// Rate at least `M` (for `α < 1`).
    Rate(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructConfig {
    /// Largest block length tried for `α > 1`.
    pub n_max: usize,
    /// Cells of the symmetric grid for `α > 1`.
    pub cells: usize,
    /// The grid is `[−half_width, half_width]` in units of the unscaled
    /// standard deviation.
    pub half_width: f64,
    pub eps: f64,
    pub budget: f64,
    pub seed: u64,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        ConstructConfig { n_max: 12, cells: 16, half_width: 4.0, eps: 0.5, budget: typicality::DEFAULT_ENUMERATION_BUDGET, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub n: usize,
    /// `h_α(f_n)/n` of the scaled block.
    pub rate: f64,
    /// Rate lower bound used to certify the target.
    pub certified: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub alpha: f64,
    pub sigma2: f64,
    pub target_rate: f64,
    pub n: usize,
    pub achieved_rate: f64,
    pub certified_rate: f64,
    pub gaussian_rate: f64,
    /// `½ ln(2πeσ²) − achieved_rate`.
    pub gap: f64,
    pub scale: f64,
    pub exact_mean: f64,
    pub exact_second_moment: f64,
    pub exact_cross_moment: f64,
    pub schedule: Vec<ScheduleRow>,
    /// For `α < 1`: `(δ, a, b)` of the two-set block.
    pub two_set: Option<(f64, f64, f64)>,
}

pub struct Construction {
    pub process: BlockProcess,
    pub report: ConstructionReport,
    /// The block of the `α < 1` construction.
    pub two_set: Option<TwoSetUniformBlock>,
}

/// A centered stationary process with `E[Z_k Z_l] = σ² 1{k = l}` and a
/// prescribed Rényi rate.
///
/// `α > 1`: uniform block on the typical set of a quantized standard Gaussian
/// on a symmetric grid, rescaled to variance `σ²`. Sign symmetry of the grid
/// makes every coordinate centered and distinct coordinates uncorrelated.
///
/// `α < 1`: two-set block on `[−a, a]` and `[−b, −a] ∪ [a, b]` with `δ`
/// chosen so that the `δ` term alone certifies rate `M`.
pub fn construct_second_moment_process(sigma2: f64, alpha: f64, target: RateTarget, cfg: &ConstructConfig, policy: ExecPolicy) -> Result<Construction> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return validation(format!("σ² must be positive, got {sigma2}"));
    }
    check_alpha(alpha)?;
    match (alpha > 1.0, target) {
        (true, RateTarget::EpsTilde(e)) if e > 0.0 => construct_alpha_large(sigma2, alpha, e, cfg, policy),
        (false, RateTarget::Rate(m)) => construct_alpha_small(sigma2, alpha, m, cfg),
        _ => validation("α > 1 takes an ε̃ > 0 target and α < 1 takes a rate target M"),
    }
}

fn construct_alpha_large(sigma2: f64, alpha: f64, eps_tilde: f64, cfg: &ConstructConfig, policy: ExecPolicy) -> Result<Construction> {
    let grid = GridSpec::new(-cfg.half_width, cfg.half_width, cfg.cells)?;
    let partition = CellPartition::uniform(&grid);
    let f = GridDensity::from_fn(grid, |x| (-0.5 * x * x).exp())?;
    let cost = CostSpec::new(CostFn::Quadratic, Support::Line, grid, 1.0)?;
    let gamma = crate::density::cost_expectation(&f, &cost.cost).mean;
    let gaussian_rate = gauss_markov_shannon_rate(sigma2)?;
    let target = gaussian_rate - eps_tilde;
    let block_cfg = BlockConfig { mode: ModeChoice::Enumerate, budget: cfg.budget, seed: cfg.seed, ..BlockConfig::default() };
    let mut schedule = Vec::new();
    let mut chosen = None;
    for n in 1..=cfg.n_max {
        let spec = TypicalSpec::new(f.clone(), n, cfg.eps, cost.with_gamma(gamma))?;
        let block = match typicality::build_typical_block_with(&spec, &block_cfg, policy) {
            Ok(b) => b,
            Err(Error::EmptyTypicalSet { .. }) => continue,
            Err(e) => return Err(e),
        };
        let marginal = typicality::first_marginal(&block)?;
        let m2 = numeric::sum(marginal.iter().enumerate().map(|(c, d)| d * partition.width(c) * partition.second_moment(c)));
        let scale = (sigma2 / m2).sqrt();
        let rate = block.log_volume / n as f64 + scale.ln();
        schedule.push(ScheduleRow { n, rate, certified: rate, scale });
        if chosen.is_none() && rate >= target {
            chosen = Some((block, scale, rate));
        }
    }
    let Some((block, scale, rate)) = chosen else {
        let best = schedule.iter().map(|r| r.rate).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::TargetUnreachable { target, achieved: best });
    };
    let n = block.n();
    let process = build_block_process(Arc::new(block), cfg.seed).scaled(scale)?;
    Ok(Construction {
        process,
        report: ConstructionReport {
            alpha,
            sigma2,
            target_rate: target,
            n,
            achieved_rate: rate,
            certified_rate: rate,
            gaussian_rate,
            gap: gaussian_rate - rate,
            scale,
            exact_mean: 0.0,
            exact_second_moment: sigma2,
            exact_cross_moment: 0.0,
            schedule,
            two_set: None,
        },
        two_set: None,
    })
}

/// Outer endpoint `b` with `(1−δ)a²/3 + δ(a² + ab + b²)/3 = σ²`.
fn outer_endpoint(sigma2: f64, a: f64, delta: f64) -> f64 {
    let r = (3.0 * sigma2 - (1.0 - delta) * a * a) / delta;
    0.5 * (-a + (4.0 * r - 3.0 * a * a).sqrt())
}

fn two_set_for(sigma2: f64, n: usize, delta: f64) -> Result<TwoSetUniformBlock> {
    let a = sigma2.sqrt();
    let b = outer_endpoint(sigma2, a, delta);
    let partition = CellPartition::new(vec![-b, -a, 0.0, a, b])?;
    TwoSetUniformBlock::new(partition, n, vec![1, 2], vec![0, 3], delta)
}

fn construct_alpha_small(sigma2: f64, alpha: f64, target: f64, cfg: &ConstructConfig) -> Result<Construction> {
    // The δ term gives rate ln(2(b−a)) + α ln δ/((1−α)n); since b ~ δ^{−1/2}
    // it grows as δ → 0 once n > 2α/(1−α).
    let n = (2.0 * alpha / (1.0 - alpha)).floor() as usize + 2;
    let floor_rate = |ln_delta: f64| -> Result<f64> {
        let blk = two_set_for(sigma2, n, ln_delta.exp())?;
        let (_, l1) = blk.ln_lengths();
        Ok(crate::mixtures::two_set_delta_floor(n as f64 * l1, ln_delta.exp(), alpha) / n as f64)
    };
    let (mut lo, mut hi) = (-700.0f64, (0.5f64).ln());
    if floor_rate(lo)? < target {
        return Err(Error::TargetUnreachable { target, achieved: floor_rate(lo)? });
    }
    if floor_rate(hi)? >= target {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if floor_rate(mid)? >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let delta = lo.exp();
    let block = two_set_for(sigma2, n, delta)?;
    let m2 = block.coordinate_second_moment();
    let scale = (sigma2 / m2).sqrt();
    let block = block.scaled(scale);
    let certified = floor_rate(lo)? + scale.ln();
    let rate = block.entropy_of(n, alpha)? / n as f64;
    let (a, b) = (block.partition.edges()[3], block.partition.edges()[4]);
    let report = ConstructionReport {
        alpha,
        sigma2,
        target_rate: target,
        n,
        achieved_rate: rate,
        certified_rate: certified,
        gaussian_rate: gauss_markov_shannon_rate(sigma2)?,
        gap: gauss_markov_shannon_rate(sigma2)? - rate,
        scale,
        exact_mean: block.coordinate_mean(),
        exact_second_moment: block.coordinate_second_moment(),
        exact_cross_moment: block.cross_moment(),
        schedule: vec![ScheduleRow { n, rate, certified, scale }],
        two_set: Some((delta, a, b)),
    };
    Ok(Construction { process: build_block_process(Arc::new(block.clone()), cfg.seed), report, two_set: Some(block) })
}
