//! Dense laws on `n`-tuples of cells of a (possibly non-uniform) partition of
//! the line. Within a tuple of cells the law is uniform, so entropies and
//! moments are exact finite sums.

use serde::{Deserialize, Serialize};

use crate::density::{CostFn, GridSpec};
use crate::error::{validation, Error, Result};
use crate::numeric;

/// Cells `[e_i, e_{i+1})` given by strictly increasing edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    edges: Vec<f64>,
}

impl CellPartition {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return validation("a partition needs at least two edges");
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return validation("partition edges must be finite and strictly increasing");
        }
        Ok(CellPartition { edges })
    }

    pub fn uniform(grid: &GridSpec) -> Self {
        let edges = (0..=grid.cells).map(|i| grid.lo + i as f64 * grid.width()).collect();
        CellPartition { edges }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// `E[X]` for `X` uniform on cell `i`.
    pub fn mean(&self, i: usize) -> f64 {
        self.midpoint(i)
    }

    /// `E[X²] = (a² + ab + b²)/3` for `X` uniform on `[a, b]`.
    pub fn second_moment(&self, i: usize) -> f64 {
        let (a, b) = self.bounds(i);
        (a * a + a * b + b * b) / 3.0
    }

    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let k = self.cells();
        if !(x >= self.edges[0] && x <= self.edges[k]) {
            return None;
        }
        Some((self.edges.partition_point(|&e| e <= x)).clamp(1, k) - 1)
    }

    /// The partition with every cell scaled by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        CellPartition { edges: self.edges.iter().map(|e| e * c).collect() }
    }
}

/// A probability vector over `cells^n` tuples (big-endian index: the first
/// coordinate is the most significant digit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockLaw {
    partition: CellPartition,
    n: usize,
    probs: Vec<f64>,
}

impl BlockLaw {
    pub fn new(partition: CellPartition, n: usize, probs: Vec<f64>) -> Result<Self> {
        let k = partition.cells();
        let expected = checked_pow(k, n).ok_or_else(|| Error::Validation("block law too large".into()))?;
        if n == 0 || probs.len() != expected {
            return validation(format!("block law needs {expected} probabilities, got {}", probs.len()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return validation("block probabilities must be finite and ≥ 0");
        }
        let total = numeric::sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return validation(format!("block probabilities sum to {total}"));
        }
        Ok(BlockLaw { partition, n, probs })
    }

    /// Product law of `n` IID coordinates with the given cell probabilities.
    pub fn iid(partition: CellPartition, n: usize, cell_probs: &[f64]) -> Result<Self> {
        if cell_probs.len() != partition.cells() {
            return validation("one probability per cell is required");
        }
        let mut probs = vec![1.0];
        for _ in 0..n {
            probs = probs.iter().flat_map(|p| cell_probs.iter().map(move |q| p * q)).collect();
        }
        Self::new(partition, n, probs)
    }

    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cells(&self) -> usize {
        self.partition.cells()
    }

    pub fn index_of(&self, cells: &[usize]) -> usize {
        cells.iter().fold(0, |acc, &c| acc * self.cells() + c)
    }

    pub fn cells_of(&self, mut index: usize) -> Vec<usize> {
        let k = self.cells();
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = index % k;
            index /= k;
        }
        out
    }

    pub fn tuple_volume(&self, index: usize) -> f64 {
        self.cells_of(index).iter().map(|&c| self.partition.width(c)).product()
    }

    /// `Σ P^α V^{1−α}`-based Rényi entropy, or Shannon entropy at `α = 1`.
    pub fn entropy(&self, alpha: f64) -> f64 {
        let vols: Vec<f64> = (0..self.probs.len()).map(|i| self.tuple_volume(i)).collect();
        law_entropy(&self.probs, &vols, alpha)
    }

    /// Law of the contiguous coordinates `start..start + len`.
    pub fn marginal(&self, start: usize, len: usize) -> Result<BlockLaw> {
        if len == 0 || start + len > self.n {
            return validation(format!("window {start}..{} outside block of length {}", start + len, self.n));
        }
        let k = self.cells();
        let tail = checked_pow(k, self.n - start - len).unwrap_or(usize::MAX);
        let inner = checked_pow(k, len).unwrap_or(usize::MAX);
        let mut out = vec![0.0; inner];
        for (i, &p) in self.probs.iter().enumerate() {
            out[(i / tail) % inner] += p;
        }
        BlockLaw::new(self.partition.clone(), len, out)
    }

    /// `E[X_k]` for every coordinate.
    pub fn means(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| self.expect(|cells| self.partition.mean(cells[k])))
            .collect()
    }

    /// `E[X_k X_l]` (exact: uniform within cells, independent across
    /// coordinates given the tuple).
    pub fn second_moments(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (k, row) in m.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                *v = self.expect(|c| {
                    if k == l {
                        self.partition.second_moment(c[k])
                    } else {
                        self.partition.mean(c[k]) * self.partition.mean(c[l])
                    }
                });
            }
        }
        m
    }

    /// `E[r(X_k)]` with the cost evaluated at cell midpoints.
    pub fn cost_means(&self, cost: &CostFn) -> Vec<f64> {
        (0..self.n)
            .map(|k| self.expect(|cells| cost.eval(self.partition.midpoint(cells[k]))))
            .collect()
    }

    fn expect(&self, g: impl Fn(&[usize]) -> f64) -> f64 {
        numeric::sum(
            self.probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &p)| p * g(&self.cells_of(i))),
        )
    }

    /// One draw: a tuple by its probability, then uniform inside the cells.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut index = self.probs.len() - 1;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                index = i;
                break;
            }
        }
        self.cells_of(index)
            .into_iter()
            .map(|c| {
                let (a, b) = self.partition.bounds(c);
                a + (b - a) * rng.random::<f64>()
            })
            .collect()
    }
}

/// A density on `n`-tuples that can be sampled, whose block entropy is known,
/// and whose leading and trailing marginals have computable entropies.
pub trait BlockModel: Send + Sync {
    fn n(&self) -> usize;

    /// `h_α` of the whole block (Shannon at `α = 1`).
    fn block_entropy(&self, alpha: f64) -> Result<f64>;

    /// `h_α(X_1, …, X_ρ)` for `1 ≤ ρ ≤ n`.
    fn prefix_entropy(&self, rho: usize, alpha: f64) -> Result<f64>;

    /// `h_α(X_{n−ρ+1}, …, X_n)` for `1 ≤ ρ ≤ n`.
    fn suffix_entropy(&self, rho: usize, alpha: f64) -> Result<f64>;

    fn sample_block(&self, rng: &mut crate::rng::Rng) -> Result<Vec<f64>>;

    /// The law on cell tuples, when it has at most `max_tuples` entries.
    fn dense_law(&self, max_tuples: usize) -> Result<BlockLaw>;
}

impl BlockModel for BlockLaw {
    fn n(&self) -> usize {
        self.n
    }

    fn block_entropy(&self, alpha: f64) -> Result<f64> {
        Ok(self.entropy(alpha))
    }

    fn prefix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        Ok(self.marginal(0, rho)?.entropy(alpha))
    }

    fn suffix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        if rho > self.n {
            return validation(format!("suffix length {rho} exceeds the block length {}", self.n));
        }
        Ok(self.marginal(self.n - rho, rho)?.entropy(alpha))
    }

    fn sample_block(&self, rng: &mut crate::rng::Rng) -> Result<Vec<f64>> {
        Ok(self.sample(rng))
    }

    fn dense_law(&self, max_tuples: usize) -> Result<BlockLaw> {
        if self.probs.len() > max_tuples {
            return Err(Error::EnumerationBudget { needed: self.probs.len() as f64, budget: max_tuples as f64 });
        }
        Ok(self.clone())
    }
}

/// Entropy of a law that is uniform inside pieces of volume `vols` with
/// masses `probs`: `(1/(1−α)) ln Σ P^α V^{1−α}`, or `−Σ P ln(P/V)` at `α = 1`.
pub fn law_entropy(probs: &[f64], vols: &[f64], alpha: f64) -> f64 {
    if alpha == 1.0 {
        return -numeric::sum(
            probs.iter().zip(vols).filter(|(&p, _)| p > 0.0).map(|(&p, &v)| p * (p / v).ln()),
        );
    }
    let logs: Vec<f64> = probs
        .iter()
        .zip(vols)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &v)| alpha * p.ln() + (1.0 - alpha) * v.ln())
        .collect();
    numeric::log_sum_exp(&logs) / (1.0 - alpha)
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn two_cells() -> CellPartition {
        CellPartition::new(vec![0.0, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn iid_entropy_is_additive() {
        let law = BlockLaw::iid(two_cells(), 3, &[0.75, 0.25]).unwrap();
        let single = BlockLaw::iid(two_cells(), 1, &[0.75, 0.25]).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            assert!((law.entropy(alpha) - 3.0 * single.entropy(alpha)).abs() < 1e-12);
        }
        // two-cell density (1.5, 0.5): h = −0.75 ln 1.5 − 0.25 ln 0.5
        assert!((single.entropy(1.0) + 0.130_812_035_941_136_96).abs() < 1e-15);
    }

    #[test]
    fn marginals_and_indices() {
        let probs: Vec<f64> = (1..=8).map(|v| v as f64 / 36.0).collect();
        let law = BlockLaw::new(two_cells(), 3, probs).unwrap();
        assert_eq!(law.cells_of(6), vec![1, 1, 0]);
        assert_eq!(law.index_of(&[1, 1, 0]), 6);
        let first = law.marginal(0, 1).unwrap();
        assert!((first.probs()[0] - 10.0 / 36.0).abs() < 1e-15);
        let last = law.marginal(2, 1).unwrap();
        assert!((last.probs()[0] - 16.0 / 36.0).abs() < 1e-15);
        let mid = law.marginal(1, 2).unwrap();
        assert!((mid.probs()[3] - 12.0 / 36.0).abs() < 1e-15);
        assert!(law.marginal(2, 2).is_err());
    }

    #[test]
    fn non_uniform_partition() {
        let p = CellPartition::new(vec![-3.0, -1.0, 0.0, 1.0, 3.0]).unwrap();
        assert_eq!(p.cell_of(-1.0), Some(1));
        assert_eq!(p.cell_of(3.0), Some(3));
        assert_eq!(p.cell_of(3.5), None);
        assert!((p.second_moment(3) - 13.0 / 3.0).abs() < 1e-15);
        let law = BlockLaw::iid(p, 2, &[0.25; 4]).unwrap();
        let m = law.second_moments();
        assert!(m[0][1].abs() < 1e-15);
        assert!(law.means().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn samples_land_in_support() {
        let law = BlockLaw::iid(two_cells(), 2, &[1.0, 0.0]).unwrap();
        let mut r = rng::stream(1, 0);
        for _ in 0..100 {
            assert!(law.sample(&mut r).iter().all(|&x| (0.0..0.5).contains(&x)));
        }
    }
}
