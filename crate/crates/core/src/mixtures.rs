//! Rényi entropy of finite mixtures, its sandwich bounds, and the two-set
//! block densities `(1−δ)·U(S_0) + δ·U(S_1)` with disjoint `S_0`, `S_1`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::block::{BlockLaw, BlockModel, CellPartition};
use crate::density::{self, check_alpha, CostFn, CostSpec, EntropyValue, GridDensity};
use crate::error::{validation, Error, Result};
use crate::exec::ExecPolicy;
use crate::numeric;
use crate::rng;
use crate::typicality::{self, BlockConfig, TypicalBlockDensity, TypicalSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<GridDensity>,
    pub weights: Vec<f64>,
}

impl MixtureSpec {
    pub fn new(components: Vec<GridDensity>, weights: Vec<f64>) -> Result<Self> {
        let m = MixtureSpec { components, weights };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return validation("a mixture needs at least one component");
        }
        if self.components.len() != self.weights.len() {
            return validation("one weight per component is required");
        }
        if self.weights.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return validation("mixture weights must be finite and ≥ 0");
        }
        let total = numeric::sum(self.weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return validation(format!("mixture weights sum to {total}"));
        }
        let first = &self.components[0];
        if let Some(c) = self.components.iter().find(|c| !c.shares_grid(first)) {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", c.grid(), first.grid())));
        }
        Ok(())
    }

    /// `Σ q_ℓ f_ℓ` on the shared grid.
    pub fn density(&self) -> Result<GridDensity> {
        self.validate()?;
        let first = &self.components[0];
        let weights = (0..first.len())
            .map(|i| numeric::sum(self.components.iter().zip(&self.weights).map(|(c, q)| q * c.weights()[i])))
            .collect();
        GridDensity::from_unnormalized(first.lo(), first.hi(), weights)
    }

    /// Components carrying positive weight.
    fn active(&self) -> impl Iterator<Item = (&GridDensity, f64)> {
        self.components.iter().zip(self.weights.iter().copied()).filter(|(_, q)| *q > 0.0)
    }
}

pub fn mixture_entropy(m: &MixtureSpec, alpha: f64) -> Result<EntropyValue> {
    density::entropy(&m.density()?, alpha)
}

/// `min_ℓ h_α(f_ℓ)` over the components with positive weight.
pub fn mixture_lower_bound(m: &MixtureSpec, alpha: f64) -> Result<f64> {
    m.validate()?;
    let mut best = f64::INFINITY;
    for (c, _) in m.active() {
        best = best.min(density::entropy(c, alpha)?.nats);
    }
    Ok(best)
}

/// `α > 1`: `min_ℓ {(α/(1−α)) ln q_ℓ + h_α(f_ℓ)}`, zero weights skipped.
/// `0 < α < 1`: `(1/(1−α)) ln p + max_ℓ h_α(f_ℓ)` with `p` the number of
/// components with positive weight.
pub fn mixture_upper_bound(m: &MixtureSpec, alpha: f64) -> Result<f64> {
    m.validate()?;
    check_alpha(alpha)?;
    if alpha > 1.0 {
        let mut best = f64::INFINITY;
        for (c, q) in m.active() {
            best = best.min(alpha / (1.0 - alpha) * q.ln() + density::renyi_entropy(c, alpha)?.nats);
        }
        Ok(best)
    } else {
        let mut worst = f64::NEG_INFINITY;
        let mut p = 0usize;
        for (c, _) in m.active() {
            worst = worst.max(density::renyi_entropy(c, alpha)?.nats);
            p += 1;
        }
        Ok((p as f64).ln() / (1.0 - alpha) + worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureBounds {
    pub alpha: f64,
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
}

pub fn mixture_bounds(m: &MixtureSpec, alpha: f64) -> Result<MixtureBounds> {
    Ok(MixtureBounds {
        alpha,
        lower: mixture_lower_bound(m, alpha)?,
        exact: mixture_entropy(m, alpha)?.nats,
        upper: mixture_upper_bound(m, alpha)?,
    })
}

/// `(1/(1−α)) ln((1−δ)^α V0^{1−α} + δ^α V1^{1−α})` for disjoint sets of
/// volume `V0`, `V1`.
pub fn disjoint_two_set_entropy(v0: f64, v1: f64, delta: f64, alpha: f64) -> Result<f64> {
    if !(v0 > 0.0 && v1 > 0.0) {
        return validation(format!("set volumes must be positive, got {v0} and {v1}"));
    }
    disjoint_two_set_entropy_ln(v0.ln(), v1.ln(), delta, alpha)
}

/// [`disjoint_two_set_entropy`] from log-volumes; `α = 1` gives the Shannon
/// entropy `H_b(δ) + (1−δ) ln V0 + δ ln V1`.
pub fn disjoint_two_set_entropy_ln(ln_v0: f64, ln_v1: f64, delta: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return validation(format!("δ must lie in [0, 1], got {delta}"));
    }
    if !(ln_v0.is_finite() && ln_v1.is_finite()) {
        return validation("log-volumes must be finite");
    }
    let parts = [(1.0 - delta, ln_v0), (delta, ln_v1)];
    if alpha == 1.0 {
        return Ok(numeric::sum(parts.iter().filter(|(q, _)| *q > 0.0).map(|&(q, lv)| q * (lv - q.ln()))));
    }
    check_alpha(alpha)?;
    let logs: Vec<f64> = parts
        .iter()
        .filter(|(q, _)| *q > 0.0)
        .map(|&(q, lv)| alpha * q.ln() + (1.0 - alpha) * lv)
        .collect();
    Ok(numeric::log_sum_exp(&logs) / (1.0 - alpha))
}

/// The `δ`-term alone, `(1/(1−α)) ln(δ^α V1^{1−α})`: a lower bound on the
/// two-set entropy when `0 < α < 1`.
pub fn two_set_delta_floor(ln_v1: f64, delta: f64, alpha: f64) -> f64 {
    (alpha * delta.ln() + (1.0 - alpha) * ln_v1) / (1.0 - alpha)
}

/// Largest `δ` with `(1−δ)(Γ0+ε) + δ(Γ1+ε) ≤ Γ`.
pub fn max_delta(gamma: f64, gamma0: f64, gamma1: f64, eps: f64) -> f64 {
    ((gamma - gamma0 - eps) / (gamma1 - gamma0)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessCertificate {
    /// Open cost band `(μ0 − ε, μ0 + ε)` of `S_0`.
    pub band0: (f64, f64),
    pub band1: (f64, f64),
}

impl DisjointnessCertificate {
    pub fn holds(&self) -> bool {
        self.band0.1 <= self.band1.0 || self.band1.1 <= self.band0.0
    }
}

/// `(1−δ)·U(S_0) + δ·U(S_1)` with `S_ℓ` the typical intersection of `f^(ℓ)`.
#[derive(Clone, Debug)]
pub struct TwoSetTypicalBlock {
    pub s0: TypicalBlockDensity,
    pub s1: TypicalBlockDensity,
    pub delta: f64,
    pub gamma: f64,
    pub certificate: DisjointnessCertificate,
    /// `E[r(X_k)]`, identical for all `k` (exact in enumerate mode, otherwise
    /// the band bound `(1−δ)(μ0+ε) + δ(μ1+ε)`).
    pub coordinate_cost: f64,
    pub coordinate_cost_exact: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn build_alpha_small_block(
    f0: &GridDensity,
    f1: &GridDensity,
    gammas: (f64, f64),
    cost: &CostSpec,
    eps: f64,
    delta: f64,
    n: usize,
    cfg: &BlockConfig,
    policy: ExecPolicy,
) -> Result<TwoSetTypicalBlock> {
    let (g0, g1) = gammas;
    let gamma = cost.gamma;
    if !(g0 + eps < gamma && gamma < g1 - eps) {
        return validation(format!("need Γ0 + ε < Γ < Γ1 − ε, got Γ0 = {g0}, Γ = {gamma}, Γ1 = {g1}, ε = {eps}"));
    }
    if !(0.0..=1.0).contains(&delta) {
        return validation(format!("δ must lie in [0, 1], got {delta}"));
    }
    if (1.0 - delta) * (g0 + eps) + delta * (g1 + eps) > gamma + 1e-12 {
        return validation(format!("δ = {delta} breaks (1−δ)(Γ0+ε) + δ(Γ1+ε) ≤ Γ"));
    }
    let mu0 = density::cost_expectation(f0, &cost.cost).mean;
    let mu1 = density::cost_expectation(f1, &cost.cost).mean;
    if mu0 > g0 + 1e-12 || mu1 > g1 + 1e-12 {
        return validation(format!("component costs ({mu0}, {mu1}) exceed (Γ0, Γ1) = ({g0}, {g1})"));
    }
    let certificate = DisjointnessCertificate { band0: (mu0 - eps, mu0 + eps), band1: (mu1 - eps, mu1 + eps) };
    if !certificate.holds() {
        return Err(Error::Construction(format!(
            "cost bands ({:.6}, {:.6}) and ({:.6}, {:.6}) overlap; disjointness cannot be certified",
            certificate.band0.0, certificate.band0.1, certificate.band1.0, certificate.band1.1
        )));
    }
    let s0 = typicality::build_typical_block_with(&TypicalSpec::new(f0.clone(), n, eps, cost.with_gamma(g0))?, cfg, policy)?;
    let s1 = typicality::build_typical_block_with(&TypicalSpec::new(f1.clone(), n, eps, cost.with_gamma(g1))?, cfg, policy)?;
    let (c0, c1, exact) = match (s0.mean_average_cost(), s1.mean_average_cost()) {
        (Ok(a), Ok(b)) => (a, b, true),
        _ => (mu0 + eps, mu1 + eps, false),
    };
    Ok(TwoSetTypicalBlock {
        s0,
        s1,
        delta,
        gamma,
        certificate,
        coordinate_cost: (1.0 - delta) * c0 + delta * c1,
        coordinate_cost_exact: exact,
    })
}

impl TwoSetTypicalBlock {
    pub fn entropy(&self, alpha: f64) -> Result<f64> {
        disjoint_two_set_entropy_ln(self.s0.log_volume, self.s1.log_volume, self.delta, alpha)
    }
}

impl BlockModel for TwoSetTypicalBlock {
    fn n(&self) -> usize {
        self.s0.n()
    }

    fn block_entropy(&self, alpha: f64) -> Result<f64> {
        self.entropy(alpha)
    }

    fn prefix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        if rho == self.n() {
            return self.entropy(alpha);
        }
        self.dense_law(typicality::DEFAULT_ENUMERATION_BUDGET as usize)?.prefix_entropy(rho, alpha)
    }

    fn suffix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        // both components are exchangeable
        self.prefix_entropy(rho, alpha)
    }

    fn sample_block(&self, rng: &mut rng::Rng) -> Result<Vec<f64>> {
        if rng.random::<f64>() < self.delta {
            typicality::sample_typical_uniform(&self.s1, rng)
        } else {
            typicality::sample_typical_uniform(&self.s0, rng)
        }
    }

    fn dense_law(&self, max_tuples: usize) -> Result<BlockLaw> {
        let a = typicality::to_block_law(&self.s0, max_tuples)?;
        let b = typicality::to_block_law(&self.s1, max_tuples)?;
        if a.partition() != b.partition() {
            return Err(Error::GridMismatch("two-set components live on different grids".into()));
        }
        let probs = a.probs().iter().zip(b.probs()).map(|(p, q)| (1.0 - self.delta) * p + self.delta * q).collect();
        BlockLaw::new(a.partition().clone(), a.n(), probs)
    }
}

/// `(1−δ)·U(A_0^n) + δ·U(A_1^n)` where each `A_ℓ` is a union of cells of a
/// partition and `A_0 ∩ A_1 = ∅`. Every marginal is again a two-set mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSetUniformBlock {
    pub partition: CellPartition,
    pub n: usize,
    pub cells0: Vec<usize>,
    pub cells1: Vec<usize>,
    pub delta: f64,
}

impl TwoSetUniformBlock {
    pub fn new(partition: CellPartition, n: usize, cells0: Vec<usize>, cells1: Vec<usize>, delta: f64) -> Result<Self> {
        let k = partition.cells();
        if n == 0 {
            return validation("block length must be positive");
        }
        if cells0.is_empty() || cells1.is_empty() || cells0.iter().chain(&cells1).any(|&c| c >= k) {
            return validation("both cell sets must be nonempty and index existing cells");
        }
        if cells0.iter().any(|c| cells1.contains(c)) {
            return validation("the two cell sets must be disjoint");
        }
        if !(0.0..=1.0).contains(&delta) {
            return validation(format!("δ must lie in [0, 1], got {delta}"));
        }
        Ok(TwoSetUniformBlock { partition, n, cells0, cells1, delta })
    }

    fn length(&self, cells: &[usize]) -> f64 {
        numeric::sum(cells.iter().map(|&c| self.partition.width(c)))
    }

    /// `(ln |A_0|, ln |A_1|)`
    pub fn ln_lengths(&self) -> (f64, f64) {
        (self.length(&self.cells0).ln(), self.length(&self.cells1).ln())
    }

    /// Entropy of any `rho` coordinates.
    pub fn entropy_of(&self, rho: usize, alpha: f64) -> Result<f64> {
        let (l0, l1) = self.ln_lengths();
        disjoint_two_set_entropy_ln(rho as f64 * l0, rho as f64 * l1, self.delta, alpha)
    }

    fn coordinate_expect(&self, g: impl Fn(usize) -> f64) -> f64 {
        let part = |cells: &[usize]| {
            let len = self.length(cells);
            numeric::sum(cells.iter().map(|&c| self.partition.width(c) / len * g(c)))
        };
        (1.0 - self.delta) * part(&self.cells0) + self.delta * part(&self.cells1)
    }

    /// `E[X_k]`
    pub fn coordinate_mean(&self) -> f64 {
        self.coordinate_expect(|c| self.partition.mean(c))
    }

    /// `E[X_k²]`, exact.
    pub fn coordinate_second_moment(&self) -> f64 {
        self.coordinate_expect(|c| self.partition.second_moment(c))
    }

    /// `E[X_k X_l]` for `k ≠ l`: coordinates are independent given the set.
    pub fn cross_moment(&self) -> f64 {
        let m = |cells: &[usize]| {
            let len = self.length(cells);
            numeric::sum(cells.iter().map(|&c| self.partition.width(c) / len * self.partition.mean(c)))
        };
        (1.0 - self.delta) * m(&self.cells0).powi(2) + self.delta * m(&self.cells1).powi(2)
    }

    /// `E[r(X_k)]` with `r` at cell midpoints.
    pub fn coordinate_cost(&self, cost: &CostFn) -> f64 {
        self.coordinate_expect(|c| cost.eval(self.partition.midpoint(c)))
    }

    pub fn scaled(&self, c: f64) -> Self {
        TwoSetUniformBlock { partition: self.partition.scaled(c), ..self.clone() }
    }
}

impl BlockModel for TwoSetUniformBlock {
    fn n(&self) -> usize {
        self.n
    }

    fn block_entropy(&self, alpha: f64) -> Result<f64> {
        self.entropy_of(self.n, alpha)
    }

    fn prefix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        self.entropy_of(rho, alpha)
    }

    fn suffix_entropy(&self, rho: usize, alpha: f64) -> Result<f64> {
        self.entropy_of(rho, alpha)
    }

    fn sample_block(&self, rng: &mut rng::Rng) -> Result<Vec<f64>> {
        let cells = if rng.random::<f64>() < self.delta { &self.cells1 } else { &self.cells0 };
        let len = self.length(cells);
        Ok((0..self.n)
            .map(|_| {
                let mut u = rng.random::<f64>() * len;
                let mut chosen = cells[cells.len() - 1];
                for &c in cells {
                    let w = self.partition.width(c);
                    if u < w {
                        chosen = c;
                        break;
                    }
                    u -= w;
                }
                let (a, b) = self.partition.bounds(chosen);
                a + (b - a) * rng.random::<f64>()
            })
            .collect())
    }

    fn dense_law(&self, max_tuples: usize) -> Result<BlockLaw> {
        let k = self.partition.cells();
        let per = |cells: &[usize]| {
            let len = self.length(cells);
            (0..k).map(|c| if cells.contains(&c) { self.partition.width(c) / len } else { 0.0 }).collect::<Vec<_>>()
        };
        let needed = (k as f64).powi(self.n as i32);
        if needed > max_tuples as f64 {
            return Err(Error::EnumerationBudget { needed, budget: max_tuples as f64 });
        }
        let a = BlockLaw::iid(self.partition.clone(), self.n, &per(&self.cells0))?;
        let b = BlockLaw::iid(self.partition.clone(), self.n, &per(&self.cells1))?;
        let probs = a.probs().iter().zip(b.probs()).map(|(p, q)| (1.0 - self.delta) * p + self.delta * q).collect();
        BlockLaw::new(self.partition.clone(), self.n, probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{GridSpec, Support};

    fn disjoint_uniforms() -> MixtureSpec {
        let a = GridDensity::new(0.0, 2.0, vec![1.0, 0.0]).unwrap();
        let b = GridDensity::new(0.0, 2.0, vec![0.0, 1.0]).unwrap();
        MixtureSpec::new(vec![a, b], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn mixture_examples() {
        let m = disjoint_uniforms();
        assert!((mixture_entropy(&m, 2.0).unwrap().nats - 2f64.ln()).abs() < 1e-15);
        let f = GridDensity::new(0.0, 1.0, vec![1.5, 0.5]).unwrap();
        let same = MixtureSpec::new(vec![f.clone(), f.clone()], vec![0.3, 0.7]).unwrap();
        let h = density::renyi_entropy(&f, 2.0).unwrap().nats;
        assert!((mixture_entropy(&same, 2.0).unwrap().nats - h).abs() < 1e-12);
        assert!((mixture_lower_bound(&same, 2.0).unwrap() - h).abs() < 1e-12);
        let single = MixtureSpec::new(vec![f.clone()], vec![1.0]).unwrap();
        assert!((mixture_upper_bound(&single, 2.0).unwrap() - h).abs() < 1e-12);
        let halves = MixtureSpec::new(vec![f.clone(), f.clone()], vec![0.5, 0.5]).unwrap();
        assert!((mixture_upper_bound(&halves, 2.0).unwrap() - (4f64.ln() + h)).abs() < 1e-12);
        let g = GridDensity::new(0.0, 1.0, vec![0.5, 1.5]).unwrap();
        let k = GridDensity::new(0.0, 1.0, vec![1.0, 1.0]).unwrap();
        let three = MixtureSpec::new(vec![f.clone(), g, k], vec![0.2, 0.3, 0.5]).unwrap();
        let hmax = three.components.iter().map(|c| density::renyi_entropy(c, 0.5).unwrap().nats).fold(f64::MIN, f64::max);
        assert!((mixture_upper_bound(&three, 0.5).unwrap() - (2.0 * 3f64.ln() + hmax)).abs() < 1e-12);
        let b = mixture_bounds(&three, 0.5).unwrap();
        assert!(b.lower <= b.exact && b.exact <= b.upper);
    }

    #[test]
    fn zero_weights_and_validation() {
        let f = GridDensity::new(0.0, 1.0, vec![1.5, 0.5]).unwrap();
        let g = GridDensity::new(0.0, 1.0, vec![0.5, 1.5]).unwrap();
        let m = MixtureSpec::new(vec![f.clone(), g], vec![1.0, 0.0]).unwrap();
        let h = density::renyi_entropy(&f, 3.0).unwrap().nats;
        assert!((mixture_upper_bound(&m, 3.0).unwrap() - h).abs() < 1e-12);
        assert!(MixtureSpec::new(vec![f.clone()], vec![0.9]).is_err());
        let other = GridDensity::uniform(0.0, 2.0, 2).unwrap();
        assert!(matches!(MixtureSpec::new(vec![f, other], vec![0.5, 0.5]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn disjoint_formula_examples() {
        assert!((disjoint_two_set_entropy(3.0, 5.0, 0.0, 2.0).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((disjoint_two_set_entropy(1.0, 1.0, 0.5, 2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        // 2 ln(√0.9 + √0.1 e^5), mpmath: 7.7374394137252084
        let v = disjoint_two_set_entropy(1.0, 10f64.exp(), 0.1, 0.5).unwrap();
        assert!((v - 7.737_439_413_725_208).abs() < 1e-12, "{v}");
        assert!(disjoint_two_set_entropy(0.0, 1.0, 0.5, 2.0).is_err());
        assert!(disjoint_two_set_entropy(1.0, 1.0, 1.5, 2.0).is_err());
        // the δ term alone is a floor for α < 1
        assert!(two_set_delta_floor(10.0, 0.1, 0.5) <= v);
    }

    fn two_cell_pair() -> (GridDensity, GridDensity, CostSpec) {
        let f0 = GridDensity::new(0.0, 1.0, vec![1.8, 0.2]).unwrap();
        let f1 = GridDensity::new(0.0, 1.0, vec![0.2, 1.8]).unwrap();
        let cost = CostSpec::new(CostFn::Linear, Support::Interval { lo: 0.0, hi: 1.0 }, f0.grid(), 0.5).unwrap();
        (f0, f1, cost)
    }

    #[test]
    fn alpha_small_block_on_two_cells() {
        let (f0, f1, cost) = two_cell_pair();
        // μ0 = 0.3, μ1 = 0.7
        let (g0, g1, eps) = (0.3, 0.7, 0.1);
        let delta = max_delta(cost.gamma, g0, g1, eps);
        let cfg = BlockConfig::default();
        let b = build_alpha_small_block(&f0, &f1, (g0, g1), &cost, eps, delta, 10, &cfg, ExecPolicy::Sequential).unwrap();
        assert!(b.certificate.holds());
        assert!(b.coordinate_cost_exact);
        assert!(b.coordinate_cost <= cost.gamma + 1e-12);
        let law = b.dense_law(1 << 12).unwrap();
        for c in law.cost_means(&cost.cost) {
            assert!((c - b.coordinate_cost).abs() < 1e-12);
        }
        for alpha in [0.5, 2.0] {
            assert!((law.entropy(alpha) - b.entropy(alpha).unwrap()).abs() < 1e-9);
        }
        let zero = build_alpha_small_block(&f0, &f1, (g0, g1), &cost, eps, 0.0, 10, &cfg, ExecPolicy::Sequential).unwrap();
        assert!((zero.entropy(0.5).unwrap() - zero.s0.log_volume).abs() < 1e-12);
    }

    #[test]
    fn overlapping_bands_are_rejected() {
        let (f0, _, cost) = two_cell_pair();
        let f1 = GridDensity::new(0.0, 1.0, vec![1.0, 1.0]).unwrap();
        let cfg = BlockConfig::default();
        let err = build_alpha_small_block(&f0, &f1, (0.3, 0.6), &cost.with_gamma(0.45), 0.14, 0.0, 6, &cfg, ExecPolicy::Sequential);
        assert!(matches!(err, Err(Error::Construction(_))), "{err:?}");
    }

    #[test]
    fn two_set_uniform_block() {
        let p = CellPartition::new(vec![-3.0, -1.0, 0.0, 1.0, 3.0]).unwrap();
        let b = TwoSetUniformBlock::new(p, 3, vec![1, 2], vec![0, 3], 0.2).unwrap();
        let law = b.dense_law(1000).unwrap();
        for alpha in [0.5, 1.0, 3.0] {
            assert!((law.entropy(alpha) - b.block_entropy(alpha).unwrap()).abs() < 1e-12);
            for rho in 1..3 {
                let m = law.marginal(0, rho).unwrap();
                assert!((m.entropy(alpha) - b.prefix_entropy(rho, alpha).unwrap()).abs() < 1e-12);
            }
        }
        assert!(b.coordinate_mean().abs() < 1e-15);
        assert!(b.cross_moment().abs() < 1e-15);
        let m2 = law.second_moments();
        assert!((m2[1][1] - b.coordinate_second_moment()).abs() < 1e-12);
        assert!(TwoSetUniformBlock::new(CellPartition::new(vec![0.0, 1.0, 2.0]).unwrap(), 2, vec![0], vec![0], 0.5).is_err());
    }

    #[test]
    fn common_grid_embedding() {
        let grid = GridSpec::new(-1.0, 1.0, 4).unwrap();
        let a = GridDensity::from_fn(grid, |x| if x < 0.0 { 1.0 } else { 0.0 }).unwrap();
        let b = GridDensity::from_fn(grid, |x| if x > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let m = MixtureSpec::new(vec![a, b], vec![0.25, 0.75]).unwrap();
        let h = mixture_entropy(&m, 0.5).unwrap().nats;
        let v = disjoint_two_set_entropy(1.0, 1.0, 0.75, 0.5).unwrap();
        assert!((h - v).abs() < 1e-12);
    }
}
