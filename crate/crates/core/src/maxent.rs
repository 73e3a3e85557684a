//! The Shannon maximizer `f*(x) = exp(λ0 + λ1 r(x))` behind `h*(Γ)`.
//!
//! Everything is solved on the grid of the [`CostSpec`]: the cost is taken at
//! cell midpoints, `λ0` normalizes, and `λ1 ≤ 0` is located by bisection on
//! the increasing dual map `λ1 ↦ E_{λ1}[r]`. The budget is an inequality, so
//! once the uniform density already meets it the maximizer is uniform.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::density::{self, CostFn, CostSpec, GridDensity, GridSpec, Support};
use crate::error::{validation, Error, Result};
use crate::exec::ExecPolicy;
use crate::numeric;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Initial bracket `[−bracket, 0]` for `λ1`.
    pub bracket: f64,
    /// Largest bracket tried after geometric widening.
    pub max_bracket: f64,
    pub iterations: usize,
    /// Tolerance on both dual residuals.
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { bracket: 64.0, max_bracket: (1u64 << 20) as f64, iterations: 200, tolerance: 1e-8 }
    }
}

/// `f*(x) = exp(λ0 + λ1 r(x))` restricted to the grid window of `S`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpFamilyDensity {
    pub lambda0: f64,
    pub lambda1: f64,
    pub cost: CostFn,
    pub support: Support,
    pub grid: GridSpec,
}

impl ExpFamilyDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.grid.lo || x > self.grid.hi || !self.support.contains(x) {
            return 0.0;
        }
        (self.lambda0 + self.lambda1 * self.cost.eval(x)).exp()
    }

    /// Cell values at the grid midpoints.
    pub fn to_grid(&self) -> Result<GridDensity> {
        let weights = self.grid.midpoints().map(|x| self.pdf(x)).collect();
        GridDensity::from_unnormalized(self.grid.lo, self.grid.hi, weights)
    }
}

/// Solver output together with the grid density it describes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaxentSolution {
    pub density: ExpFamilyDensity,
    pub grid_density: GridDensity,
    pub hstar: f64,
    pub mean_cost: f64,
    /// `|∫f* − 1|`
    pub residual_norm: f64,
    /// `max(E[r] − Γ, 0)` when pinned, `|E[r] − Γ|` otherwise.
    pub residual_cost: f64,
    /// `λ1` was pinned to zero because the uniform density is feasible.
    pub pinned: bool,
}

impl MaxentSolution {
    pub fn lambda0(&self) -> f64 {
        self.density.lambda0
    }

    pub fn lambda1(&self) -> f64 {
        self.density.lambda1
    }
}

/// Log-partition pieces for a fixed `λ1` on cell costs `r` and width `w`.
struct Tilt {
    lambda0: f64,
    mean: f64,
    log_weights: Vec<f64>,
}

fn tilt(costs: &[f64], width: f64, lambda1: f64) -> Tilt {
    let exps: Vec<f64> = costs.iter().map(|r| lambda1 * r).collect();
    let lse = numeric::log_sum_exp(&exps);
    let mean = numeric::sum(exps.iter().zip(costs).map(|(e, r)| (e - lse).exp() * r));
    let lambda0 = -(lse + width.ln());
    Tilt { lambda0, mean, log_weights: exps.into_iter().map(|e| e + lambda0).collect() }
}

pub fn solve_maxent(cost: &CostSpec) -> Result<MaxentSolution> {
    solve_maxent_with(cost, &SolverConfig::default())
}

pub fn solve_maxent_with(cost: &CostSpec, cfg: &SolverConfig) -> Result<MaxentSolution> {
    cost.validate()?;
    let grid = cost.grid;
    let width = grid.width();
    let costs = cost.cell_costs();
    let gamma = cost.gamma;
    let infimum = costs.iter().copied().fold(f64::INFINITY, f64::min);
    if gamma <= infimum {
        return Err(Error::Infeasible { gamma, infimum });
    }

    let uniform = tilt(&costs, width, 0.0);
    let (lambda1, t, pinned) = if uniform.mean <= gamma {
        (0.0, uniform, true)
    } else {
        let mut lo = -cfg.bracket;
        loop {
            if tilt(&costs, width, lo).mean < gamma {
                break;
            }
            if lo <= -cfg.max_bracket {
                return Err(Error::Bracket { limit: cfg.max_bracket });
            }
            lo = (lo * 2.0).max(-cfg.max_bracket);
        }
        let mut hi = 0.0;
        for _ in 0..cfg.iterations {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if tilt(&costs, width, mid).mean < gamma {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = tilt(&costs, width, lo);
        let b = tilt(&costs, width, hi);
        if (a.mean - gamma).abs() <= (b.mean - gamma).abs() {
            (lo, a, false)
        } else {
            (hi, b, false)
        }
    };

    let weights: Vec<f64> = t.log_weights.iter().map(|l| l.exp()).collect();
    let residual_norm = (width * numeric::sum(weights.iter().copied()) - 1.0).abs();
    let residual_cost = if pinned { (t.mean - gamma).max(0.0) } else { (t.mean - gamma).abs() };
    if residual_norm > cfg.tolerance || residual_cost > cfg.tolerance {
        return Err(Error::Residual { norm: residual_norm, cost: residual_cost });
    }
    // −∫ f ln f with ln f = λ0 + λ1 r
    let hstar = -(t.lambda0 + lambda1 * t.mean);
    let grid_density = GridDensity::from_unnormalized(grid.lo, grid.hi, weights)?;
    Ok(MaxentSolution {
        density: ExpFamilyDensity {
            lambda0: t.lambda0,
            lambda1,
            cost: cost.cost.clone(),
            support: cost.support,
            grid,
        },
        grid_density,
        hstar,
        mean_cost: t.mean,
        residual_norm,
        residual_cost,
        pinned,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HStarPoint {
    pub gamma: f64,
    #[serde(with = "crate::serde_ext")]
    pub hstar: f64,
    /// `(λ0, λ1)` of the maximizer.
    pub solver_state: Option<(f64, f64)>,
}

/// Solve `h*(Γ)` at each budget; points are independent and may run in
/// parallel.
pub fn hstar_curve(cost: &CostSpec, gammas: &[f64], policy: ExecPolicy) -> Result<Vec<HStarPoint>> {
    if gammas.windows(2).any(|w| !(w[0] <= w[1])) {
        return validation("budgets must be sorted in increasing order");
    }
    if let Some(g0) = cost.gamma0 {
        if let Some(&g) = gammas.iter().find(|&&g| g < g0) {
            return validation(format!("budget {g} lies below Γ0 = {g0}"));
        }
    }
    policy
        .map_slice(gammas, |&g| {
            solve_maxent(&cost.with_gamma(g)).map(|s| HStarPoint {
                gamma: g,
                hstar: s.hstar,
                solver_state: Some((s.lambda0(), s.lambda1())),
            })
        })
        .into_iter()
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveShape {
    /// Largest `h(Γ_i) − h(Γ_{i+1})` over consecutive points (≤ 0 when monotone).
    pub monotonicity_violation: f64,
    /// Largest shortfall of a point below the chord of its neighbours.
    pub concavity_violation: f64,
}

impl CurveShape {
    pub fn holds(&self, mono_tol: f64, concave_tol: f64) -> bool {
        self.monotonicity_violation <= mono_tol && self.concavity_violation <= concave_tol
    }
}

/// Discrete monotonicity and concavity of a sorted curve.
pub fn curve_shape(points: &[HStarPoint]) -> CurveShape {
    let mut mono = f64::NEG_INFINITY;
    for w in points.windows(2) {
        mono = mono.max(w[0].hstar - w[1].hstar);
    }
    let mut concave = f64::NEG_INFINITY;
    for w in points.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        if c.gamma == a.gamma {
            continue;
        }
        let t = (b.gamma - a.gamma) / (c.gamma - a.gamma);
        let chord = (1.0 - t) * a.hstar + t * c.hstar;
        concave = concave.max(chord - b.hstar);
    }
    CurveShape { monotonicity_violation: mono, concavity_violation: concave }
}

/// `ln |{x ∈ S : r(x) ≤ Γ}|` on the grid (cells whose midpoint cost is within
/// budget); `−∞` when no cell qualifies. Always a lower bound on `h*(Γ)`.
pub fn sublevel_log_measure(cost: &CostSpec) -> f64 {
    let count = cost.cell_costs().iter().filter(|&&r| r <= cost.gamma).count();
    if count == 0 {
        f64::NEG_INFINITY
    } else {
        (count as f64 * cost.grid.width()).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineLine {
    pub hstar: f64,
    /// `D(f_Z ‖ f*)`
    pub gap: f64,
    pub h_fz: f64,
}

impl FineLine {
    /// Upper bound on the Rényi rate implied by the gap.
    pub fn rate_bound(&self) -> f64 {
        self.hstar - self.gap
    }
}

/// `h*(Γ)` and the relative entropy between a marginal `fz` that meets the
/// budget with equality and the maximizer.
pub fn fine_line_gap(fz: &GridDensity, cost: &CostSpec) -> Result<FineLine> {
    if !fz.grid().same_as(&cost.grid) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", fz.grid(), cost.grid)));
    }
    let mean = density::cost_expectation(fz, &cost.cost).mean;
    if (mean - cost.gamma).abs() > 1e-6 {
        return validation(format!("marginal has E[r] = {mean}, budget is Γ = {}", cost.gamma));
    }
    let sol = solve_maxent(cost)?;
    let gap = density::kl_divergence(fz, &sol.grid_density)?;
    Ok(FineLine { hstar: sol.hstar, gap, h_fz: density::shannon_entropy(fz).nats })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityProbe {
    pub trials: usize,
    /// `max_g h(g) − h(f*)` over the feasible perturbations.
    pub max_excess: f64,
}

/// Compare `h(f*)` with random feasible perturbations `g ∝ f*·(1 + s·u)`,
/// `u_i ~ U[−1, 1]`. Infeasible draws are redrawn; each trial has its own
/// RNG stream.
pub fn optimality_probe(
    sol: &MaxentSolution,
    cost: &CostSpec,
    trials: usize,
    seed: u64,
    policy: ExecPolicy,
) -> Result<OptimalityProbe> {
    let base = &sol.grid_density;
    let h0 = sol.hstar;
    let costs = cost.cell_costs();
    let width = base.cell_width();
    let outcomes = policy.map_indexed(trials, |trial| -> Result<f64> {
        let mut rng = rng::stream(seed, trial as u64);
        for _ in 0..1000 {
            let scale: f64 = rng.random_range(0.01..0.9);
            let w: Vec<f64> =
                base.weights().iter().map(|&f| f * (1.0 + scale * rng.random_range(-1.0..1.0))).collect();
            let total = width * numeric::sum(w.iter().copied());
            let mean = width * numeric::sum(w.iter().zip(&costs).map(|(f, r)| f * r)) / total;
            if mean > cost.gamma {
                continue;
            }
            let g = GridDensity::from_unnormalized(base.lo(), base.hi(), w)?;
            return Ok(density::shannon_entropy(&g).nats - h0);
        }
        Err(Error::Sampling { attempts: 1000 })
    });
    let mut max_excess = f64::NEG_INFINITY;
    for o in outcomes {
        max_excess = max_excess.max(o?);
    }
    Ok(OptimalityProbe { trials, max_excess })
}
