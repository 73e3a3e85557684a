//! Density surgery: capping a density at `M` and restricting it to the
//! sublevel sets `D_k = {x : r⁻(x) ≤ k}`, with the entropy and cost
//! guarantees each operation carries.

use serde::{Deserialize, Serialize};

use crate::density::{self, CostFn, GridDensity};
use crate::error::{validation, Error, Result};
use crate::numeric;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    #[serde(rename = "M")]
    pub m: f64,
    /// `β = ∫ f ∧ M`
    pub beta: f64,
    pub cost_before: Option<f64>,
    pub cost_after: Option<f64>,
    pub h_before: f64,
    pub h_after: f64,
    /// `max f̃ = max(f ∧ M)/β`
    pub max_after: f64,
}

impl TruncationReport {
    /// `1 − β`, the mass removed by the cap.
    pub fn eps(&self) -> f64 {
        1.0 - self.beta
    }
}

/// Upper bound on the cost of the capped density when `∫f r ≤ Γ`, valid for
/// any `ε` with `β ≥ 1 − ε` and `∫(f − f∧M)|r| < ε`.
pub fn cost_tilde_bound(gamma: f64, eps: f64) -> f64 {
    let k = eps / (1.0 - eps);
    gamma + k * gamma.abs() + k
}

/// Lower bound on `h(f̃)` for finite `h(f)`, valid whenever `β ≥ 1 − ε` and
/// `M ≥ 1`.
pub fn entropy_floor_bound(h: f64, eps: f64) -> f64 {
    (1.0 - eps).ln() + h - eps / (1.0 - eps) * h.abs()
}

/// `f̃ = (f ∧ M)/β`. The cost fields of the report are filled in when `cost`
/// is given.
pub fn truncate_bound(f: &GridDensity, m: f64, cost: Option<&CostFn>) -> Result<(GridDensity, TruncationReport)> {
    if !(m >= 1.0) || !m.is_finite() {
        return validation(format!("cap M must be finite and ≥ 1, got {m}"));
    }
    let capped: Vec<f64> = f.weights().iter().map(|&v| v.min(m)).collect();
    let beta = f.cell_width() * numeric::sum(capped.iter().copied());
    if !(beta > 0.0) {
        return Err(Error::Construction("capped density has zero mass".into()));
    }
    let out = GridDensity::from_unnormalized(f.lo(), f.hi(), capped)?;
    let report = TruncationReport {
        m,
        beta: beta.min(1.0),
        cost_before: cost.map(|c| density::cost_expectation(f, c).mean),
        cost_after: cost.map(|c| density::cost_expectation(&out, c).mean),
        h_before: density::shannon_entropy(f).nats,
        h_after: density::shannon_entropy(&out).nats,
        max_after: out.max_density(),
    };
    Ok((out, report))
}

/// `∫ f ∧ M` and `∫ (f − f∧M)|r|`.
fn cap_conditions(f: &GridDensity, costs: &[f64], m: f64) -> (f64, f64) {
    let w = f.cell_width();
    let mass = w * numeric::sum(f.weights().iter().map(|&v| v.min(m)));
    let tail = w * numeric::sum(f.weights().iter().zip(costs).map(|(&v, r)| (v - v.min(m)) * r.abs()));
    (mass, tail)
}

/// Smallest power of two `M ≥ 1` with `∫ f∧M > 1 − ε` and
/// `∫ (f − f∧M)|r| < ε`. Terminates once `M ≥ max f`.
pub fn pick_m(f: &GridDensity, cost: &CostFn, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return validation(format!("ε must lie in (0, 1), got {eps}"));
    }
    let costs = cost.on_grid(&f.grid());
    let mut m = 1.0f64;
    loop {
        let (mass, tail) = cap_conditions(f, &costs, m);
        if (mass > 1.0 - eps && tail < eps) || m >= f.max_density() {
            return Ok(m);
        }
        m *= 2.0;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub k: f64,
    /// `β_k = ∫_{D_k} f`
    pub beta_k: f64,
    pub cells_kept: usize,
    pub h: f64,
    pub cost_mean: f64,
    pub abs_cost_mean: f64,
    /// `(1/β_k) ∫ f r⁺ + k`, which dominates `abs_cost_mean`.
    pub abs_cost_bound: f64,
}

/// `f̃_k = f·1{D_k}/β_k` with `D_k` judged at cell midpoints.
pub fn restrict_domain(f: &GridDensity, cost: &CostFn, k: f64) -> Result<(GridDensity, RestrictionReport)> {
    if !(k >= 0.0) {
        return validation(format!("restriction level k must be ≥ 0, got {k}"));
    }
    let costs = cost.on_grid(&f.grid());
    let keep: Vec<bool> = costs.iter().map(|r| (-r).max(0.0) <= k).collect();
    let kept: Vec<f64> = f.weights().iter().zip(&keep).map(|(&v, &on)| if on { v } else { 0.0 }).collect();
    let w = f.cell_width();
    let beta_k = w * numeric::sum(kept.iter().copied());
    if !(beta_k > 0.0) {
        return Err(Error::Construction(format!("D_k carries no mass for k = {k}")));
    }
    let out = GridDensity::from_unnormalized(f.lo(), f.hi(), kept)?;
    let moments = density::cost_expectation(&out, cost);
    let positive = w * numeric::sum(f.weights().iter().zip(&costs).map(|(&v, r)| v * r.max(0.0)));
    let report = RestrictionReport {
        k,
        beta_k,
        cells_kept: keep.iter().filter(|&&b| b).count(),
        h: density::shannon_entropy(&out).nats,
        cost_mean: moments.mean,
        abs_cost_mean: moments.abs_mean,
        abs_cost_bound: positive / beta_k + k,
    };
    Ok((out, report))
}

/// Restriction reports along an increasing schedule of levels.
pub fn restriction_schedule(f: &GridDensity, cost: &CostFn, ks: &[f64]) -> Result<Vec<RestrictionReport>> {
    if ks.windows(2).any(|p| !(p[0] < p[1])) {
        return validation("restriction levels must be strictly increasing");
    }
    ks.iter().map(|&k| restrict_domain(f, cost, k).map(|(_, r)| r)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundedApproximation {
    pub density: GridDensity,
    pub restriction: Option<RestrictionReport>,
    pub eps: f64,
    pub truncation: TruncationReport,
    pub h_input: f64,
    pub cost_input: f64,
    pub h_output: f64,
    pub cost_output: f64,
}

/// From `f` with `∫f r ≤ Γ`, build a bounded `f°` with `∫f° r ≤ Γ + δ` and
/// `h(f°) ≥ h(f) − δ`.
///
/// When `abs_cost_cap` is given and `∫f|r|` exceeds it, the density is
/// treated as having infinite absolute cost: it is first restricted to some
/// `D_k` (dyadic `k`) that keeps `h` within `δ/2` and the cost within
/// budget, and the cap then works with the remaining `δ/2`. `ε` starts at
/// 1/2 and is halved until both closed-form guarantees fit.
pub fn bounded_approximation(
    f: &GridDensity,
    cost: &CostFn,
    gamma: f64,
    delta: f64,
    abs_cost_cap: Option<f64>,
) -> Result<BoundedApproximation> {
    if !(delta > 0.0) {
        return validation("δ must be positive");
    }
    let h_input = density::shannon_entropy(f).nats;
    let moments = density::cost_expectation(f, cost);
    if moments.mean > gamma + 1e-12 {
        return validation(format!("input cost {} exceeds the budget {gamma}", moments.mean));
    }

    let mut g = f.clone();
    let mut restriction = None;
    let mut budget = delta;
    if abs_cost_cap.is_some_and(|cap| moments.abs_mean > cap) {
        budget = delta / 2.0;
        let mut k = 1.0f64;
        loop {
            let (r, rep) = restrict_domain(f, cost, k)?;
            if rep.h > h_input - budget && rep.cost_mean <= gamma {
                g = r;
                restriction = Some(rep);
                break;
            }
            if k > 1e300 {
                return Err(Error::Construction("no restriction level met the targets".into()));
            }
            k *= 2.0;
        }
    }

    let h_g = density::shannon_entropy(&g).nats;
    let mut eps = 0.5f64;
    while cost_tilde_bound(gamma, eps) > gamma + budget || entropy_floor_bound(h_g, eps) < h_g - budget {
        eps /= 2.0;
        if eps < 1e-300 {
            return Err(Error::Construction("ε underflowed".into()));
        }
    }
    let m = pick_m(&g, cost, eps)?;
    let (out, truncation) = truncate_bound(&g, m, Some(cost))?;
    let h_output = truncation.h_after;
    let cost_output = truncation.cost_after.unwrap_or(f64::NAN);
    Ok(BoundedApproximation {
        density: out,
        restriction,
        eps,
        truncation,
        h_input,
        cost_input: moments.mean,
        h_output,
        cost_output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{GridSpec, Parametric};

    #[test]
    fn uniform_is_unchanged() {
        let f = GridDensity::uniform(0.0, 1.0, 8).unwrap();
        let (g, rep) = truncate_bound(&f, 2.0, None).unwrap();
        assert_eq!(g, f);
        assert_eq!(rep.beta, 1.0);
        assert_eq!(pick_m(&f, &CostFn::Quadratic, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn two_cell_cap() {
        // cell masses 0.75 / 0.25; M = 2 leaves them alone
        let f = GridDensity::new(0.0, 1.0, vec![1.5, 0.5]).unwrap();
        let (g, rep) = truncate_bound(&f, 2.0, None).unwrap();
        assert_eq!(rep.beta, 1.0);
        assert_eq!(g, f);
        // M = 1: β = 0.5·1 + 0.5·0.5 = 0.75, f̃ = (4/3, 2/3)
        let (g, rep) = truncate_bound(&f, 1.0, None).unwrap();
        assert!((rep.beta - 0.75).abs() < 1e-15);
        assert!((g.weights()[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((g.weights()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!(truncate_bound(&f, 0.5, None).is_err());
    }

    #[test]
    fn triangular_cap() {
        let grid = GridSpec::new(0.0, 1.0, 1 << 12).unwrap();
        let f = GridDensity::from_fn(grid, |x| 2.0 * x).unwrap();
        let (g, rep) = truncate_bound(&f, 1.5, None).unwrap();
        // β = 1 − ∫_{3/4}^1 (2x − 1.5) = 1 − 1/16
        assert!((rep.beta - 0.9375).abs() < 1e-6);
        // h(2x) = 1/2 − ln 2
        assert!((rep.h_before - (0.5 - 2f64.ln())).abs() < 1e-6);
        assert!(rep.h_after >= rep.h_before - 0.1);
        assert!(g.max_density() <= 1.5 / rep.beta + 1e-12);
    }

    #[test]
    fn pick_m_examples() {
        let grid = GridSpec::new(-1.0, 1.0, 4096).unwrap();
        let f = crate::density::quantize(&Parametric::Gaussian { mean: 0.0, sigma: 0.01 }, grid, None).unwrap();
        let costs = CostFn::Quadratic.on_grid(&grid);
        for eps in [0.01, 0.1] {
            let m = pick_m(&f, &CostFn::Quadratic, eps).unwrap();
            let (mass, tail) = cap_conditions(&f, &costs, m);
            assert!(mass > 1.0 - eps && tail < eps);
            let (mass, tail) = cap_conditions(&f, &costs, m / 2.0);
            assert!(m == 1.0 || !(mass > 1.0 - eps && tail < eps));
        }
        // a looser ε allows a cap strictly below the peak
        assert!(pick_m(&f, &CostFn::Quadratic, 0.1).unwrap() < f.max_density());

        let spike = GridDensity::from_unnormalized(0.0, 1.0, {
            let mut w = vec![1.0; 20];
            w[3] = 19.0;
            w
        })
        .unwrap();
        assert!((spike.max_density() - 10.0).abs() < 1e-12);
        assert!(pick_m(&spike, &CostFn::Abs, 0.5).unwrap() <= 16.0);
    }

    #[test]
    fn restriction_examples() {
        let f = GridDensity::uniform(-1.0, 1.0, 4).unwrap();
        let (_, rep) = restrict_domain(&f, &CostFn::Linear, 0.5).unwrap();
        assert!((rep.beta_k - 0.75).abs() < 1e-15);
        assert!((rep.h - 1.5f64.ln()).abs() < 1e-15);
        assert!(rep.abs_cost_mean <= rep.abs_cost_bound);

        let (g, rep) = restrict_domain(&f, &CostFn::Quadratic, 0.0).unwrap();
        assert_eq!(g, f);
        assert_eq!(rep.beta_k, 1.0);

        let neg = CostFn::Constant { value: -5.0 };
        assert!(restrict_domain(&f, &neg, 1.0).is_err());
    }

    /// Heavy left tail with a cost that grows like −x² on the left.
    fn heavy_left() -> (GridDensity, CostFn) {
        let grid = GridSpec::new(-400.0, 4.0, 1 << 15).unwrap();
        let f = GridDensity::from_fn(grid, |x| if x < 0.0 { 1.0 / (1.0 + x * x) } else { (-x).exp() }).unwrap();
        (f, CostFn::custom("-x² on x<0", |x| if x < 0.0 { -x * x } else { x }))
    }

    #[test]
    fn restriction_schedule_converges() {
        let (f, r) = heavy_left();
        let h = density::shannon_entropy(&f).nats;
        let ks: Vec<f64> = (0..19).map(|i| 2f64.powi(i)).collect();
        let reps = restriction_schedule(&f, &r, &ks).unwrap();
        for w in reps.windows(2) {
            assert!(w[1].beta_k >= w[0].beta_k);
            assert!(w[1].cost_mean <= w[0].cost_mean + 1e-12);
            assert!(w[1].h >= w[0].h - 1e-12);
        }
        let last = reps.last().unwrap();
        assert!((last.h - h).abs() < 1e-3);
        assert!(reps.iter().all(|p| p.abs_cost_mean <= p.abs_cost_bound + 1e-9));
    }

    #[test]
    fn pipeline_meets_targets() {
        let (f, r) = heavy_left();
        let gamma = density::cost_expectation(&f, &r).mean + 1.0;
        let delta = 0.05;
        for cap in [None, Some(10.0)] {
            let out = bounded_approximation(&f, &r, gamma, delta, cap).unwrap();
            assert_eq!(out.restriction.is_some(), cap.is_some());
            assert!(out.cost_output <= gamma + delta);
            assert!(out.h_output >= out.h_input - delta);
            assert!(out.density.max_density().is_finite());
        }
    }
}
