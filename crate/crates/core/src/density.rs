//! Grid densities, cost functions and the entropy functionals built on them.
//!
//! A [`GridDensity`] is a piecewise-constant density on a uniform grid of
//! cells over `[lo, hi]`. Integrals use the midpoint rule: a cell contributes
//! `width · g(weight_i, x_i)` where `x_i` is its midpoint. Cells with zero
//! weight contribute nothing to any entropy integral (`0 · ln 0 := 0`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::numeric;

/// Tolerance on `Σ width · weight = 1` for a valid density.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Default truncated tail mass accepted by [`quantize`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;

/// A uniform partition of `[lo, hi]` into `cells` cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return validation(format!("grid needs finite lo < hi, got [{lo}, {hi}]"));
        }
        if cells == 0 {
            return validation("grid needs at least one cell");
        }
        Ok(GridSpec { lo, hi, cells })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(move |i| self.midpoint(i))
    }

    /// Cell containing `x`; the right endpoint belongs to the last cell.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let i = ((x - self.lo) / self.width()).floor() as usize;
        Some(i.min(self.cells - 1))
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        let tol = 1e-12 * (self.hi - self.lo).abs().max(1.0);
        self.cells == other.cells
            && (self.lo - other.lo).abs() <= tol
            && (self.hi - other.hi).abs() <= tol
    }
}

#[derive(Serialize, Deserialize)]
struct GridDensityRepr {
    lo: f64,
    hi: f64,
    weights: Vec<f64>,
}

/// Normalized piecewise-constant density. `weights[i]` is the density value
/// (mass per unit length) on cell `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDensityRepr", into = "GridDensityRepr")]
pub struct GridDensity {
    grid: GridSpec,
    weights: Vec<f64>,
}

impl TryFrom<GridDensityRepr> for GridDensity {
    type Error = Error;
    fn try_from(r: GridDensityRepr) -> Result<Self> {
        GridDensity::new(r.lo, r.hi, r.weights)
    }
}

impl From<GridDensity> for GridDensityRepr {
    fn from(g: GridDensity) -> Self {
        GridDensityRepr { lo: g.grid.lo, hi: g.grid.hi, weights: g.weights }
    }
}

impl GridDensity {
    /// Validating constructor: weights must be finite, nonnegative and
    /// integrate to one within [`NORMALIZATION_TOL`].
    pub fn new(lo: f64, hi: f64, weights: Vec<f64>) -> Result<Self> {
        let grid = GridSpec::new(lo, hi, weights.len())?;
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return validation(format!("density weights must be finite and ≥ 0, found {bad}"));
        }
        let total = grid.width() * numeric::sum(weights.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return validation(format!("density integrates to {total}, not 1"));
        }
        Ok(GridDensity { grid, weights })
    }

    /// Rescale nonnegative weights so they integrate to one.
    pub fn from_unnormalized(lo: f64, hi: f64, mut weights: Vec<f64>) -> Result<Self> {
        let grid = GridSpec::new(lo, hi, weights.len())?;
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return validation("density weights must be finite and ≥ 0");
        }
        let total = grid.width() * numeric::sum(weights.iter().copied());
        if !(total > 0.0 && total.is_finite()) {
            return validation(format!("cannot normalize weights with integral {total}"));
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(GridDensity { grid, weights })
    }

    /// Density proportional to `f` evaluated at the cell midpoints.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let weights = grid.midpoints().map(f).collect();
        Self::from_unnormalized(grid.lo, grid.hi, weights)
    }

    pub fn uniform(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        let grid = GridSpec::new(lo, hi, cells)?;
        Ok(GridDensity { grid, weights: vec![1.0 / (hi - lo); cells] })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn lo(&self) -> f64 {
        self.grid.lo
    }

    pub fn hi(&self) -> f64 {
        self.grid.hi
    }

    pub fn cell_width(&self) -> f64 {
        self.grid.width()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.grid.midpoint(i)
    }

    /// Probability mass of each cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        let w = self.cell_width();
        self.weights.iter().map(|f| f * w).collect()
    }

    pub fn max_density(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Density value at `x` (zero outside `[lo, hi]`).
    pub fn value_at(&self, x: f64) -> f64 {
        self.grid.cell_of(x).map_or(0.0, |i| self.weights[i])
    }

    pub fn shares_grid(&self, other: &GridDensity) -> bool {
        self.grid.same_as(&other.grid)
    }

    /// Midpoint-rule integral of `g(weight, midpoint)` over the grid.
    pub fn integrate(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        let w = self.cell_width();
        w * numeric::sum(self.weights.iter().enumerate().map(|(i, &f)| g(f, self.midpoint(i))))
    }
}

/// An entropy in nats together with its order; `alpha == 1` encodes Shannon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub alpha: f64,
    #[serde(with = "crate::serde_ext")]
    pub nats: f64,
}

impl EntropyValue {
    pub fn is_shannon(&self) -> bool {
        self.alpha == 1.0
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) || alpha == 1.0 {
        return validation(format!("Rényi order must be positive and ≠ 1, got {alpha}"));
    }
    Ok(())
}

/// `(1/(1−α)) ln I` with the conventions for `I = ∞`: `+∞` when `α < 1`,
/// `−∞` when `α > 1`.
pub fn renyi_from_power_integral(integral: f64, alpha: f64) -> f64 {
    if integral == f64::INFINITY {
        return if alpha < 1.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    integral.ln() / (1.0 - alpha)
}

/// Order-α Rényi entropy `(1/(1−α)) ln ∫ f^α`.
pub fn renyi_entropy(f: &GridDensity, alpha: f64) -> Result<EntropyValue> {
    check_alpha(alpha)?;
    let integral = f.integrate(|v, _| if v > 0.0 { v.powf(alpha) } else { 0.0 });
    Ok(EntropyValue { alpha, nats: renyi_from_power_integral(integral, alpha) })
}

/// Differential Shannon entropy `−∫ f ln f`.
pub fn shannon_entropy(f: &GridDensity) -> EntropyValue {
    let nats = -f.integrate(|v, _| if v > 0.0 { v * v.ln() } else { 0.0 });
    EntropyValue { alpha: 1.0, nats }
}

/// Rényi entropy for `alpha ≠ 1`, Shannon entropy for `alpha == 1`.
pub fn entropy(f: &GridDensity, alpha: f64) -> Result<EntropyValue> {
    if alpha == 1.0 {
        Ok(shannon_entropy(f))
    } else {
        renyi_entropy(f, alpha)
    }
}

/// For a density bounded by `max_density` and any `α > 1`,
/// `∫ f^α ≤ M^{α−1}`, hence `h_α(f) ≥ −ln M`.
pub fn bounded_density_renyi_floor(max_density: f64) -> f64 {
    -max_density.ln()
}

/// Relative entropy `D(g‖f*) = ∫ g ln(g/f*)`; `+∞` when `g` charges a cell
/// where `f*` vanishes.
pub fn kl_divergence(g: &GridDensity, fstar: &GridDensity) -> Result<f64> {
    if !g.shares_grid(fstar) {
        return Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            g.grid(),
            fstar.grid()
        )));
    }
    let w = g.cell_width();
    let mut terms = Vec::with_capacity(g.len());
    for (&a, &b) in g.weights().iter().zip(fstar.weights()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        terms.push(w * a * (a / b).ln());
    }
    // Rounding can leave a tiny negative value for g = f*.
    Ok(numeric::sum(terms).max(0.0))
}

/// Opaque user-supplied cost function.
#[derive(Clone)]
pub struct CustomCost {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomCost({})", self.name)
    }
}

/// The cost function `r`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFn {
    /// `r(x) = x²`
    Quadratic,
    /// `r(x) = x`
    Linear,
    /// `r(x) = slope·x + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `r(x) = |x|`
    Abs,
    Constant { value: f64 },
    /// Piecewise-linear interpolation through `(xs, ys)`, constant beyond
    /// the end points.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
    #[serde(skip)]
    Custom(CustomCost),
}

impl CostFn {
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CostFn::Custom(CustomCost { name: name.to_string(), f: Arc::new(f) })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CostFn::Quadratic => x * x,
            CostFn::Linear => x,
            CostFn::Affine { slope, intercept } => slope * x + intercept,
            CostFn::Abs => x.abs(),
            CostFn::Constant { value } => *value,
            CostFn::Tabulated { xs, ys } => interpolate(xs, ys, x),
            CostFn::Custom(c) => (c.f)(x),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let CostFn::Tabulated { xs, ys } = self {
            if xs.is_empty() || xs.len() != ys.len() {
                return validation("tabulated cost needs equally long, nonempty xs and ys");
            }
            if xs.windows(2).any(|p| !(p[0] < p[1])) {
                return validation("tabulated cost abscissae must be strictly increasing");
            }
            if xs.iter().chain(ys).any(|v| !v.is_finite()) {
                return validation("tabulated cost values must be finite");
            }
        }
        Ok(())
    }

    /// Cost at every midpoint of `grid`.
    pub fn on_grid(&self, grid: &GridSpec) -> Vec<f64> {
        grid.midpoints().map(|x| self.eval(x)).collect()
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1, y0, y1) = (xs[j - 1], xs[j], ys[j - 1], ys[j]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// The support set `S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Support {
    Interval { lo: f64, hi: f64 },
    /// `[lo, ∞)`
    RightHalfLine { lo: f64 },
    /// `(−∞, hi]`
    LeftHalfLine { hi: f64 },
    Line,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Interval { lo, hi } => x >= lo && x <= hi,
            Support::RightHalfLine { lo } => x >= lo,
            Support::LeftHalfLine { hi } => x <= hi,
            Support::Line => x.is_finite(),
        }
    }

    /// Lebesgue measure `|S|` (possibly `+∞`).
    pub fn measure(&self) -> f64 {
        match *self {
            Support::Interval { lo, hi } => hi - lo,
            _ => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Support::Interval { .. })
    }
}

/// Cost function, support, discretization window and budget `Γ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostSpec {
    pub cost: CostFn,
    pub support: Support,
    /// Discretization of `S` (a truncation window when `S` is unbounded).
    pub grid: GridSpec,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
}

impl CostSpec {
    pub fn new(cost: CostFn, support: Support, grid: GridSpec, gamma: f64) -> Result<Self> {
        let spec = CostSpec { cost, support, grid, gamma, gamma0: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = Some(gamma0);
        self
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        CostSpec { gamma, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.cost.validate()?;
        GridSpec::new(self.grid.lo, self.grid.hi, self.grid.cells)?;
        if !self.gamma.is_finite() {
            return validation("budget Γ must be finite");
        }
        if !(self.support.contains(self.grid.lo) && self.support.contains(self.grid.hi)) {
            return validation(format!(
                "grid [{}, {}] is not contained in the support {:?}",
                self.grid.lo, self.grid.hi, self.support
            ));
        }
        if let Some(x) = self.grid.midpoints().find(|&x| !self.cost.eval(x).is_finite()) {
            return validation(format!("cost is not finite at grid point {x}"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.cost.eval(x)
    }

    /// Cost at the grid midpoints.
    pub fn cell_costs(&self) -> Vec<f64> {
        self.cost.on_grid(&self.grid)
    }
}

/// `∫ f r` and `∫ f |r|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMoments {
    #[serde(with = "crate::serde_ext")]
    pub mean: f64,
    #[serde(with = "crate::serde_ext")]
    pub abs_mean: f64,
}

pub fn cost_expectation(f: &GridDensity, cost: &CostFn) -> CostMoments {
    let mean = f.integrate(|v, x| if v > 0.0 { v * cost.eval(x) } else { 0.0 });
    let abs_mean = f.integrate(|v, x| if v > 0.0 { v * cost.eval(x).abs() } else { 0.0 });
    CostMoments { mean, abs_mean }
}

/// Parametric densities with closed-form entropies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parametric {
    Gaussian { mean: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
}

impl Parametric {
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Parametric::Gaussian { mean, sigma } => {
                let z = (x - mean) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Parametric::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Parametric::Exponential { rate } => {
                if x >= 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Mass outside `[lo, hi]`, computed from the tails directly.
    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            Parametric::Gaussian { mean, sigma } => {
                let s = sigma * std::f64::consts::SQRT_2;
                0.5 * libm::erfc((mean - lo) / s) + 0.5 * libm::erfc((hi - mean) / s)
            }
            Parametric::Uniform { lo: a, hi: b } => {
                let inside = (b.min(hi) - a.max(lo)).max(0.0);
                (1.0 - inside / (b - a)).max(0.0)
            }
            Parametric::Exponential { rate } => {
                let left = if lo > 0.0 { 1.0 - (-rate * lo).exp() } else { 0.0 };
                let right = (-rate * hi.max(0.0)).exp();
                left + right
            }
        }
    }

    pub fn shannon(&self) -> f64 {
        match *self {
            Parametric::Gaussian { sigma, .. } => {
                0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln()
            }
            Parametric::Uniform { lo, hi } => (hi - lo).ln(),
            Parametric::Exponential { rate } => 1.0 - rate.ln(),
        }
    }

    pub fn renyi(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(match *self {
            Parametric::Gaussian { sigma, .. } => {
                0.5 * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
                    + alpha.ln() / (2.0 * (alpha - 1.0))
            }
            Parametric::Uniform { lo, hi } => (hi - lo).ln(),
            Parametric::Exponential { rate } => -rate.ln() + alpha.ln() / (alpha - 1.0),
        })
    }
}

/// Sample `p` at the midpoints of `grid` and renormalize. Fails when more
/// than `tail_tol` (default [`DEFAULT_TAIL_TOL`]) of the mass lies outside
/// the grid.
pub fn quantize(p: &Parametric, grid: GridSpec, tail_tol: Option<f64>) -> Result<GridDensity> {
    let tolerance = tail_tol.unwrap_or(DEFAULT_TAIL_TOL);
    let lost = p.mass_outside(grid.lo, grid.hi);
    if lost > tolerance {
        return Err(Error::TailMass { lost, tolerance });
    }
    GridDensity::from_fn(grid, |x| p.pdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN_2PI_E_HALF: f64 = 1.418_938_533_204_672_7;

    fn gaussian_grid() -> GridDensity {
        let grid = GridSpec::new(-8.0, 8.0, 1 << 14).unwrap();
        quantize(&Parametric::Gaussian { mean: 0.0, sigma: 1.0 }, grid, None).unwrap()
    }

    #[test]
    fn uniform_renyi_values() {
        let u01 = GridDensity::uniform(0.0, 1.0, 7).unwrap();
        assert!(renyi_entropy(&u01, 2.0).unwrap().nats.abs() < 1e-15);
        let u02 = GridDensity::uniform(0.0, 2.0, 4).unwrap();
        assert!((renyi_entropy(&u02, 2.0).unwrap().nats - 2f64.ln()).abs() < 1e-15);
        assert!((shannon_entropy(&u02).nats - 2f64.ln()).abs() < 1e-15);
        assert!(shannon_entropy(&u01).nats.abs() < 1e-15);
    }

    #[test]
    fn gaussian_entropies_match_closed_forms() {
        let g = gaussian_grid();
        // (1/2) ln(2π) + (ln 2)/2, mpmath: 1.2655121234846454
        let h2 = renyi_entropy(&g, 2.0).unwrap().nats;
        assert!((h2 - 1.265_512_123_484_645_4).abs() < 1e-6, "{h2}");
        let h = shannon_entropy(&g).nats;
        assert!((h - LN_2PI_E_HALF).abs() < 1e-6, "{h}");
        let m = cost_expectation(&g, &CostFn::Quadratic);
        assert!((m.mean - 1.0).abs() < 1e-6);
        assert!((m.abs_mean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cost_expectations() {
        let u01 = GridDensity::uniform(0.0, 1.0, 10).unwrap();
        assert!((cost_expectation(&u01, &CostFn::Linear).mean - 0.5).abs() < 1e-15);
        // midpoint rule on x² is exact up to w²/12; use many cells
        let u = GridDensity::uniform(-1.0, 1.0, 1 << 12).unwrap();
        let w = u.cell_width();
        let m = cost_expectation(&u, &CostFn::Quadratic).mean;
        assert!((m + w * w / 12.0 - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(GridDensity::new(0.0, 1.0, vec![0.5, 0.4]).is_err());
        assert!(GridDensity::new(0.0, 1.0, vec![1.5, -0.5, 1.0]).is_err());
        assert!(GridDensity::new(1.0, 1.0, vec![1.0]).is_err());
        let u = GridDensity::uniform(0.0, 1.0, 2).unwrap();
        assert!(renyi_entropy(&u, 1.0).is_err());
        assert!(renyi_entropy(&u, 0.0).is_err());
        assert!(renyi_entropy(&u, -2.0).is_err());
        let json = r#"{"lo":0.0,"hi":1.0,"weights":[0.3,0.3]}"#;
        assert!(serde_json::from_str::<GridDensity>(json).is_err());
    }

    #[test]
    fn kl_examples() {
        let g = GridDensity::uniform(0.0, 1.0, 2).unwrap();
        let f = GridDensity::new(0.0, 1.0, vec![1.5, 0.5]).unwrap();
        assert_eq!(kl_divergence(&f, &f).unwrap(), 0.0);
        // 0.5 ln(1/1.5) + 0.5 ln 2, mpmath: 0.14384103622589046
        assert!((kl_divergence(&g, &f).unwrap() - 0.143_841_036_225_890_46).abs() < 1e-15);
        let h = GridDensity::new(0.0, 1.0, vec![2.0, 0.0]).unwrap();
        assert_eq!(kl_divergence(&g, &h).unwrap(), f64::INFINITY);
        let other = GridDensity::uniform(0.0, 2.0, 2).unwrap();
        assert!(matches!(kl_divergence(&g, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn quantize_examples() {
        let g = gaussian_grid();
        let m2 = cost_expectation(&g, &CostFn::Quadratic).mean;
        assert!((m2 - 1.0).abs() < 1e-6);

        let u = quantize(&Parametric::Uniform { lo: 0.0, hi: 1.0 }, GridSpec::new(0.0, 1.0, 5).unwrap(), None)
            .unwrap();
        assert!(u.weights().iter().all(|&w| (w - 1.0).abs() < 1e-15));

        let narrow = GridSpec::new(-1.0, 1.0, 64).unwrap();
        match quantize(&Parametric::Gaussian { mean: 0.0, sigma: 1.0 }, narrow, None) {
            // 2Φ(−1), mpmath: 0.31731050786291410
            Err(Error::TailMass { lost, .. }) => assert!((lost - 0.317_310_507_862_914_1).abs() < 1e-12),
            other => panic!("expected tail-mass error, got {other:?}"),
        }
        assert!(quantize(&Parametric::Gaussian { mean: 0.0, sigma: 1.0 }, narrow, Some(0.5)).is_ok());
    }

    #[test]
    fn parametric_closed_forms_match_quadrature() {
        let e = Parametric::Exponential { rate: 2.0 };
        let f = quantize(&e, GridSpec::new(0.0, 30.0, 1 << 16).unwrap(), None).unwrap();
        assert!((shannon_entropy(&f).nats - e.shannon()).abs() < 1e-5);
        assert!((renyi_entropy(&f, 3.0).unwrap().nats - e.renyi(3.0).unwrap()).abs() < 1e-5);
        let g = Parametric::Gaussian { mean: 1.0, sigma: 0.5 };
        let q = quantize(&g, GridSpec::new(-6.0, 8.0, 1 << 14).unwrap(), None).unwrap();
        assert!((renyi_entropy(&q, 0.5).unwrap().nats - g.renyi(0.5).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn bounded_density_floor() {
        for (w, alpha) in [(vec![1.5, 0.5], 2.0), (vec![0.25; 8], 3.0), (vec![3.0, 1.0, 0.0, 0.0], 1.5)] {
            let hi = 2.0;
            let f = GridDensity::from_unnormalized(0.0, hi, w).unwrap();
            let h = renyi_entropy(&f, alpha).unwrap().nats;
            assert!(h >= bounded_density_renyi_floor(f.max_density()) - 1e-12);
        }
    }

    #[test]
    fn tabulated_cost_interpolates() {
        let c = CostFn::Tabulated { xs: vec![0.0, 1.0, 3.0], ys: vec![0.0, 2.0, 0.0] };
        c.validate().unwrap();
        assert_eq!(c.eval(-1.0), 0.0);
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(2.0), 1.0);
        assert_eq!(c.eval(9.0), 0.0);
        let bad = CostFn::Tabulated { xs: vec![0.0, 0.0], ys: vec![1.0, 2.0] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cost_spec_checks_grid_against_support() {
        let grid = GridSpec::new(-1.0, 1.0, 4).unwrap();
        assert!(CostSpec::new(CostFn::Linear, Support::RightHalfLine { lo: 0.0 }, grid, 1.0).is_err());
        assert!(CostSpec::new(CostFn::Linear, Support::Line, grid, 1.0).is_ok());
        let blowup = CostFn::custom("1/x", |x| 1.0 / x);
        let odd = GridSpec::new(-1.0, 1.0, 3).unwrap(); // midpoint at 0
        assert!(CostSpec::new(blowup, Support::Line, odd, 1.0).is_err());
    }

    #[test]
    fn entropy_value_serializes_infinities() {
        let v = EntropyValue { alpha: 0.5, nats: f64::INFINITY };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"alpha":0.5,"nats":"inf"}"#);
        let v = EntropyValue { alpha: 2.0, nats: 0.0 };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"alpha":2.0,"nats":0.0}"#);
    }
}
