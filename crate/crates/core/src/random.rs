//! Seeded generators of random problem instances for property checks and
//! the acceptance suite.

use rand_distr::{Distribution, Normal};

use crate::burg::AutocovSpec;
use crate::density::{CostFn, GridDensity, GridSpec};
use crate::error::Result;
use crate::mixtures::MixtureSpec;

/// Positive log-normal weights on `cells` cells of `[lo, hi]`, with a
/// random spread and occasional empty cells.
pub fn grid_density<R: rand::Rng + ?Sized>(rng: &mut R, grid: GridSpec) -> Result<GridDensity> {
    let spread = rng.random_range(0.05..3.0);
    let normal: Normal<f64> = Normal::new(0.0, spread).expect("positive spread");
    let holes = rng.random_bool(0.3);
    let mut w: Vec<f64> = (0..grid.cells)
        .map(|_| if holes && rng.random_bool(0.2) { 0.0 } else { normal.sample(rng).exp() })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    GridDensity::from_unnormalized(grid.lo, grid.hi, w)
}

/// A grid with random endpoints in `[−5, 5]` and `2..=max_cells` cells.
pub fn grid<R: rand::Rng + ?Sized>(rng: &mut R, max_cells: usize) -> Result<GridSpec> {
    let lo = rng.random_range(-5.0..4.0);
    let hi = lo + rng.random_range(0.1..6.0);
    GridSpec::new(lo, hi, rng.random_range(2..=max_cells.max(2)))
}

/// `1..=max_components` random components on one grid. About one mixture in
/// five has a zero weight.
pub fn mixture<R: rand::Rng + ?Sized>(rng: &mut R, max_components: usize, max_cells: usize) -> Result<MixtureSpec> {
    let g = grid(rng, max_cells)?;
    let p = rng.random_range(1..=max_components.max(1));
    let components = (0..p).map(|_| grid_density(rng, g)).collect::<Result<Vec<_>>>()?;
    let mut weights: Vec<f64> = (0..p).map(|_| rng.random_range(0.01..1.0)).collect();
    if p > 1 && rng.random_bool(0.2) {
        weights[rng.random_range(0..p)] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let drift = 1.0 - weights.iter().sum::<f64>();
    if let Some(w) = weights.iter_mut().find(|w| **w > 0.0) {
        *w += drift;
    }
    MixtureSpec::new(components, weights)
}

#[derive(Clone, Debug)]
pub struct TruncationInstance {
    pub f: GridDensity,
    pub cost: CostFn,
    pub gamma: f64,
    pub delta: f64,
}

/// A random density (often with a sharp spike), a cost from a small family,
/// a budget at or above the density's cost, and `δ ∈ [0.01, 0.5]`.
pub fn truncation_instance<R: rand::Rng + ?Sized>(rng: &mut R) -> Result<TruncationInstance> {
    let g = GridSpec::new(rng.random_range(-4.0..0.0), rng.random_range(0.5..4.0), rng.random_range(16..=512))?;
    let mut f = grid_density(rng, g)?;
    if rng.random_bool(0.5) {
        let mut w = f.weights().to_vec();
        let i = rng.random_range(0..w.len());
        w[i] *= rng.random_range(10.0..1e4);
        f = GridDensity::from_unnormalized(g.lo, g.hi, w)?;
    }
    let cost = match rng.random_range(0..4) {
        0 => CostFn::Quadratic,
        1 => CostFn::Abs,
        2 => CostFn::Linear,
        _ => CostFn::Affine { slope: rng.random_range(-2.0..2.0), intercept: rng.random_range(-1.0..1.0) },
    };
    let mean = crate::density::cost_expectation(&f, &cost).mean;
    let gamma = mean + rng.random_range(0.0..1.0) * mean.abs().max(0.1);
    let delta = rng.random_range(0.01..0.5);
    Ok(TruncationInstance { f, cost, gamma, delta })
}

/// Positive-definite autocovariances of order `p` from reflection
/// coefficients in `(−0.8, 0.8)` and a random `α_0`.
pub fn autocov<R: rand::Rng + ?Sized>(rng: &mut R, p: usize) -> Result<AutocovSpec> {
    let alpha0 = rng.random_range(0.5..3.0);
    let mut r = vec![alpha0];
    let mut a: Vec<f64> = Vec::new();
    let mut err = alpha0;
    for m in 1..=p {
        let kappa: f64 = rng.random_range(-0.8..0.8);
        // invert the Levinson step: r_m = κ E_{m−1} + Σ a_j r_{m−1−j}
        let rm = kappa * err + a.iter().enumerate().map(|(j, aj)| aj * r[m - 1 - j]).sum::<f64>();
        r.push(rm);
        let prev = a.clone();
        for j in 0..m - 1 {
            a[j] = prev[j] - kappa * prev[m - 2 - j];
        }
        a.push(kappa);
        err *= 1.0 - kappa * kappa;
    }
    AutocovSpec::new(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burg::levinson_durbin;
    use crate::rng;

    #[test]
    fn generators_are_valid_and_seeded() {
        let mut a = rng::stream(1, 0);
        let mut b = rng::stream(1, 0);
        for _ in 0..50 {
            let m = mixture(&mut a, 4, 40).unwrap();
            assert_eq!(m.weights, mixture(&mut b, 4, 40).unwrap().weights);
            let t = truncation_instance(&mut a).unwrap();
            assert!(crate::density::cost_expectation(&t.f, &t.cost).mean <= t.gamma);
            let _ = truncation_instance(&mut b).unwrap();
        }
    }

    #[test]
    fn autocov_recovers_reflections() {
        let mut r = rng::stream(2, 0);
        for p in 0..=8 {
            let spec = autocov(&mut r, p).unwrap();
            let m = levinson_durbin(&spec).unwrap();
            assert_eq!(m.reflection.len(), p);
            assert!(m.reflection.iter().all(|k| k.abs() < 0.8 + 1e-9));
        }
    }
}
