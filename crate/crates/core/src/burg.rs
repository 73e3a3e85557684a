//! Processes with prescribed autocovariances `E[X_i X_{i+k}] = α_k`,
//! `k = 0..=p`: AR fit by Levinson-Durbin, discrete spectral initialization,
//! simulation, Monte Carlo verification and the Rényi-rate sandwich.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::exec::ExecPolicy;
use crate::numeric;
use crate::rng;
use crate::stationarize::BlockProcess;

/// Off-diagonal threshold and sweep cap of the Jacobi eigensolver.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Simulated paths beyond this magnitude are reported as unstable.
pub const OVERFLOW_GUARD: f64 = 1e150;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocovSpec {
    /// `α_0, …, α_p`
    pub alphas: Vec<f64>,
}

impl AutocovSpec {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        let s = AutocovSpec { alphas };
        s.certify()?;
        Ok(s)
    }

    pub fn p(&self) -> usize {
        self.alphas.len().saturating_sub(1)
    }

    /// `size × size` Toeplitz matrix with entries `α_{|ℓ−m|}`.
    pub fn toeplitz(&self, size: usize) -> DMatrix<f64> {
        DMatrix::from_fn(size, size, |i, j| self.alphas[i.abs_diff(j)])
    }

    /// Cholesky certificate that the `(p+1)×(p+1)` Toeplitz matrix is
    /// positive definite.
    pub fn certify(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return validation("at least α_0 is required");
        }
        if self.alphas.iter().any(|a| !a.is_finite()) {
            return validation("autocovariances must be finite");
        }
        if self.toeplitz(self.p() + 1).cholesky().is_none() {
            return Err(Error::NotPositiveDefinite(format!("Toeplitz matrix of {:?}", self.alphas)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub q: f64,
    pub w: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ARModel {
    pub a: Vec<f64>,
    pub sigma2: f64,
    pub reflection: Vec<f64>,
    /// `p × p` Toeplitz minor, the covariance of `(X_{1−p}, …, X_0)`.
    pub kp: Vec<Vec<f64>>,
    pub spectral: Vec<SpectralPair>,
}

impl ARModel {
    pub fn p(&self) -> usize {
        self.a.len()
    }

    /// `α_0, …, α_p` implied by the model: the first row of `K_p`, then
    /// `α_p = Σ_k a_k α_{p−k}`. With `p = 0` this is just `σ²`.
    pub fn autocovariances(&self) -> Vec<f64> {
        let p = self.p();
        if p == 0 {
            return vec![self.sigma2];
        }
        let mut r = self.kp[0].clone();
        r.push(numeric::sum(self.a.iter().enumerate().map(|(k, ak)| ak * r[p - 1 - k])));
        r
    }
}

/// AR coefficients and innovation variance solving the Yule-Walker system.
/// The spectral pairs of the initialization are filled in as well.
pub fn levinson_durbin(spec: &AutocovSpec) -> Result<ARModel> {
    spec.certify()?;
    let r = &spec.alphas;
    let p = spec.p();
    let mut a: Vec<f64> = Vec::with_capacity(p);
    let mut err = r[0];
    let mut reflection = Vec::with_capacity(p);
    for m in 1..=p {
        let acc = r[m] - numeric::sum(a.iter().enumerate().map(|(j, aj)| aj * r[m - 1 - j]));
        let kappa = acc / err;
        if !(kappa.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite(format!("reflection coefficient {kappa} at order {m}")));
        }
        let prev = a.clone();
        for j in 0..m - 1 {
            a[j] = prev[j] - kappa * prev[m - 2 - j];
        }
        a.push(kappa);
        reflection.push(kappa);
        err *= 1.0 - kappa * kappa;
    }
    let sigma2 = r[0] - numeric::sum(a.iter().zip(&r[1..]).map(|(x, y)| x * y));
    if !(sigma2 > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("innovation variance {sigma2}")));
    }
    let kp = (0..p).map(|i| (0..p).map(|j| r[i.abs_diff(j)]).collect()).collect();
    let mut model = ARModel { a, sigma2, reflection, kp, spectral: Vec::new() };
    model.spectral = spectral_init(&model)?;
    Ok(model)
}

/// Independent oracle: dense LU solve of the Yule-Walker equations.
pub fn dense_yule_walker(spec: &AutocovSpec) -> Result<(Vec<f64>, f64)> {
    let p = spec.p();
    if p == 0 {
        return Ok((Vec::new(), spec.alphas[0]));
    }
    let m = spec.toeplitz(p);
    let rhs = DVector::from_column_slice(&spec.alphas[1..]);
    let a = m.lu().solve(&rhs).ok_or_else(|| Error::NotPositiveDefinite("singular Toeplitz minor".into()))?;
    let sigma2 = spec.alphas[0] - a.dot(&rhs);
    Ok((a.iter().copied().collect(), sigma2))
}

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix by cyclic
/// Jacobi rotations.
pub fn jacobi_eigen(m: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return validation("matrix must be square");
    }
    for i in 0..n {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * (1.0 + m[i][j].abs()) {
                return validation("matrix must be symmetric");
            }
        }
    }
    let mut a = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let off = |a: &[Vec<f64>]| (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].abs()).fold(0.0, f64::max);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= JACOBI_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    Ok((values, vectors))
}

/// Atoms `w_ℓ = √(Σλ)·u_ℓ` with weights `q_ℓ = λ_ℓ/Σλ`, so that a discrete
/// `W` with `Pr[W = w_ℓ] = q_ℓ` has `E[WWᵀ] = K_p`.
pub fn spectral_init(model: &ARModel) -> Result<Vec<SpectralPair>> {
    let p = model.kp.len();
    if p == 0 {
        return Ok(vec![SpectralPair { q: 1.0, w: Vec::new() }]);
    }
    let (values, vectors) = jacobi_eigen(&model.kp)?;
    if values.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite(format!("eigenvalues {values:?}")));
    }
    let total = numeric::sum(values.iter().copied());
    let pairs: Vec<SpectralPair> = values
        .iter()
        .zip(vectors)
        .map(|(&l, u)| SpectralPair { q: l / total, w: u.iter().map(|x| x * total.sqrt()).collect() })
        .collect();
    let residual = reconstruction_residual(&model.kp, &pairs);
    if residual > 1e-10 {
        return Err(Error::Construction(format!("spectral reconstruction residual {residual:e}")));
    }
    Ok(pairs)
}

/// `max |Σ q w wᵀ − K|`.
pub fn reconstruction_residual(k: &[Vec<f64>], pairs: &[SpectralPair]) -> f64 {
    let n = k.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = numeric::sum(pairs.iter().map(|pr| pr.q * pr.w[i] * pr.w[j]));
            worst = worst.max((s - k[i][j]).abs());
        }
    }
    worst
}

/// Source of centered, uncorrelated innovations with variance `σ²`.
pub trait Innovations: Send + Sync {
    fn sigma2(&self) -> f64;
    fn sample(&self, len: usize, rng: &mut rng::Rng) -> Result<Vec<f64>>;
}

#[derive(Clone, Copy, Debug)]
pub struct GaussianInnovations {
    pub sigma2: f64,
}

impl Innovations for GaussianInnovations {
    fn sigma2(&self) -> f64 {
        self.sigma2
    }

    fn sample(&self, len: usize, rng: &mut rng::Rng) -> Result<Vec<f64>> {
        let normal = Normal::new(0.0, self.sigma2.sqrt()).map_err(|e| Error::Validation(e.to_string()))?;
        Ok((0..len).map(|_| normal.sample(rng)).collect())
    }
}

/// Windows of a stationary block process used as innovations.
#[derive(Clone, Debug)]
pub struct ProcessInnovations {
    pub process: BlockProcess,
    pub sigma2: f64,
}

impl Innovations for ProcessInnovations {
    fn sigma2(&self) -> f64 {
        self.sigma2
    }

    fn sample(&self, len: usize, rng: &mut rng::Rng) -> Result<Vec<f64>> {
        self.process.sample_window_with(len, rng)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub horizon: usize,
    /// `paths[r][i]` is `X_{i+1}` of replicate `r`.
    pub paths: Vec<Vec<f64>>,
}

/// `X_i = Σ_k a_k X_{i−k} + Z_i` for `i = 1..=horizon`, with
/// `(X_{1−p}, …, X_0)` a fresh spectral draw per replicate.
pub fn simulate_ar(model: &ARModel, innovations: &dyn Innovations, horizon: usize, reps: usize, seed: u64, policy: ExecPolicy) -> Result<Ensemble> {
    let p = model.p();
    if horizon == 0 || reps == 0 {
        return validation("horizon and replicate count must be positive");
    }
    if model.spectral.is_empty() {
        return validation("model has no spectral initialization");
    }
    let base = rng::derive(seed, 0x6172);
    let paths = policy.map_indexed(reps, |r| -> Result<Vec<f64>> {
        let mut rng = rng::stream(base, r as u64);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut atom = &model.spectral[model.spectral.len() - 1];
        for pair in &model.spectral {
            acc += pair.q;
            if u < acc {
                atom = pair;
                break;
            }
        }
        let z = innovations.sample(horizon, &mut rng)?;
        let mut x = Vec::with_capacity(p + horizon);
        x.extend_from_slice(&atom.w);
        for (i, zi) in z.iter().enumerate() {
            let t = p + i;
            let v = zi + numeric::sum(model.a.iter().enumerate().map(|(k, ak)| ak * x[t - 1 - k]));
            if !(v.abs() <= OVERFLOW_GUARD) {
                return Err(Error::Instability { step: i + 1, value: v });
            }
            x.push(v);
        }
        Ok(x.split_off(p))
    });
    Ok(Ensemble { horizon, paths: paths.into_iter().collect::<Result<_>>()? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagCheck {
    pub i: usize,
    pub k: usize,
    pub expected: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurgReport {
    pub reps: usize,
    pub tol_sigmas: f64,
    pub checks: Vec<LagCheck>,
    pub worst: Option<LagCheck>,
    pub passed: bool,
}

/// Ensemble means of `X_i X_{i+k}` against `α_k` for `k ≤ p` and a probe
/// set of `i` spread over the horizon.
pub fn verify_burg_constraints(ens: &Ensemble, spec: &AutocovSpec, tol_sigmas: f64) -> Result<BurgReport> {
    let p = spec.p();
    let n = ens.horizon;
    let reps = ens.paths.len();
    if n <= p || reps < 2 {
        return validation("ensemble too short for the requested lags");
    }
    let mut probes = vec![1, 2, n / 2, n - p];
    probes.sort_unstable();
    probes.dedup();
    let mut checks = Vec::new();
    for &i in probes.iter().filter(|&&i| i >= 1 && i + p <= n) {
        for k in 0..=p {
            let prods: Vec<f64> = ens.paths.iter().map(|x| x[i - 1] * x[i - 1 + k]).collect();
            let mean = numeric::sum(prods.iter().copied()) / reps as f64;
            let var = numeric::sum(prods.iter().map(|v| (v - mean).powi(2))) / (reps as f64 - 1.0);
            let se = (var / reps as f64).sqrt();
            let z = if se > 0.0 { (mean - spec.alphas[k]).abs() / se } else if mean == spec.alphas[k] { 0.0 } else { f64::INFINITY };
            checks.push(LagCheck { i, k, expected: spec.alphas[k], estimate: mean, std_error: se, z });
        }
    }
    let worst = checks.iter().cloned().max_by(|a, b| a.z.total_cmp(&b.z));
    let passed = checks.iter().all(|c| c.z <= tol_sigmas);
    Ok(BurgReport { reps, tol_sigmas, checks, worst, passed })
}

/// `½ ln(2πe σ²)`.
pub fn gauss_markov_shannon_rate(sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return validation(format!("σ² must be positive, got {sigma2}"));
    }
    Ok(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma2).ln())
}

/// Lower-triangular map `L` with `X_1^n = L Z_1^n + (terms in W)`.
pub fn transfer_matrix(model: &ARModel, n: usize) -> Vec<Vec<f64>> {
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        l[i][i] = 1.0;
        for (k, ak) in model.a.iter().enumerate() {
            if i > k {
                for j in 0..n {
                    l[i][j] += ak * l[i - 1 - k][j];
                }
            }
        }
    }
    l
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub n: usize,
    pub alpha: f64,
    #[serde(rename = "hZ")]
    pub hz: f64,
    pub lower: f64,
    pub upper: f64,
    /// `upper − lower`; independent of `n`.
    pub gap: f64,
    pub rate_lower: f64,
    pub rate_upper: f64,
}

/// `h_α(Z_1^n) ≤ h_α(X_1^n) ≤ h_α(Z_1^n) + gap`, with gap
/// `min_ℓ (α/(1−α)) ln q_ℓ` for `α > 1` and `(1/(1−α)) ln p` (atoms with
/// positive weight) for `α < 1`.
pub fn renyi_rate_sandwich(hz_block: f64, q: &[f64], alpha: f64, n: usize) -> Result<SandwichReport> {
    crate::density::check_alpha(alpha)?;
    if n == 0 || q.is_empty() || q.iter().any(|x| !(*x >= 0.0)) || (numeric::sum(q.iter().copied()) - 1.0).abs() > 1e-12 {
        return validation("need n ≥ 1 and weights summing to 1");
    }
    let gap = sandwich_gap(q, alpha);
    Ok(SandwichReport {
        n,
        alpha,
        hz: hz_block,
        lower: hz_block,
        upper: hz_block + gap,
        gap,
        rate_lower: hz_block / n as f64,
        rate_upper: (hz_block + gap) / n as f64,
    })
}

pub fn sandwich_gap(q: &[f64], alpha: f64) -> f64 {
    let active = q.iter().filter(|&&x| x > 0.0);
    let gap = if alpha > 1.0 {
        active.map(|x| alpha / (1.0 - alpha) * x.ln()).fold(f64::INFINITY, f64::min)
    } else {
        (active.count() as f64).ln() / (1.0 - alpha)
    };
    // a single atom gives −0 for α > 1
    gap + 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trips_autocovariances() {
        let mut r = rng::stream(11, 0);
        for p in 0..=6 {
            let spec = crate::random::autocov(&mut r, p).unwrap();
            let back = levinson_durbin(&spec).unwrap().autocovariances();
            let err = spec.alphas.iter().zip(&back).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert_eq!(back.len(), p + 1);
            assert!(err < 1e-12, "p = {p}: {err}");
        }
    }

    #[test]
    fn levinson_examples() {
        let m = levinson_durbin(&AutocovSpec::new(vec![1.0]).unwrap()).unwrap();
        assert!(m.a.is_empty() && m.sigma2 == 1.0);
        assert_eq!(m.spectral, vec![SpectralPair { q: 1.0, w: vec![] }]);
        let m = levinson_durbin(&AutocovSpec::new(vec![1.0, 0.5]).unwrap()).unwrap();
        assert!((m.a[0] - 0.5).abs() < 1e-15 && (m.sigma2 - 0.75).abs() < 1e-15);
        assert_eq!(m.spectral.len(), 1);
        assert!((m.spectral[0].w[0].abs() - 1.0).abs() < 1e-15);
        let spec = AutocovSpec::new(vec![1.0, 0.5, 0.25]).unwrap();
        let m = levinson_durbin(&spec).unwrap();
        let (a, s2) = dense_yule_walker(&spec).unwrap();
        for (x, y) in m.a.iter().zip(&a) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((m.sigma2 - s2).abs() < 1e-12);
        // AR(1) autocovariances: the second coefficient vanishes
        assert!((m.a[0] - 0.5).abs() < 1e-12 && m.a[1].abs() < 1e-12);
        assert!(m.reflection.iter().all(|k| k.abs() < 1.0));
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        assert!(matches!(AutocovSpec::new(vec![1.0, 1.0]), Err(Error::NotPositiveDefinite(_))));
        assert!(matches!(AutocovSpec::new(vec![1.0, 0.9, -0.9]), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn jacobi_identity_and_toeplitz() {
        let (vals, vecs) = jacobi_eigen(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(vals, vec![1.0, 1.0]);
        assert_eq!(vecs, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let model = ARModel { a: vec![0.0, 0.0], sigma2: 1.0, reflection: vec![], kp: vec![vec![1.0, 0.0], vec![0.0, 1.0]], spectral: vec![] };
        let pairs = spectral_init(&model).unwrap();
        for pr in &pairs {
            assert!((pr.q - 0.5).abs() < 1e-15);
            assert!((pr.w.iter().map(|x| x * x).sum::<f64>() - 2.0).abs() < 1e-15);
        }
        let m = levinson_durbin(&AutocovSpec::new(vec![1.0, 0.5, 0.1]).unwrap()).unwrap();
        assert!(reconstruction_residual(&m.kp, &m.spectral) <= 1e-10);
        let mut vals: Vec<f64> = m.spectral.iter().map(|p| p.q * 2.0).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 0.5).abs() < 1e-12 && (vals[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn simulation_is_deterministic_and_p0_is_identity() {
        let m = levinson_durbin(&AutocovSpec::new(vec![1.0, 0.5]).unwrap()).unwrap();
        let g = GaussianInnovations { sigma2: m.sigma2 };
        let a = simulate_ar(&m, &g, 20, 50, 9, ExecPolicy::Sequential).unwrap();
        let b = simulate_ar(&m, &g, 20, 50, 9, ExecPolicy::Parallel).unwrap();
        assert_eq!(a, b);
        let m0 = levinson_durbin(&AutocovSpec::new(vec![2.0]).unwrap()).unwrap();
        let g0 = GaussianInnovations { sigma2: 2.0 };
        let x = simulate_ar(&m0, &g0, 10, 3, 4, ExecPolicy::Sequential).unwrap();
        let mut rng = rng::stream(rng::derive(4, 0x6172), 1);
        let _: f64 = rng.random();
        assert_eq!(x.paths[1], g0.sample(10, &mut rng).unwrap());
    }

    #[test]
    fn ar1_ensemble_matches_autocovariances() {
        let spec = AutocovSpec::new(vec![1.0, 0.5]).unwrap();
        let m = levinson_durbin(&spec).unwrap();
        let ens = simulate_ar(&m, &GaussianInnovations { sigma2: m.sigma2 }, 30, 20_000, 1, ExecPolicy::Parallel).unwrap();
        let r = verify_burg_constraints(&ens, &spec, 4.0).unwrap();
        assert!(r.passed, "{:?}", r.worst);
    }

    struct Repeated(f64);

    impl Innovations for Repeated {
        fn sigma2(&self) -> f64 {
            self.0
        }
        fn sample(&self, len: usize, rng: &mut rng::Rng) -> Result<Vec<f64>> {
            let z = Normal::new(0.0, self.0.sqrt()).unwrap().sample(rng);
            Ok(vec![z; len])
        }
    }

    #[test]
    fn correlated_innovations_fail() {
        let spec = AutocovSpec::new(vec![1.0, 0.5]).unwrap();
        let m = levinson_durbin(&spec).unwrap();
        let ens = simulate_ar(&m, &Repeated(m.sigma2), 30, 20_000, 1, ExecPolicy::Parallel).unwrap();
        assert!(!verify_burg_constraints(&ens, &spec, 4.0).unwrap().passed);
    }

    #[test]
    fn shannon_rate_values() {
        assert!((gauss_markov_shannon_rate(1.0).unwrap() - 1.418_938_533_204_672_7).abs() < 1e-15);
        assert!((gauss_markov_shannon_rate(0.75).unwrap() - 1.275_097_496_978_782_3).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!(gauss_markov_shannon_rate(1.0 / (2.0 * std::f64::consts::PI * e)).unwrap().abs() < 1e-15);
        assert!(gauss_markov_shannon_rate(0.0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let r = renyi_rate_sandwich(3.0, &[0.5, 0.5], 2.0, 10).unwrap();
        assert!((r.gap - 4f64.ln()).abs() < 1e-15);
        assert!((r.rate_upper - r.rate_lower - 4f64.ln() / 10.0).abs() < 1e-15);
        let one = renyi_rate_sandwich(3.0, &[1.0], 2.0, 10).unwrap();
        assert_eq!(one.lower, one.upper);
        let half = renyi_rate_sandwich(3.0, &[0.25, 0.75], 0.5, 10).unwrap();
        assert!(half.upper >= half.lower && (half.gap - 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn transfer_matrix_has_unit_diagonal() {
        let m = levinson_durbin(&AutocovSpec::new(vec![1.0, 0.6, 0.2]).unwrap()).unwrap();
        let l = transfer_matrix(&m, 6);
        for i in 0..6 {
            assert_eq!(l[i][i], 1.0);
            assert!(l[i][i + 1..].iter().all(|&v| v == 0.0));
        }
        assert!((l[1][0] - m.a[0]).abs() < 1e-15);
    }
}
