//! The acceptance suite: one pass/fail outcome per criterion, with pinned
//! tolerances and a deterministic JSON report.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::block::BlockModel;
use crate::burg::{self, AutocovSpec, GaussianInnovations};
use crate::density::{self, CostFn, CostSpec, GridDensity, GridSpec, Parametric, Support};
use crate::error::{Error, Result};
use crate::exec::ExecPolicy;
use crate::maxent;
use crate::mixtures::{self, MixtureSpec};
use crate::random;
use crate::rng;
use crate::stationarize::{self, BoundaryStats, ConstructConfig, RateTarget};
use crate::truncation;
use crate::typicality::{self, BlockConfig, ModeChoice, TypicalSpec};

/// `desk` runs every criterion at its stated size; `quick` shrinks instance
/// counts and sample sizes for smoke tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteScale {
    Desk,
    Quick,
}

impl std::str::FromStr for SuiteScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(SuiteScale::Desk),
            "quick" => Ok(SuiteScale::Quick),
            _ => Err(Error::Validation(format!("unknown suite {s:?} (expected desk or quick)"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub scale: SuiteScale,
    pub seed: u64,
    pub policy: ExecPolicy,
}

impl SuiteConfig {
    fn pick(&self, desk: usize, quick: usize) -> usize {
        match self.scale {
            SuiteScale::Desk => desk,
            SuiteScale::Quick => quick,
        }
    }

    fn rng(&self, label: u64) -> rng::Rng {
        rng::stream(rng::derive(self.seed, label), 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub tolerance: String,
    pub detail: Value,
    /// Wall time; kept out of the report so reruns are byte-identical.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SuiteScale,
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionOutcome>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

type Check = fn(&SuiteConfig) -> Result<(bool, Value)>;

pub const CRITERIA: [(u32, &str, &str, Check); 10] = [
    (1, "entropy oracle agreement", "|quadrature − closed form| ≤ 1e-6 at 2^14 cells; < 1 s per density", entropy_oracles),
    (2, "Rényi/Shannon ordering", "0 violations at 1e-9 slack", ordering),
    (3, "maxent solver", "|h* − ½ln(2πe)| ≤ 1e-5; curve shape 1e-6; probe excess ≤ 1e-6", maxent_solver),
    (4, "bounded approximation", "cost ≤ Γ+δ and h ≥ h(f)−δ (1e-12 slack), 0 violations", bounded_approx),
    (5, "typical set mass and cardinality", "|exact − MC| ≤ 3σ; log-volume ≥ cardinality bound at n0", typical_set),
    (6, "mixture sandwich", "0 violations at 1e-9; closed form vs enumeration ≤ 1e-9", mixture_sandwich),
    (7, "stationarization bounds", "lower−1e-9 ≤ exact ≤ upper+1e-9; rate gap ≤ 0.15|r| + C/m at m = 24; < 60 s", stationarization),
    (8, "second-moment process", "moments within 4σ at 1e5 samples; α=0.5 certifies M = 5; α=2 schedule increasing", second_moment),
    (9, "Burg construction", "LD vs dense ≤ 1e-12; ensemble within 4σ; sandwich gap/n within 1e-12; < 30 s", burg_checks),
    (10, "determinism", "sequential and parallel outputs bit-identical, reruns bit-identical", determinism),
];

pub fn run_criterion(id: u32, cfg: &SuiteConfig) -> CriterionOutcome {
    let (id, name, tolerance, check) = CRITERIA.iter().find(|c| c.0 == id).copied().expect("known criterion");
    let start = Instant::now();
    let (passed, detail) = match check(cfg) {
        Ok(v) => v,
        Err(e) => (false, json!({ "error": e.to_string() })),
    };
    CriterionOutcome { id, name: name.into(), passed, tolerance: tolerance.into(), detail, elapsed: start.elapsed() }
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let criteria: Vec<_> = CRITERIA.iter().map(|c| run_criterion(c.0, cfg)).collect();
    SuiteReport { suite: cfg.scale, seed: cfg.seed, passed: criteria.iter().all(|c| c.passed), criteria }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn entropy_oracles(_: &SuiteConfig) -> Result<(bool, Value)> {
    let cases = [
        ("gaussian", Parametric::Gaussian { mean: 0.0, sigma: 1.0 }, GridSpec::new(-12.0, 12.0, 1 << 14)?),
        ("uniform", Parametric::Uniform { lo: 0.0, hi: 2.0 }, GridSpec::new(0.0, 2.0, 1 << 14)?),
        ("exponential", Parametric::Exponential { rate: 1.0 }, GridSpec::new(0.0, 36.0, 1 << 14)?),
    ];
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut rows = Vec::new();
    for (name, p, grid) in cases {
        let (res, took) = timed(|| -> Result<Vec<(f64, f64)>> {
            let f = density::quantize(&p, grid, None)?;
            [1.0, 0.5, 2.0, 3.0]
                .iter()
                .map(|&a| {
                    let exact = if a == 1.0 { p.shannon() } else { p.renyi(a)? };
                    Ok((a, (density::entropy(&f, a)?.nats - exact).abs()))
                })
                .collect()
        });
        let errs = res?;
        slowest = slowest.max(took);
        let e = errs.iter().map(|x| x.1).fold(0.0, f64::max);
        worst = worst.max(e);
        rows.push(json!({ "density": name, "max_abs_error": e }));
    }
    Ok((worst <= 1e-6 && slowest < Duration::from_secs(1), json!({ "max_abs_error": worst, "cases": rows })))
}

fn ordering(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let mut r = cfg.rng(2);
    let count = cfg.pick(1000, 100);
    let alphas = [0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0];
    let mut violations = 0;
    for _ in 0..count {
        let g = random::grid(&mut r, 200)?;
        let f = random::grid_density(&mut r, g)?;
        let hs = alphas.iter().map(|&a| density::entropy(&f, a).map(|v| v.nats)).collect::<Result<Vec<_>>>()?;
        violations += hs.windows(2).filter(|w| w[1] > w[0] + 1e-9).count();
    }
    Ok((violations == 0, json!({ "densities": count, "violations": violations })))
}

fn maxent_solver(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let grid = GridSpec::new(-12.0, 12.0, 1 << 14)?;
    let spec = CostSpec::new(CostFn::Quadratic, Support::Line, grid, 1.0)?;
    let sol = maxent::solve_maxent(&spec)?;
    let target = burg::gauss_markov_shannon_rate(1.0)?;
    let err = (sol.hstar - target).abs();
    let gammas: Vec<f64> = (1..=20).map(|k| 0.2 * k as f64).collect();
    let curve = maxent::hstar_curve(&spec, &gammas, cfg.policy)?;
    let shape = maxent::curve_shape(&curve);
    let probe = maxent::optimality_probe(&sol, &spec, 200, cfg.seed, cfg.policy)?;
    let passed = err <= 1e-5 && shape.holds(1e-6, 1e-6) && probe.max_excess <= 1e-6;
    Ok((
        passed,
        json!({
            "hstar": sol.hstar,
            "abs_error": err,
            "monotonicity_violation": shape.monotonicity_violation,
            "concavity_violation": shape.concavity_violation,
            "probe_trials": probe.trials,
            "probe_max_excess": probe.max_excess,
        }),
    ))
}

fn bounded_approx(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let mut r = cfg.rng(4);
    let count = cfg.pick(500, 60);
    let instances = (0..count).map(|_| random::truncation_instance(&mut r)).collect::<Result<Vec<_>>>()?;
    let outcomes = cfg.policy.map_slice(&instances, |t| -> std::result::Result<(f64, f64), String> {
        let out = truncation::bounded_approximation(&t.f, &t.cost, t.gamma, t.delta, None).map_err(|e| e.to_string())?;
        Ok((out.cost_output - (t.gamma + t.delta), (out.h_input - t.delta) - out.h_output))
    });
    let mut violations = 0;
    let mut errors = 0;
    let (mut cost_slack, mut h_slack) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for o in outcomes {
        match o {
            Ok((c, h)) => {
                cost_slack = cost_slack.max(c);
                h_slack = h_slack.max(h);
                if c > 1e-12 || h > 1e-12 {
                    violations += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    Ok((
        violations == 0 && errors == 0,
        json!({ "instances": count, "violations": violations, "errors": errors, "max_cost_excess": cost_slack, "max_entropy_shortfall": h_slack }),
    ))
}

/// The two-cell reference: density 3/2 on `[0, ½)` and ½ on `[½, 1)`,
/// linear cost.
pub fn two_cell_reference() -> Result<(GridDensity, CostSpec)> {
    let f = GridDensity::new(0.0, 1.0, vec![1.5, 0.5])?;
    let cost = CostSpec::new(CostFn::Linear, Support::Interval { lo: 0.0, hi: 1.0 }, f.grid(), 1.0)?;
    Ok((f, cost))
}

fn typical_set(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let (f, cost) = two_cell_reference()?;
    let spec = TypicalSpec::new(f.clone(), 10, 0.2, cost.clone())?;
    let block = typicality::build_typical_block(&spec)?;
    let exact = block.exact_mass.ok_or_else(|| Error::Mode("enumeration expected".into()))?;
    let mc = typicality::typical_mass(&spec, 10_000, cfg.seed, cfg.policy)?;
    let z = (mc.estimate - exact).abs() / mc.std_error.max(f64::MIN_POSITIVE);
    let scan = typicality::find_n_threshold(&f, 0.2, &cost, 24, cfg.policy)?;
    let at = scan.n_threshold.and_then(|n0| scan.rows.iter().find(|r| r.0 == n0).copied());
    let card_ok = at.is_some_and(|(_, v, b)| v >= b);
    Ok((
        z <= 3.0 && card_ok,
        json!({
            "exact_mass": exact,
            "mc_estimate": mc.estimate,
            "mc_std_error": mc.std_error,
            "z": z,
            "n_threshold": scan.n_threshold,
            "log_volume_at_threshold": at.map(|r| r.1),
            "card_bound_at_threshold": at.map(|r| r.2),
        }),
    ))
}

fn mixture_sandwich(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let mut r = cfg.rng(6);
    let count = cfg.pick(1000, 100);
    let mixes = (0..count).map(|_| random::mixture(&mut r, 5, 60)).collect::<Result<Vec<MixtureSpec>>>()?;
    let mut violations = 0;
    for alpha in [0.5, 2.0, 4.0] {
        let bounds = cfg.policy.map_slice(&mixes, |m| mixtures::mixture_bounds(m, alpha));
        for b in bounds {
            let b = b?;
            if b.lower > b.exact + 1e-9 || b.exact > b.upper + 1e-9 {
                violations += 1;
            }
        }
    }
    let f0 = GridDensity::new(0.0, 1.0, vec![1.8, 0.2])?;
    let f1 = GridDensity::new(0.0, 1.0, vec![0.2, 1.8])?;
    let cost = CostSpec::new(CostFn::Linear, Support::Interval { lo: 0.0, hi: 1.0 }, f0.grid(), 0.5)?;
    let delta = mixtures::max_delta(0.5, 0.3, 0.7, 0.1);
    let block = mixtures::build_alpha_small_block(&f0, &f1, (0.3, 0.7), &cost, 0.1, delta, 10, &BlockConfig::default(), cfg.policy)?;
    let law = block.dense_law(1 << 12)?;
    let mut closed_err: f64 = 0.0;
    for alpha in [0.5, 2.0] {
        closed_err = closed_err.max((law.entropy(alpha) - block.entropy(alpha)?).abs());
    }
    Ok((
        violations == 0 && closed_err <= 1e-9,
        json!({ "mixtures": count, "violations": violations, "closed_form_error": closed_err, "delta": delta }),
    ))
}

/// The enumerable `n = 3` block of criterion 7: uniform on the typical set of
/// the two-cell reference with a wide band.
pub fn stationarization_block() -> Result<typicality::TypicalBlockDensity> {
    let (f, cost) = two_cell_reference()?;
    let spec = TypicalSpec::new(f, 3, 0.6, cost)?;
    let cfg = BlockConfig { mode: ModeChoice::Enumerate, ..BlockConfig::default() };
    typicality::build_typical_block_with(&spec, &cfg, ExecPolicy::Sequential)
}

fn stationarization(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let start = Instant::now();
    let block = stationarization_block()?;
    let law = block.dense_law(1 << 10)?;
    let m_max = cfg.pick(24, 14);
    let mut rows = Vec::new();
    let mut inside = true;
    let mut final_ok = true;
    for alpha in [0.5, 2.0] {
        let stats = BoundaryStats::from_model(&block, alpha)?;
        let rate = stats.block / 3.0;
        let boundary = stats.prefix.iter().chain(&stats.suffix).map(|h| h.abs()).fold(0.0, f64::max);
        let c = 2.0 * (boundary + stats.block.abs());
        for m in 7..=m_max {
            let r = stationarize::window_rate_bounds(&stats, m)?;
            let exact = stationarize::exact_window_entropy(&law, m, alpha, cfg.policy)?;
            let ok = r.lower - 1e-9 <= exact && exact <= r.upper + 1e-9;
            inside &= ok;
            let gap = (exact / m as f64 - rate).abs();
            if m == m_max {
                final_ok &= gap <= 0.15 * rate.abs() + c / m as f64;
            }
            rows.push(json!({ "alpha": alpha, "m": m, "lower": r.lower, "exact": exact, "upper": r.upper, "rate_gap": gap, "C": c }));
        }
    }
    let fast = start.elapsed() < Duration::from_secs(60);
    Ok((inside && final_ok && fast, json!({ "rows": rows, "within_bounds": inside, "converged": final_ok })))
}

fn second_moment(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let samples = cfg.pick(100_000, 20_000);
    let cc = ConstructConfig { seed: cfg.seed, ..ConstructConfig::default() };
    let large = stationarize::construct_second_moment_process(1.0, 2.0, RateTarget::EpsTilde(0.3), &cc, cfg.policy)?;
    let mom_large = stationarize::verify_second_moments(&large.process, 1.0, 3, samples, cfg.seed, 4.0, cfg.policy)?;
    let sched = &large.report.schedule;
    let increasing = sched.windows(2).all(|w| w[1].rate > w[0].rate);
    let small = stationarize::construct_second_moment_process(1.0, 0.5, RateTarget::Rate(5.0), &cc, cfg.policy)?;
    let two_set = small.two_set.as_ref().ok_or_else(|| Error::Construction("missing two-set block".into()))?;
    let mom_small = stationarize::verify_two_set_moments(two_set, 1.0, 3, samples, cfg.seed, 4.0, cfg.policy)?;
    let certified = small.report.certified_rate >= 5.0;
    let passed = mom_large.passed && mom_small.passed && increasing && certified && large.report.achieved_rate >= large.report.target_rate;
    Ok((
        passed,
        json!({
            "alpha2": {
                "n": large.report.n,
                "achieved_rate": large.report.achieved_rate,
                "gap_to_gaussian": large.report.gap,
                "schedule": sched.iter().map(|r| json!([r.n, r.rate])).collect::<Vec<_>>(),
                "moments": mom_large.checks,
            },
            "alpha05": {
                "n": small.report.n,
                "certified_rate": small.report.certified_rate,
                "achieved_rate": small.report.achieved_rate,
                "delta_a_b": small.report.two_set,
                "moments": mom_small.checks,
            },
        }),
    ))
}

fn burg_checks(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let start = Instant::now();
    let mut r = cfg.rng(9);
    let mut ld_err: f64 = 0.0;
    for p in 0..=8 {
        for _ in 0..cfg.pick(25, 5) {
            let spec = random::autocov(&mut r, p)?;
            let m = burg::levinson_durbin(&spec)?;
            let (a, s2) = burg::dense_yule_walker(&spec)?;
            let e = m.a.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold((m.sigma2 - s2).abs(), f64::max);
            ld_err = ld_err.max(e);
        }
    }
    let spec = AutocovSpec::new(vec![1.0, 0.6, 0.2])?;
    let model = burg::levinson_durbin(&spec)?;
    let reps = cfg.pick(100_000, 10_000);
    let ens = burg::simulate_ar(&model, &GaussianInnovations { sigma2: model.sigma2 }, 50, reps, cfg.seed, cfg.policy)?;
    let report = burg::verify_burg_constraints(&ens, &spec, 4.0)?;
    let q: Vec<f64> = model.spectral.iter().map(|s| s.q).collect();
    let alpha = 2.0;
    let per_letter = Parametric::Gaussian { mean: 0.0, sigma: model.sigma2.sqrt() }.renyi(alpha)?;
    let gap = burg::sandwich_gap(&q, alpha);
    let mut sandwich_err: f64 = 0.0;
    let mut rows = Vec::new();
    for n in [5usize, 10, 20, 40] {
        let s = burg::renyi_rate_sandwich(n as f64 * per_letter, &q, alpha, n)?;
        sandwich_err = sandwich_err.max((s.gap - gap).abs()).max((s.rate_upper - s.rate_lower - gap / n as f64).abs());
        rows.push(json!({ "n": n, "lower": s.lower, "upper": s.upper, "rate_gap": s.rate_upper - s.rate_lower }));
    }
    let fast = start.elapsed() < Duration::from_secs(30);
    let passed = ld_err <= 1e-12 && report.passed && sandwich_err <= 1e-12 && fast;
    Ok((
        passed,
        json!({
            "levinson_max_error": ld_err,
            "ensemble_reps": reps,
            "ensemble_worst": report.worst,
            "sandwich_gap": gap,
            "sandwich_error": sandwich_err,
            "sandwich": rows,
        }),
    ))
}

fn determinism(cfg: &SuiteConfig) -> Result<(bool, Value)> {
    let run = |policy: ExecPolicy| -> Result<Vec<u64>> {
        let (f, cost) = two_cell_reference()?;
        let spec = TypicalSpec::new(f, 12, 0.2, cost)?;
        let mass = typicality::typical_mass(&spec, 5000, cfg.seed, policy)?;
        let block = stationarization_block()?;
        let law = block.dense_law(1 << 10)?;
        let h = stationarize::exact_window_entropy(&law, 12, 2.0, policy)?;
        let process = stationarize::build_block_process(Arc::new(law), cfg.seed);
        let windows = process.sample_windows(5, 200, policy)?;
        let spec = AutocovSpec::new(vec![1.0, 0.5])?;
        let model = burg::levinson_durbin(&spec)?;
        let ens = burg::simulate_ar(&model, &GaussianInnovations { sigma2: model.sigma2 }, 10, 500, cfg.seed, policy)?;
        let mut bits = vec![mass.estimate.to_bits(), h.to_bits()];
        bits.extend(windows.iter().flatten().map(|x| x.to_bits()));
        bits.extend(ens.paths.iter().flatten().map(|x| x.to_bits()));
        Ok(bits)
    };
    let seq = run(ExecPolicy::Sequential)?;
    let par = run(ExecPolicy::Parallel)?;
    let again = run(ExecPolicy::Parallel)?;
    let passed = seq == par && par == again;
    Ok((passed, json!({ "values_compared": seq.len(), "sequential_eq_parallel": seq == par, "rerun_eq": par == again })))
}
