use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use renyi_core::burg::{self, ARModel, AutocovSpec, GaussianInnovations, Innovations, ProcessInnovations};
use renyi_core::density::{self, CostSpec, Parametric};
use renyi_core::maxent;
use renyi_core::mixtures::{self, MixtureSpec};
use renyi_core::stationarize::{self, BoundaryStats, ConstructConfig, RateBoundReport, RateTarget};
use renyi_core::suite::{self, SuiteConfig, SuiteScale};
use renyi_core::truncation;
use renyi_core::typicality::{self, BlockConfig, ModeChoice, TypicalSpec};
use renyi_core::ExecPolicy;

use crate::args::*;
use crate::inputs;

/// A rendered report and whether every verification in it passed.
pub struct Report {
    pub body: String,
    pub ok: bool,
}

pub struct Ctx {
    pub seed: u64,
    pub format: Format,
    pub policy: ExecPolicy,
}

fn json_report<T: Serialize>(v: &T, ok: bool) -> Result<Report> {
    let mut body = serde_json::to_string_pretty(v)?;
    body.push('\n');
    Ok(Report { body, ok })
}

fn csv_report<T: Serialize>(rows: &[T]) -> Result<Report> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().context("flushing CSV")?)?;
    Ok(Report { body, ok: true })
}

fn json_only(ctx: &Ctx, what: &str) -> Result<()> {
    if ctx.format == Format::Csv {
        bail!("{what} has no CSV form; CSV is available for `maxent --gammas` and `stationarize`");
    }
    Ok(())
}

pub fn run(cmd: Command, ctx: &Ctx) -> Result<Report> {
    match cmd {
        Command::Entropy(a) => entropy(a, ctx),
        Command::Maxent(a) => maxent_cmd(a, ctx),
        Command::Truncate(a) => truncate(a, ctx),
        Command::Typical(TypicalCommand::Build(a)) => typical_build(a, ctx),
        Command::Typical(TypicalCommand::Mass(a)) => typical_mass(a, ctx),
        Command::Mixture(MixtureCommand::Bounds(a)) => mixture(a, ctx),
        Command::Stationarize(a) => stationarize_cmd(a, ctx),
        Command::Construct(a) => construct(a, ctx),
        Command::Burg(BurgCommand::Fit(a)) => burg_fit(a, ctx),
        Command::Burg(BurgCommand::Simulate(a)) => burg_simulate(a, ctx),
        Command::Burg(BurgCommand::Sandwich(a)) => burg_sandwich(a, ctx),
        Command::VerifyAll(a) => verify_all(a, ctx),
    }
}

#[derive(Serialize)]
struct EntropyOut {
    #[serde(with = "renyi_core::serde_ext")]
    nats: f64,
    alpha: f64,
    cells: usize,
}

fn entropy(a: EntropyArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "entropy")?;
    let f = inputs::density(&a.density)?;
    let h = density::entropy(&f, a.alpha)?;
    // −0 from ln 1 reads badly in reports
    json_report(&EntropyOut { nats: h.nats + 0.0, alpha: a.alpha, cells: f.len() }, true)
}

#[derive(Serialize)]
struct CurveRow {
    gamma: f64,
    hstar_nats: String,
}

#[derive(Serialize)]
struct MaxentOut {
    gamma: f64,
    hstar: f64,
    lambda0: f64,
    lambda1: f64,
    pinned: bool,
    mean_cost: f64,
    residual_norm: f64,
    residual_cost: f64,
}

fn maxent_cmd(a: MaxentArgs, ctx: &Ctx) -> Result<Report> {
    let cost: CostSpec = inputs::load(&a.cost)?;
    cost.validate()?;
    if a.gammas.is_empty() {
        json_only(ctx, "a single maxent solution")?;
        let s = maxent::solve_maxent(&cost)?;
        let out = MaxentOut {
            gamma: cost.gamma,
            hstar: s.hstar,
            lambda0: s.lambda0(),
            lambda1: s.lambda1(),
            pinned: s.pinned,
            mean_cost: s.mean_cost,
            residual_norm: s.residual_norm,
            residual_cost: s.residual_cost,
        };
        return json_report(&out, true);
    }
    let curve = maxent::hstar_curve(&cost, &a.gammas, ctx.policy)?;
    match ctx.format {
        Format::Json => json_report(&curve, true),
        Format::Csv => {
            let rows: Vec<_> = curve.iter().map(|p| CurveRow { gamma: p.gamma, hstar_nats: ext(p.hstar) }).collect();
            csv_report(&rows)
        }
    }
}

/// Extended reals in CSV cells, matching the JSON encoding.
fn ext(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn truncate(a: TruncateArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "truncate")?;
    let f = inputs::density(&a.density)?;
    let cost = a.cost.as_deref().map(inputs::cost_fn).transpose()?;
    if let Some(m) = a.m {
        let (g, report) = truncation::truncate_bound(&f, m, cost.as_ref())?;
        return json_report(&json!({ "report": report, "density": g }), true);
    }
    let (Some(cost), Some(gamma), Some(delta)) = (cost, a.gamma, a.delta) else {
        bail!("truncate needs either --m, or all of --cost, --gamma and --delta");
    };
    let approx = truncation::bounded_approximation(&f, &cost, gamma, delta, a.abs_cost_cap)?;
    let ok = approx.cost_output <= gamma + delta + 1e-12 && approx.h_output >= approx.h_input - delta - 1e-12;
    json_report(&approx, ok)
}

fn typical_build(a: TypicalBuildArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "typical build")?;
    let spec: TypicalSpec = inputs::load(&a.spec)?;
    spec.validate()?;
    let mode = match a.mode {
        Mode::Auto => ModeChoice::Auto,
        Mode::Enumerate => ModeChoice::Enumerate,
        Mode::Rejection => ModeChoice::Rejection,
    };
    let mut cfg = BlockConfig { mode, seed: ctx.seed, ..BlockConfig::default() };
    if let Some(b) = a.budget {
        cfg.budget = b;
    }
    let block = typicality::build_typical_block_with(&spec, &cfg, ctx.policy)?;
    json_report(&block.summary(), true)
}

fn typical_mass(a: TypicalMassArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "typical mass")?;
    let spec: TypicalSpec = inputs::load(&a.spec)?;
    spec.validate()?;
    let m = typicality::typical_mass(&spec, a.samples, ctx.seed, ctx.policy)?;
    json_report(&json!({ "estimate": m.estimate, "std_error": m.std_error, "samples": m.samples }), true)
}

fn mixture(a: MixtureArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "mixture bounds")?;
    let spec: MixtureSpec = inputs::load(&a.spec)?;
    spec.validate()?;
    let b = mixtures::mixture_bounds(&spec, a.alpha)?;
    let slack = 1e-9;
    json_report(&b, b.lower <= b.exact + slack && b.exact <= b.upper + slack)
}

#[derive(Serialize)]
struct WindowRow {
    #[serde(flatten)]
    bounds: RateBoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
}

#[derive(Serialize)]
struct WindowCsvRow {
    m: usize,
    lower: String,
    upper: String,
    block_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
}

/// Largest dense law enumerated for `--exact`.
const EXACT_MAX_TUPLES: usize = 1 << 16;

fn stationarize_cmd(a: StationarizeArgs, ctx: &Ctx) -> Result<Report> {
    let block = inputs::block(&a.block, ctx.seed, ctx.policy)?;
    let stats = BoundaryStats::from_model(block.as_ref(), a.alpha)?;
    let law = if a.exact { Some(block.dense_law(EXACT_MAX_TUPLES)?) } else { None };
    let mut rows = Vec::new();
    let mut ok = true;
    for m in inputs::window_lengths(&a.m)? {
        let bounds = stationarize::window_rate_bounds(&stats, m)?;
        let exact = law.as_ref().map(|l| stationarize::exact_window_entropy(l, m, a.alpha, ctx.policy)).transpose()?;
        if let Some(h) = exact {
            ok &= bounds.lower - 1e-9 <= h && h <= bounds.upper + 1e-9;
        }
        rows.push(WindowRow { bounds, exact });
    }
    match ctx.format {
        Format::Json => json_report(&rows, ok),
        Format::Csv => {
            let csv_rows: Vec<_> = rows
                .iter()
                .map(|r| WindowCsvRow {
                    m: r.bounds.m,
                    lower: ext(r.bounds.lower),
                    upper: ext(r.bounds.upper),
                    block_rate: r.bounds.block_rate,
                    exact: r.exact,
                })
                .collect();
            Ok(Report { ok, ..csv_report(&csv_rows)? })
        }
    }
}

fn construct(a: ConstructArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "construct")?;
    let target = match (a.eps_tilde, a.target_rate) {
        (Some(e), None) => RateTarget::EpsTilde(e),
        (None, Some(m)) => RateTarget::Rate(m),
        _ => bail!("construct needs exactly one of --eps-tilde (α > 1) or --target-rate (α < 1)"),
    };
    let cfg = ConstructConfig { n_max: a.n_max, seed: ctx.seed, ..ConstructConfig::default() };
    let c = stationarize::construct_second_moment_process(a.sigma2, a.alpha, target, &cfg, ctx.policy)?;
    let moments = if a.samples == 0 {
        None
    } else if let Some(block) = &c.two_set {
        Some(stationarize::verify_two_set_moments(block, a.sigma2, a.lags.min(block.n), a.samples, ctx.seed, a.sigmas, ctx.policy)?)
    } else {
        Some(stationarize::verify_second_moments(&c.process, a.sigma2, a.lags, a.samples, ctx.seed, a.sigmas, ctx.policy)?)
    };
    let ok = moments.as_ref().is_none_or(|m| m.passed);
    json_report(&json!({ "construction": c.report, "moments": moments }), ok)
}

fn burg_fit(a: BurgFitArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "burg fit")?;
    let model = burg::levinson_durbin(&AutocovSpec::new(a.alphas)?)?;
    json_report(&model, true)
}

fn model_of(src: &ModelSource) -> Result<(ARModel, AutocovSpec)> {
    match &src.model {
        Some(path) => {
            let model: ARModel = inputs::load(path)?;
            let spec = AutocovSpec::new(model.autocovariances())?;
            // Refit so a hand-edited model cannot disagree with its own constraints.
            let refit = burg::levinson_durbin(&spec)?;
            let drift = model.a.iter().zip(&refit.a).map(|(x, y)| (x - y).abs()).fold((model.sigma2 - refit.sigma2).abs(), f64::max);
            if model.a.len() != refit.a.len() || drift > 1e-9 {
                bail!("model in {} is not a Yule-Walker solution (drift {drift:.3e})", path.display());
            }
            Ok((refit, spec))
        }
        None => {
            let spec = AutocovSpec::new(src.alphas.clone())?;
            Ok((burg::levinson_durbin(&spec)?, spec))
        }
    }
}

fn burg_simulate(a: BurgSimulateArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "burg simulate")?;
    let (model, spec) = model_of(&a.source)?;
    let innovations: Box<dyn Innovations> = match a.innovations {
        InnovationKind::Gauss => Box::new(GaussianInnovations { sigma2: model.sigma2 }),
        InnovationKind::Block => {
            let target = match (a.block_alpha > 1.0, a.block_target) {
                (true, t) => RateTarget::EpsTilde(t.unwrap_or(0.3)),
                (false, t) => RateTarget::Rate(t.unwrap_or(5.0)),
            };
            let cfg = ConstructConfig { seed: ctx.seed, ..ConstructConfig::default() };
            let c = stationarize::construct_second_moment_process(model.sigma2, a.block_alpha, target, &cfg, ctx.policy)?;
            Box::new(ProcessInnovations { process: c.process, sigma2: model.sigma2 })
        }
    };
    let ens = burg::simulate_ar(&model, innovations.as_ref(), a.horizon, a.reps, ctx.seed, ctx.policy)?;
    let report = burg::verify_burg_constraints(&ens, &spec, a.sigmas)?;
    let kind = match a.innovations {
        InnovationKind::Gauss => "gauss",
        InnovationKind::Block => "block",
    };
    let ok = report.passed;
    json_report(&json!({ "alphas": spec.alphas, "innovations": kind, "horizon": a.horizon, "report": report }), ok)
}

fn burg_sandwich(a: BurgSandwichArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "burg sandwich")?;
    let (model, _) = model_of(&a.source)?;
    let q: Vec<f64> = model.spectral.iter().map(|s| s.q).collect();
    let hz = match a.hz {
        Some(h) => h,
        None => {
            let g = Parametric::Gaussian { mean: 0.0, sigma: model.sigma2.sqrt() };
            let letter = if a.alpha == 1.0 { g.shannon() } else { g.renyi(a.alpha)? };
            a.n as f64 * letter
        }
    };
    let s = burg::renyi_rate_sandwich(hz, &q, a.alpha, a.n)?;
    json_report(&s, true)
}

fn verify_all(a: VerifyArgs, ctx: &Ctx) -> Result<Report> {
    json_only(ctx, "verify-all")?;
    let scale: SuiteScale = a.suite.parse()?;
    let report = suite::run_suite(&SuiteConfig { scale, seed: ctx.seed, policy: ctx.policy });
    let mut body = report.to_json();
    body.push('\n');
    Ok(Report { body, ok: report.passed })
}
