//! The six subcommands.

use std::path::PathBuf;

use langevin_core::convexify::{
    build_breve_u, build_hat_u, check_convexity, check_exterior_agreement, grid_points, second_moment, verify_breve_oscillation,
    verify_oscillation, BreveU, ConvexifyParams, GridCheck,
};
use langevin_core::diagnostics::{
    grad_moment_check, kl_estimate, kl_gaussian, moment_from_kl_check, pinsker_check, talagrand_check, tv_estimate, w2_estimate,
    bias_scaling_fit, DiagnosticsReport, KlMethod, W2Reference,
};
use langevin_core::potential::{Builtin, PotentialModel};
use langevin_core::smoothing::{check_grad_bounds, check_value_bound, check_variance, CheckReport, SmoothingConfig};
use langevin_core::ula::{
    compute_d3, h0_default, init_gaussian, initial_kl_bound, plan_lsi, plan_nonconvex_outside_ball, plan_poincare, plan_smoothed,
    run_chains, InitSpec, PlanOptions, PoincareInputs, Regime, RunOptions, StepSizePlan,
};
use langevin_core::{SampleBatch, Seed};

use crate::config::Config;
use crate::error::{config_err, Result, EXIT_CHECK, EXIT_OK};
use crate::manifest::{recorded_command, RunManifest};
use crate::output::{read_samples, real, samples_table, write_table, Table, Written};
use crate::plot::emit_plot_data;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Plan,
    Sample,
    SmoothCheck,
    Convexify,
    Diagnose,
    Experiment,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Plan, Command::Sample, Command::SmoothCheck, Command::Convexify, Command::Diagnose, Command::Experiment];

    pub fn name(self) -> &'static str {
        match self {
            Command::Plan => "plan",
            Command::Sample => "sample",
            Command::SmoothCheck => "smooth-check",
            Command::Convexify => "convexify",
            Command::Diagnose => "diagnose",
            Command::Experiment => "experiment",
        }
    }

    pub fn parse(s: &str) -> Result<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| config_err(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: Config,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub summary: String,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_CHECK
        }
    }
}

pub fn execute(inv: Invocation) -> Result<Outcome> {
    match inv.threads {
        Some(n) => with_threads(n, move || dispatch(inv)),
        None => dispatch(inv),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().map_err(|e| config_err(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_n: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    f()
}

struct Ctx {
    cfg: Config,
    seed: Seed,
    model: PotentialModel,
    d: usize,
    p: f64,
    manifest: RunManifest,
    summary: Vec<String>,
    failures: Vec<String>,
}

impl Ctx {
    fn write(&mut self, name: &str, t: &Table) -> Result<()> {
        let w: Written = write_table(&self.manifest.out_dir.clone(), name, t)?;
        self.manifest.files.push(w);
        Ok(())
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    fn fail(&mut self, what: impl Into<String>) {
        let w = what.into();
        self.summary.push(format!("FAIL {w}"));
        self.failures.push(w);
    }
}

/// Every key a command may read.
pub const KNOWN_KEYS: &[&str] = &[
    "seed", "out", "d", "p",
    "potential.name", "potential.params",
    "plan.regime", "plan.gamma", "plan.epsilon", "plan.h0", "plan.aggressive", "plan.eta", "plan.k",
    "plan.e2", "plan.r", "plan.m2", "plan.k_const",
    "smoothing.mu", "smoothing.budget",
    "run.chains", "run.init", "run.max_steps", "run.record", "run.burn_in", "run.thin",
    "sweep.etas", "sweep.steps", "sweep.burn_in", "sweep.thin",
    "diagnose.samples", "diagnose.reference", "diagnose.kl_method", "diagnose.gamma", "diagnose.kl_upper",
    "smooth_check.mus", "smooth_check.budget", "smooth_check.points", "smooth_check.radius", "smooth_check.draws",
    "convexify.r", "convexify.theta", "convexify.mu", "convexify.eps", "convexify.delta", "convexify.m",
    "convexify.nodes", "convexify.grid", "convexify.half_width", "convexify.tol", "convexify.breve",
];

fn dispatch(inv: Invocation) -> Result<Outcome> {
    let mut cfg = inv.config;
    cfg.check_keys(KNOWN_KEYS)?;
    if let Some(c) = recorded_command(&cfg) {
        if c != inv.command.name() {
            return Err(config_err(format!("manifest was recorded by `{c}`, not `{}`", inv.command.name())));
        }
    }
    if let Some(s) = inv.seed {
        cfg.set("seed", s.to_string());
    }
    let master: u64 = cfg.get("seed")?.ok_or_else(|| config_err("no seed: pass --seed or set seed"))?;
    if let Some(o) = &inv.out {
        cfg.set("out", o.display().to_string());
    }
    let out: PathBuf = cfg.get::<String>("out")?.map(PathBuf::from).ok_or_else(|| config_err("no output directory: pass --out or set out"))?;
    let name: String = cfg.require("potential.name")?;
    let params = cfg.str("potential.params").unwrap_or("").to_string();
    let d: usize = cfg.get_or("d", 1)?;
    let p: f64 = cfg.get_or("p", 2.0)?;
    let model = Builtin::parse(&name, &params)?.build(d)?;
    let mut ctx = Ctx {
        manifest: RunManifest::new(inv.command.name(), &cfg, &out),
        cfg,
        seed: Seed::new(master),
        model,
        d,
        p,
        summary: Vec::new(),
        failures: Vec::new(),
    };
    match inv.command {
        Command::Plan => cmd_plan(&mut ctx)?,
        Command::Sample => cmd_sample(&mut ctx)?,
        Command::SmoothCheck => cmd_smooth_check(&mut ctx)?,
        Command::Convexify => cmd_convexify(&mut ctx)?,
        Command::Diagnose => cmd_diagnose(&mut ctx)?,
        Command::Experiment => cmd_experiment(&mut ctx)?,
    }
    ctx.manifest.config = ctx.cfg.echo();
    let w = ctx.manifest.write()?;
    ctx.say(format!("wrote {}", w.path.display()));
    Ok(Outcome { manifest: ctx.manifest, summary: ctx.summary.join("\n"), failures: ctx.failures })
}

fn init_spec(ctx: &Ctx) -> Result<InitSpec> {
    match ctx.cfg.str("run.init").unwrap_or("gaussian") {
        "gaussian" => Ok(init_gaussian(&ctx.model)),
        "origin" => Ok(InitSpec::Point(vec![0.0; ctx.d])),
        other => Err(config_err(format!("run.init: `{other}` (gaussian | origin)"))),
    }
}

fn model_second_moment(ctx: &Ctx, key: &str) -> Result<f64> {
    if let Some(v) = ctx.cfg.get(key)? {
        return Ok(v);
    }
    if ctx.d > 2 {
        return Err(config_err(format!("{key} is required when d > 2")));
    }
    let m = &ctx.model;
    Ok(second_moment(&|x: &[f64]| m.value(x), ctx.d, &[]))
}

fn resolve_plan(ctx: &Ctx) -> Result<StepSizePlan> {
    let cfg = &ctx.cfg;
    let regime = Regime::parse(cfg.str("plan.regime").unwrap_or("LSI"))?;
    let epsilon: f64 = cfg.get_or("plan.epsilon", 0.1)?;
    let opts = PlanOptions { aggressive: cfg.get_or("plan.aggressive", 1.0)? };
    let h0 = match cfg.get::<f64>("plan.h0")? {
        Some(h) => h,
        None => match init_spec(ctx)? {
            InitSpec::Gaussian { h0_bound, .. } => h0_default(h0_bound),
            InitSpec::Point(_) => {
                let u0 = ctx.model.value(&vec![0.0; ctx.d]) + ctx.model.log_normalizer.unwrap_or(0.0);
                h0_default(initial_kl_bound(&ctx.model.smoothness, u0, ctx.d))
            }
        },
    };
    let spec = &ctx.model.smoothness;
    let plan = match regime {
        Regime::Lsi => plan_lsi(spec, cfg.require("plan.gamma")?, ctx.d, ctx.p, epsilon, h0, &opts)?,
        Regime::Smoothed => {
            let e2 = model_second_moment(ctx, "plan.e2")?;
            plan_smoothed(spec, cfg.require("plan.gamma")?, ctx.d, ctx.p, epsilon, h0, e2, &opts)?
        }
        Regime::PoincareDissipative | Regime::NonconvexOutsideBall => {
            let diss = ctx.model.dissipativity.ok_or_else(|| config_err(format!("{} declares no dissipativity", ctx.model.name())))?;
            let gamma = if regime == Regime::PoincareDissipative { cfg.require("plan.gamma")? } else { cfg.get_or("plan.gamma", 1.0)? };
            let inp = PoincareInputs {
                spec: spec.clone(),
                gamma,
                d: ctx.d,
                p: ctx.p,
                epsilon,
                h0,
                diss,
                r: cfg.get_or("plan.r", diss.radius())?,
                m2: model_second_moment(ctx, "plan.m2")?,
                k_const: cfg.get_or("plan.k_const", 1.0)?,
            };
            if regime == Regime::PoincareDissipative {
                plan_poincare(&inp, &opts)?
            } else {
                plan_nonconvex_outside_ball(&inp, &opts)?
            }
        }
        Regime::Manual => return Ok(StepSizePlan::manual(cfg.require("plan.eta")?, cfg.require("plan.k")?, ctx.d, ctx.p)?),
    };
    Ok(plan.with_overrides(cfg.get("plan.eta")?, cfg.get("plan.k")?))
}

fn smoothing_for(ctx: &Ctx, eta: f64, plan_mu: Option<f64>) -> Result<Option<SmoothingConfig>> {
    let budget: usize = ctx.cfg.get_or("smoothing.budget", 1)?;
    let mu = match ctx.cfg.str("smoothing.mu") {
        None => plan_mu,
        Some("auto") => Some(eta.sqrt()),
        Some(v) => Some(v.parse::<f64>().map_err(|_| config_err(format!("smoothing.mu: `{v}` (number | auto)")))?),
    };
    mu.map(|m| SmoothingConfig::new(m, ctx.p, ctx.d, budget).map_err(Into::into)).transpose()
}

fn plan_table(plan: &StepSizePlan) -> Table {
    let mut t = Table::new("plan/v1", &["kind", "name", "value"]);
    let row = |k: &str, n: &str, v: String| vec![k.to_string(), n.to_string(), v];
    t.push(row("plan", "regime", plan.regime.to_string()));
    t.push(row("plan", "eta", real(plan.eta)));
    t.push(row("plan", "k_iterations", plan.k_iterations.to_string()));
    t.push(row("plan", "epsilon", real(plan.epsilon_target)));
    t.push(row("plan", "aggressive", real(plan.aggressive)));
    t.push(row("plan", "off_theorem", plan.off_theorem().to_string()));
    for (n, v) in &plan.caps {
        t.push(row("cap", n, real(*v)));
    }
    for (n, v) in &plan.constants {
        t.push(row("constant", n, real(*v)));
    }
    t
}

fn cmd_plan(ctx: &mut Ctx) -> Result<()> {
    let plan = resolve_plan(ctx)?;
    ctx.write("plan.csv", &plan_table(&plan))?;
    ctx.say(format!("{} eta = {:.6e} k = {}{}", plan.regime, plan.eta, plan.k_iterations, if plan.off_theorem() { " (off-theorem)" } else { "" }));
    ctx.manifest.plan = Some(plan);
    Ok(())
}

fn run_options(ctx: &Ctx, plan: &StepSizePlan) -> Result<RunOptions> {
    Ok(RunOptions {
        record: ctx.cfg.get_or("run.record", false)?,
        burn_in: ctx.cfg.get_or("run.burn_in", 0)?,
        thin: ctx.cfg.get_or("run.thin", 1)?,
        smoothing: smoothing_for(ctx, plan.eta, plan.constant("mu"))?,
    })
}

/// Plan, run, write samples; returns the batch the diagnostics should use.
fn sample_stage(ctx: &mut Ctx) -> Result<(StepSizePlan, SampleBatch)> {
    let plan = resolve_plan(ctx)?;
    let opts = run_options(ctx, &plan)?;
    let chains: usize = ctx.cfg.get_or("run.chains", 100)?;
    let max_steps: u64 = ctx.cfg.get_or("run.max_steps", 10_000_000)?;
    if plan.k_iterations > max_steps {
        return Err(config_err(format!(
            "plan asks for k = {} steps per chain, above run.max_steps = {max_steps}; set plan.eta/plan.k or raise run.max_steps",
            plan.k_iterations
        )));
    }
    let init = init_spec(ctx)?;
    let out = run_chains(&ctx.model, plan.eta, plan.k_iterations, &init, chains, ctx.seed.tagged("sample"), &opts)?;
    ctx.write("plan.csv", &plan_table(&plan))?;
    ctx.write("samples.csv", &samples_table(&out.final_states, 1))?;
    ctx.say(format!("{} chains x {} steps at eta = {:.6e}", chains, plan.k_iterations, plan.eta));
    let batch = match out.trajectory {
        Some(t) => {
            ctx.write("trajectory.csv", &samples_table(&t, t.len() / chains))?;
            t
        }
        None => out.final_states,
    };
    ctx.manifest.plan = Some(plan.clone());
    Ok((plan, batch))
}

fn cmd_sample(ctx: &mut Ctx) -> Result<()> {
    sample_stage(ctx).map(|_| ())
}

fn cmd_smooth_check(ctx: &mut Ctx) -> Result<()> {
    let mus: Vec<f64> = ctx.cfg.list("smooth_check.mus")?.unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    let budget: usize = ctx.cfg.get_or("smooth_check.budget", 100_000)?;
    let points: usize = ctx.cfg.get_or("smooth_check.points", 4)?;
    let radius: f64 = ctx.cfg.get_or("smooth_check.radius", 1.0)?;
    let draws: usize = ctx.cfg.get_or("smooth_check.draws", 10_000)?;
    let mut t = Table::new("smooth_check/v1", &["check", "mu", "point", "bound", "estimate", "stderr", "margin", "pass"]);
    let mut all = CheckReport::default();
    for (i, &mu) in mus.iter().enumerate() {
        let cfg = SmoothingConfig::new(mu, ctx.p, ctx.d, budget)?;
        let s = ctx.seed.tagged("smooth-check").child(i as u64);
        let mut rep = check_value_bound(&ctx.model, &cfg, points, radius, s.tagged("value"));
        rep.extend(check_grad_bounds(&ctx.model, &cfg, points, radius, s.tagged("grad")));
        let x: Vec<f64> = vec![radius / 2.0; ctx.d];
        rep.extend(check_variance(&ctx.model, &cfg, &x, draws, s.tagged("variance")));
        for r in &rep.rows {
            let pt = r.point.iter().map(|v| real(*v)).collect::<Vec<_>>().join(";");
            t.push(vec![r.check.clone(), real(mu), pt, real(r.bound), real(r.estimate), real(r.stderr), real(r.margin), r.pass.to_string()]);
        }
        all.extend(rep);
    }
    ctx.write("smooth_check.csv", &t)?;
    for f in &all.flags {
        ctx.say(format!("note: {f}"));
    }
    let failed = all.rows.iter().filter(|r| !r.pass).count();
    ctx.say(format!("{} smoothing checks, {} failed, worst margin {:.3e}", all.rows.len(), failed, all.worst_margin()));
    if failed > 0 {
        ctx.fail(format!("{failed} smoothing bound rows"));
    }
    Ok(())
}

fn cmd_convexify(ctx: &mut Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let m = &ctx.model;
    let default_r = m.convexity_radius.or(m.dissipativity.map(|d| d.radius()).filter(|r| *r > 0.0)).unwrap_or(1.0);
    let r: f64 = cfg.get_or("convexify.r", default_r)?;
    let dc = m.degenerate_convexity;
    let theta: f64 = cfg.get_or("convexify.theta", dc.map(|c| c.theta).unwrap_or(0.0))?;
    let mu: f64 = match cfg.get("convexify.mu")? {
        Some(v) => v,
        None => dc.map(|c| c.mu).ok_or_else(|| config_err("convexify.mu is required for potentials without declared convexity"))?,
    };
    let mut params = ConvexifyParams::new(r, theta, mu);
    params.eps = cfg.get_or("convexify.eps", params.eps)?;
    params.delta = cfg.get_or("convexify.delta", params.eps / 20.0)?;
    params.m = cfg.get_or("convexify.m", params.m)?;
    params.quad_nodes = cfg.get_or("convexify.nodes", params.quad_nodes)?;
    let n: usize = cfg.get_or("convexify.grid", if ctx.d == 1 { 2001 } else { 201 })?;
    let half: f64 = cfg.get_or("convexify.half_width", r + 3.0 * params.eps)?;
    let tol: f64 = cfg.get_or("convexify.tol", 1e-6)?;
    let breve_mode = cfg.str("convexify.breve").unwrap_or("auto").to_string();
    let cp = build_hat_u(m, params.clone())?;
    let breve: Option<BreveU> = match breve_mode.as_str() {
        "false" => None,
        "true" => Some(build_breve_u(m, r, params.eps, params.delta, params.m)?),
        "auto" => (m.smoothness.alpha_max() == 1.0).then(|| build_breve_u(m, r, params.eps, params.delta, params.m)).transpose()?,
        other => return Err(config_err(format!("convexify.breve: `{other}` (auto | true | false)"))),
    };
    let pts = grid_points(ctx.d, half, n);
    let mut header: Vec<String> = (0..ctx.d).map(|j| format!("x{j}")).collect();
    header.extend(["U", "V", "hat_u", "breve_u"].map(String::from));
    let mut grid = Table { schema: "convexify_grid/v1", header, rows: Vec::with_capacity(pts.len()) };
    for x in &pts {
        let mut row: Vec<String> = x.iter().map(|v| real(*v)).collect();
        row.push(real(m.value(x)));
        row.push(real(cp.v(x)));
        row.push(real(cp.hat_u(x)));
        row.push(breve.as_ref().map(|b| real(b.value(x))).unwrap_or_default());
        grid.rows.push(row);
    }
    let mut checks = Table::new("convexify_checks/v1", &["check", "worst", "tolerance", "pass"]);
    let mut record = |ctx: &mut Ctx, name: &str, worst: f64, tol: f64, pass: bool| {
        checks.push(vec![name.to_string(), real(worst), real(tol), pass.to_string()]);
        ctx.say(format!("{name}: {worst:.3e} vs {tol:.3e} {}", if pass { "ok" } else { "FAIL" }));
        if !pass {
            ctx.failures.push(name.to_string());
        }
    };
    let conv: GridCheck = check_convexity(&|x: &[f64]| cp.hat_minus_g(x), &pts, tol);
    record(ctx, "hat_minus_g_convexity", conv.worst, conv.tolerance, conv.pass);
    let osc = verify_oscillation(&cp, n);
    record(ctx, "hat_oscillation", osc.osc, osc.bound, osc.pass);
    if let Some(b) = &breve {
        let ext = check_exterior_agreement(b, &pts);
        record(ctx, "breve_exterior_agreement", ext.worst, ext.tolerance, ext.pass);
        let bo = verify_breve_oscillation(b, n);
        record(ctx, "breve_oscillation", bo.osc, bo.bound, bo.pass);
    }
    ctx.write("convexify_grid.csv", &grid)?;
    ctx.write("convexify_checks.csv", &checks)?;
    let plots = emit_plot_data(&ctx.manifest)?;
    ctx.manifest.files.extend(plots);
    Ok(())
}

struct DiagInputs {
    reference: Option<SampleBatch>,
    kl_method: KlMethod,
    gamma: Option<f64>,
    kl_upper: Option<f64>,
}

fn diag_inputs(ctx: &Ctx) -> Result<DiagInputs> {
    let reference = ctx.cfg.get::<String>("diagnose.reference")?.map(|p| read_samples(&PathBuf::from(p))).transpose()?;
    let default = if ctx.d <= 2 { "quadrature" } else { "knn" };
    Ok(DiagInputs {
        reference,
        kl_method: KlMethod::parse(ctx.cfg.str("diagnose.kl_method").unwrap_or(default))?,
        gamma: ctx.cfg.get("diagnose.gamma")?,
        kl_upper: ctx.cfg.get("diagnose.kl_upper")?,
    })
}

fn diagnose_batch(ctx: &mut Ctx, batch: &SampleBatch, inp: &DiagInputs) -> Result<DiagnosticsReport> {
    if batch.dim() != ctx.d {
        return Err(config_err(format!("samples have d = {}, config has d = {}", batch.dim(), ctx.d)));
    }
    let seed = ctx.seed.tagged("diagnose");
    let m = &ctx.model;
    let mut rep = DiagnosticsReport { kl: Some(kl_estimate(batch, m, inp.kl_method, seed.tagged("kl"))?), ..Default::default() };
    if ctx.d <= 2 {
        rep.tv = Some(tv_estimate(batch, m, seed.tagged("tv"))?);
    }
    rep.w2 = match (&inp.reference, ctx.d) {
        (Some(r), _) => Some(w2_estimate(batch, W2Reference::Batch(r), seed.tagged("w2"))?),
        (None, 1) => Some(w2_estimate(batch, W2Reference::Model(m), seed.tagged("w2"))?),
        _ => None,
    };
    let kl = rep.kl.clone().expect("kl present");
    if let Some(tv) = &rep.tv {
        rep.checks.push(pinsker_check(&kl, tv));
    }
    if let (Some(w2), Some(g)) = (&rep.w2, inp.gamma) {
        rep.checks.push(talagrand_check(&kl, w2, g));
    }
    rep.checks.push(grad_moment_check(batch, m, ctx.p)?);
    if let Some(k) = inp.kl_upper {
        rep.checks.push(moment_from_kl_check(batch, m, k)?);
    }
    let mut t = Table::new("diagnostics/v1", &DiagnosticsReport::HEADER);
    for r in rep.rows() {
        t.push(r.to_vec());
    }
    ctx.write("diagnostics.csv", &t)?;
    for (name, v) in [("kl", &rep.kl), ("tv", &rep.tv), ("w2", &rep.w2)] {
        if let Some(v) = v {
            let flag = if v.negative { " (negative)" } else { "" };
            ctx.say(format!("{name} [{}] = {:.4e} +- {:.2e}{flag}", v.method, v.estimate, v.stderr));
        }
    }
    ctx.say("fisher information: not estimated");
    for c in &rep.checks {
        if c.pass {
            ctx.say(format!("{}: {:.4e} <= {:.4e} ok", c.name, c.lhs, c.rhs));
        } else {
            ctx.fail(format!("{}: {:.4e} > {:.4e}", c.name, c.lhs, c.rhs));
        }
    }
    Ok(rep)
}

fn cmd_diagnose(ctx: &mut Ctx) -> Result<()> {
    let path: String = ctx.cfg.require("diagnose.samples")?;
    let batch = read_samples(&PathBuf::from(path))?;
    let inp = diag_inputs(ctx)?;
    diagnose_batch(ctx, &batch, &inp)?;
    let plots = emit_plot_data(&ctx.manifest)?;
    ctx.manifest.files.extend(plots);
    Ok(())
}

/// Pooled variance of all coordinates with its between-chain standard error.
pub fn chain_variance(traj: &SampleBatch, chains: usize) -> (f64, f64) {
    let d = traj.dim();
    let n = traj.len();
    let data = traj.as_slice();
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let per = n / chains;
    let vs: Vec<f64> = (0..chains)
        .map(|c| data[c * per * d..(c + 1) * per * d].iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (per * d) as f64)
        .collect();
    let v = vs.iter().sum::<f64>() / chains as f64;
    let sd = (vs.iter().map(|x| (x - v) * (x - v)).sum::<f64>() / (chains as f64 - 1.0).max(1.0)).sqrt();
    (v, sd / (chains as f64).sqrt())
}

fn cmd_experiment(ctx: &mut Ctx) -> Result<()> {
    match ctx.cfg.list::<f64>("sweep.etas")? {
        Some(etas) => sweep(ctx, &etas),
        None => {
            let inp = diag_inputs(ctx)?;
            let (_, batch) = sample_stage(ctx)?;
            diagnose_batch(ctx, &batch, &inp)?;
            let plots = emit_plot_data(&ctx.manifest)?;
            ctx.manifest.files.extend(plots);
            Ok(())
        }
    }
}

fn sweep(ctx: &mut Ctx, etas: &[f64]) -> Result<()> {
    let steps: u64 = ctx.cfg.get_or("sweep.steps", 20_000)?;
    let burn_in: u64 = ctx.cfg.get_or("sweep.burn_in", steps / 10)?;
    let thin: u64 = ctx.cfg.get_or("sweep.thin", 10)?;
    let chains: usize = ctx.cfg.get_or("run.chains", 100)?;
    let gamma: Option<f64> = ctx.cfg.get("plan.gamma")?;
    let method = diag_inputs(ctx)?.kl_method;
    let init = init_spec(ctx)?;
    let spec = ctx.model.smoothness.clone();
    let d3 = compute_d3(&spec, ctx.d, ctx.p);
    let gaussian = ctx.model.name() == "gaussian";
    let mut t = Table::new(
        "sweep/v1",
        &["eta", "steps", "variance", "variance_se", "kl", "kl_se", "kl_method", "kl_oracle", "envelope", "within_envelope"],
    );
    let (mut fit_eta, mut fit_kl) = (Vec::new(), Vec::new());
    for (i, &eta) in etas.iter().enumerate() {
        let smoothing = smoothing_for(ctx, eta, None)?;
        let opts = RunOptions { record: true, burn_in, thin, smoothing };
        let out = run_chains(&ctx.model, eta, steps, &init, chains, ctx.seed.tagged("sweep").child(i as u64), &opts)?;
        let traj = out.trajectory.expect("recorded");
        let (var, var_se) = chain_variance(&traj, chains);
        let (kl, kl_se, how) = if gaussian {
            let k = kl_gaussian(var, 1.0, ctx.d)?;
            (k, 0.5 * ctx.d as f64 * (1.0 - 1.0 / var).abs() * var_se, "variance")
        } else {
            let m = kl_estimate(&traj, &ctx.model, method, ctx.seed.tagged("sweep-kl").child(i as u64))?;
            (m.estimate, m.stderr, method.as_str())
        };
        let oracle = if gaussian && smoothing.is_none() { kl_gaussian(1.0 / (1.0 - eta / 2.0), 1.0, ctx.d)? } else { f64::NAN };
        let envelope = gamma.map(|g| 8.0 * eta.powf(spec.alpha()) * d3 / (3.0 * g)).unwrap_or(f64::NAN);
        let within = envelope.is_nan() || kl <= envelope;
        t.push(vec![
            real(eta),
            steps.to_string(),
            real(var),
            real(var_se),
            real(kl),
            real(kl_se),
            how.to_string(),
            real(oracle),
            real(envelope),
            if envelope.is_nan() { String::new() } else { within.to_string() },
        ]);
        ctx.say(format!("eta = {eta}: variance {var:.6} +- {var_se:.1e}, KL {kl:.3e}, envelope {envelope:.3e}"));
        if !within {
            ctx.fail(format!("KL {kl:.3e} above envelope {envelope:.3e} at eta = {eta}"));
        }
        if kl > 0.0 {
            fit_eta.push(eta);
            fit_kl.push(kl);
        }
    }
    ctx.write("sweep.csv", &t)?;
    if fit_eta.len() >= 4 {
        let f = bias_scaling_fit(&fit_eta, &fit_kl)?;
        let mut ft = Table::new("fit/v1", &["slope", "intercept", "r2"]);
        ft.push(vec![real(f.slope), real(f.intercept), real(f.r2)]);
        ctx.write("fit.csv", &ft)?;
        ctx.say(format!("log-log slope {:.3} (r2 {:.4})", f.slope, f.r2));
    }
    let plots = emit_plot_data(&ctx.manifest)?;
    ctx.manifest.files.extend(plots);
    Ok(())
}
