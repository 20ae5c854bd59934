//! Unadjusted Langevin chains x' = x − η∇U(x) + √(2η) z and their smoothed
//! variant, plus the step-size planners.

mod plan;

pub use plan::{
    compute_d3, compute_d3_prime, compute_d4, h0_default, initial_kl_bound, plan_lsi,
    plan_nonconvex_outside_ball, plan_poincare, plan_smoothed, PlanOptions, PoincareInputs,
    Regime, StepSizePlan, H0_FLOOR,
};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::batch::SampleBatch;
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::potential::PotentialModel;
use crate::rng::{Seed, StreamRng};
use crate::smoothing::SmoothingConfig;

/// Chains are aborted once ‖x‖ exceeds this.
pub const DIVERGENCE_RADIUS: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub step_index: u64,
    pub stream_id: u64,
}

impl ChainState {
    pub fn new(position: Vec<f64>, stream_id: u64) -> Self {
        ChainState { position, step_index: 0, stream_id }
    }
}

/// Scratch space for in-place steps.
struct Work {
    grad: Vec<f64>,
    xi: Vec<f64>,
    y: Vec<f64>,
}

impl Work {
    fn new(d: usize) -> Self {
        Work { grad: vec![0.0; d], xi: vec![0.0; d], y: vec![0.0; d] }
    }
}

fn diverged(state: &ChainState) -> Error {
    Error::ChainDiverged { chain: state.stream_id, step: state.step_index, position: state.position.clone() }
}

fn check_state(state: &ChainState) -> Result<()> {
    let n2: f64 = state.position.iter().map(|v| v * v).sum();
    if !n2.is_finite() || n2.sqrt() > DIVERGENCE_RADIUS {
        return Err(diverged(state));
    }
    Ok(())
}

/// The drift evaluation of one step; ξ is drawn only when μ > 0 so that
/// μ = 0 consumes the stream exactly like plain ULA.
fn drift(state: &ChainState, model: &PotentialModel, smoothing: Option<&SmoothingConfig>, rng: &mut StreamRng, w: &mut Work) -> Result<()> {
    match smoothing {
        Some(cfg) if cfg.mu > 0.0 => {
            cfg.pg.fill(rng, &mut w.xi);
            for ((y, x), xi) in w.y.iter_mut().zip(&state.position).zip(&w.xi) {
                *y = x + cfg.mu * xi;
            }
            model.gradient(&w.y, &mut w.grad);
        }
        _ => model.gradient(&state.position, &mut w.grad),
    }
    if w.grad.iter().any(|g| !g.is_finite()) {
        return Err(diverged(state));
    }
    Ok(())
}

fn advance(state: &mut ChainState, model: &PotentialModel, eta: f64, smoothing: Option<&SmoothingConfig>, rng: &mut StreamRng, w: &mut Work) -> Result<()> {
    drift(state, model, smoothing, rng, w)?;
    let s = (2.0 * eta).sqrt();
    for (x, g) in state.position.iter_mut().zip(&w.grad) {
        let z: f64 = rng.sample(StandardNormal);
        *x += -eta * g + s * z;
    }
    state.step_index += 1;
    check_state(state)
}

/// One ULA step with z drawn from `rng`.
pub fn step(state: &ChainState, model: &PotentialModel, eta: f64, rng: &mut StreamRng) -> Result<ChainState> {
    if !(eta >= 0.0) {
        return Err(invalid(format!("step size must be nonnegative, got {eta}")));
    }
    let mut next = state.clone();
    advance(&mut next, model, eta, None, rng, &mut Work::new(state.position.len()))?;
    Ok(next)
}

/// One ULA step with caller-supplied noise z.
pub fn step_with_noise(state: &ChainState, model: &PotentialModel, eta: f64, z: &[f64]) -> Result<ChainState> {
    let mut g = vec![0.0; z.len()];
    model.gradient(&state.position, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(diverged(state));
    }
    let s = (2.0 * eta).sqrt();
    let mut next = state.clone();
    for ((x, gi), zi) in next.position.iter_mut().zip(&g).zip(z) {
        *x += -eta * gi + s * zi;
    }
    next.step_index += 1;
    check_state(&next)?;
    Ok(next)
}

/// One smoothed step: drift ∇U(x + μξ) with a fresh ξ, then the Gaussian kick.
pub fn step_smoothed(state: &ChainState, model: &PotentialModel, cfg: &SmoothingConfig, eta: f64, rng: &mut StreamRng) -> Result<ChainState> {
    if !(eta >= 0.0) {
        return Err(invalid(format!("step size must be nonnegative, got {eta}")));
    }
    let mut next = state.clone();
    advance(&mut next, model, eta, Some(cfg), rng, &mut Work::new(state.position.len()))?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// N(0, variance·I), with the initial bound on H(p₀|π).
    Gaussian { variance: f64, h0_bound: f64 },
    Point(Vec<f64>),
}

impl InitSpec {
    pub fn draw(&self, d: usize, rng: &mut StreamRng) -> Vec<f64> {
        match self {
            InitSpec::Gaussian { variance, .. } => {
                let s = variance.sqrt();
                (0..d).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect()
            }
            InitSpec::Point(x) => x.clone(),
        }
    }
}

/// p₀ = N(0, I/L) with the H₀ bound evaluated for the normalized potential
/// when its log-normalizer is known.
pub fn init_gaussian(model: &PotentialModel) -> InitSpec {
    let d = model.dim();
    let mut u0 = model.value(&vec![0.0; d]);
    if let Some(ln_z) = model.log_normalizer {
        u0 += ln_z;
    }
    InitSpec::Gaussian { variance: 1.0 / model.smoothness.l_max(), h0_bound: initial_kl_bound(&model.smoothness, u0, d) }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Record positions at steps burn_in + thin, burn_in + 2·thin, ...
    pub record: bool,
    pub burn_in: u64,
    pub thin: u64,
    /// Use the smoothed kernel with this configuration.
    pub smoothing: Option<SmoothingConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub final_states: SampleBatch,
    /// Thinned post-burn-in positions of all chains, chain-major.
    pub trajectory: Option<SampleBatch>,
}

/// Run `n_chains` independent chains for `k` steps; chain i uses stream `seed.child(i)`
/// for both its initial draw and its noise.
pub fn run_chains(model: &PotentialModel, eta: f64, k: u64, init: &InitSpec, n_chains: usize, seed: Seed, opts: &RunOptions) -> Result<ChainOutput> {
    if !(eta >= 0.0) {
        return Err(invalid(format!("step size must be nonnegative, got {eta}")));
    }
    if n_chains == 0 {
        return Err(invalid("need at least one chain"));
    }
    let d = model.dim();
    let thin = opts.thin.max(1);
    let per_chain = exec::try_map_indexed(n_chains, |i| {
        let mut rng = seed.child(i as u64).rng();
        let mut state = ChainState::new(init.draw(d, &mut rng), i as u64);
        check_state(&state)?;
        let mut w = Work::new(d);
        let mut traj = Vec::new();
        for _ in 0..k {
            advance(&mut state, model, eta, opts.smoothing.as_ref(), &mut rng, &mut w)?;
            if opts.record && state.step_index > opts.burn_in && (state.step_index - opts.burn_in) % thin == 0 {
                traj.extend_from_slice(&state.position);
            }
        }
        Ok::<_, Error>((state.position, traj))
    })?;
    let mut finals = Vec::with_capacity(n_chains * d);
    let mut traj = Vec::new();
    for (f, t) in per_chain {
        finals.extend(f);
        traj.extend(t);
    }
    Ok(ChainOutput {
        final_states: SampleBatch::new(d, finals),
        trajectory: opts.record.then(|| SampleBatch::new(d, traj)),
    })
}

/// [`run_chains`] driven by a plan; smoothed plans use μ from the plan unless
/// `opts.smoothing` is set.
pub fn run_chain(model: &PotentialModel, plan: &StepSizePlan, init: &InitSpec, n_chains: usize, seed: Seed, opts: &RunOptions) -> Result<ChainOutput> {
    let mut opts = *opts;
    if opts.smoothing.is_none() {
        if let Some(&mu) = plan.constants.get("mu") {
            opts.smoothing = Some(SmoothingConfig::new(mu, plan.p, model.dim(), 1)?);
        }
    }
    run_chains(model, plan.eta, plan.k_iterations, init, n_chains, seed, &opts)
}
