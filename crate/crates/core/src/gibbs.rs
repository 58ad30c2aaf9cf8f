//! Gibbs sampler over the full posterior.
//!
//! One iteration visits the blocks in a fixed order:
//!
//! 1. `θ_1i` for every subject (within-Gibbs kernel)
//! 2. `θ_2i` for every subject
//! 3. `θ_3i` for every subject
//! 4. `σ² ~ IG(Σ M_i / 2, ½ Σ ‖y_i − f_i‖²)`
//! 5. `α_l ~ N(mean(θ_l), ω_l² / N)`
//! 6. `ω_l² ~ IG(N / 2, ½ ‖θ_l − 1 α_l‖²)`
//! 7. `ζ` (elliptical slice by default)
//!
//! Every random draw comes from a ChaCha stream keyed on
//! `(seed, iteration, block, index)`, so subject updates in steps 1–3 can run
//! on any number of threads and still reproduce the sequential chain bit for
//! bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{
    ess_step, kernel_step, GaussianFactor, KernelConfig, KernelKind, ScalarTarget, Step, StepSizeAdapter,
};
use crate::model::{patient_residual_ss, total_residual_ss, ChainState, Dataset, PatientRecord, PkParam, Priors};
use crate::pk_math::{self, ModelParams};

/// Bioavailability assumed when sketching initial volumes.
const INIT_BIOAVAILABILITY: f64 = 0.9;
const FALLBACK_ELIMINATION_RATE: f64 = 0.1;
const MIN_INIT_VARIANCE: f64 = 1e-2;
const MIN_INIT_SIGMA2: f64 = 1e-4;
/// |corr(ζ, α₂)| above which the F–V ridge is reported.
pub const CONFOUNDING_WARN_CORR: f64 = 0.95;

/// Which blocks are resampled; frozen blocks keep their initial value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockUpdates {
    pub theta: [bool; 3],
    pub sigma2: bool,
    pub alpha: bool,
    pub omega2: bool,
    pub zeta: bool,
}

impl BlockUpdates {
    pub fn all() -> Self {
        Self {
            theta: [true; 3],
            sigma2: true,
            alpha: true,
            omega2: true,
            zeta: true,
        }
    }

    pub fn none() -> Self {
        Self {
            theta: [false; 3],
            sigma2: false,
            alpha: false,
            omega2: false,
            zeta: false,
        }
    }

    /// Only `θ_l·` moves.
    pub fn only_theta(param: PkParam) -> Self {
        let mut u = Self::none();
        u.theta[param.index()] = true;
        u
    }
}

impl Default for BlockUpdates {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub theta_kernel: KernelConfig,
    pub zeta_kernel: KernelConfig,
    pub parallel_patients: bool,
    pub updates: BlockUpdates,
    /// Replace the likelihood by a constant and sample the prior hierarchy.
    /// `σ²` has no proper conditional in that case and is held fixed.
    pub prior_only: bool,
}

impl SamplerConfig {
    pub fn new(n_iterations: usize, burn_in: usize) -> Self {
        Self {
            n_iterations,
            burn_in,
            thin: 1,
            seed: 0,
            theta_kernel: KernelConfig::metropolis(0.1),
            zeta_kernel: KernelConfig::ess(),
            parallel_patients: false,
            updates: BlockUpdates::all(),
            prior_only: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be > 0".into()));
        }
        if self.n_iterations > u32::MAX as usize {
            return Err(Error::InvalidConfig("iterations must fit in 32 bits".into()));
        }
        if self.burn_in >= self.n_iterations {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.n_iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be >= 1".into()));
        }
        self.theta_kernel.validate()?;
        self.zeta_kernel.validate()
    }

    /// `floor((n_iterations − burn_in) / thin)`.
    pub fn n_retained(&self) -> usize {
        (self.n_iterations - self.burn_in) / self.thin
    }

    fn retains(&self, iteration: usize) -> bool {
        iteration >= self.burn_in && (iteration - self.burn_in + 1).is_multiple_of(self.thin)
    }
}

/// Random-number consumer within an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Theta1 = 0,
    Theta2 = 1,
    Theta3 = 2,
    Sigma2 = 3,
    Alpha = 4,
    Omega2 = 5,
    Zeta = 6,
}

impl Block {
    pub fn theta(param: PkParam) -> Self {
        match param {
            PkParam::LogClearance => Block::Theta1,
            PkParam::LogVolume => Block::Theta2,
            PkParam::LogAbsorptionRate => Block::Theta3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Block::Theta1 => "theta1",
            Block::Theta2 => "theta2",
            Block::Theta3 => "theta3",
            Block::Sigma2 => "sigma2",
            Block::Alpha => "alpha",
            Block::Omega2 => "omega2",
            Block::Zeta => "zeta",
        }
    }
}

/// Maximum number of subjects addressable by the stream layout.
pub const MAX_PATIENTS: usize = 1 << 24;

/// Counter-based random streams: one independent ChaCha stream per
/// `(iteration, block, index)` under a common seed.
#[derive(Debug, Clone)]
pub struct RngStreams {
    base: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream id layout: iteration in bits 32..64, block in 24..32, index in 0..24.
    pub fn stream_id(iteration: usize, block: Block, index: usize) -> u64 {
        debug_assert!(iteration <= u32::MAX as usize && index < MAX_PATIENTS);
        ((iteration as u64) << 32) | ((block as u64) << 24) | index as u64
    }

    pub fn stream(&self, iteration: usize, block: Block, index: usize) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(Self::stream_id(iteration, block, index));
        rng
    }
}

/// Full conditional of `θ_li`: `exp(−SS_i / 2σ²) · N(θ_li; α_l, ω_l²)`.
#[derive(Debug, Clone)]
pub struct ThetaConditional<'a> {
    patient: &'a PatientRecord,
    theta: [f64; 3],
    param: PkParam,
    zeta: f64,
    sigma2: f64,
    prior: GaussianFactor,
    prior_only: bool,
}

impl ThetaConditional<'_> {
    fn row_with(&self, x: f64) -> [f64; 3] {
        let mut row = self.theta;
        row[self.param.index()] = x;
        row
    }

    /// Derivative of `−SS_i / 2σ²` with respect to the free coordinate.
    fn likelihood_gradient(&self, x: f64) -> f64 {
        if self.prior_only {
            return 0.0;
        }
        let params = ModelParams::new(self.row_with(x), self.zeta);
        let mut g = 0.0;
        for (&t, &y) in self.patient.times.iter().zip(&self.patient.log_conc) {
            match pk_math::log_mean_with_gradient(&params, self.patient.dose, t) {
                Ok((f, grad)) => g += (y - f) * grad[self.param.index()],
                Err(_) => return f64::NAN,
            }
        }
        g / self.sigma2
    }
}

impl ScalarTarget for ThetaConditional<'_> {
    fn log_density(&self, x: f64) -> f64 {
        self.log_likelihood(x) + self.prior.log_kernel(x)
    }

    fn gradient(&self, x: f64) -> Option<f64> {
        Some(self.likelihood_gradient(x) + self.prior.log_kernel_gradient(x))
    }

    fn gaussian_factor(&self) -> Option<GaussianFactor> {
        Some(self.prior)
    }

    fn log_likelihood(&self, x: f64) -> f64 {
        if self.prior_only {
            return 0.0;
        }
        match patient_residual_ss(self.patient, self.row_with(x), self.zeta) {
            Ok(ss) => -0.5 * ss / self.sigma2,
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Full conditional of `ζ`: `exp(−Σ_i SS_i / 2σ²) · N(ζ; 0, ρ²)`.
#[derive(Debug, Clone)]
pub struct ZetaConditional<'a> {
    data: &'a Dataset,
    theta: &'a [[f64; 3]],
    sigma2: f64,
    prior: GaussianFactor,
    prior_only: bool,
}

impl ZetaConditional<'_> {
    fn likelihood_gradient(&self, x: f64) -> f64 {
        if self.prior_only {
            return 0.0;
        }
        // ∂f/∂ζ = 1/(1 + e^ζ) at every observation.
        let dfdz = pk_math::logistic(-x);
        let mut g = 0.0;
        for (patient, row) in self.data.patients.iter().zip(self.theta) {
            let params = ModelParams::new(*row, x);
            for (&t, &y) in patient.times.iter().zip(&patient.log_conc) {
                match pk_math::log_mean(&params, patient.dose, t) {
                    Ok(f) => g += y - f,
                    Err(_) => return f64::NAN,
                }
            }
        }
        g * dfdz / self.sigma2
    }
}

impl ScalarTarget for ZetaConditional<'_> {
    fn log_density(&self, x: f64) -> f64 {
        self.log_likelihood(x) + self.prior.log_kernel(x)
    }

    fn gradient(&self, x: f64) -> Option<f64> {
        Some(self.likelihood_gradient(x) + self.prior.log_kernel_gradient(x))
    }

    fn gaussian_factor(&self) -> Option<GaussianFactor> {
        Some(self.prior)
    }

    fn log_likelihood(&self, x: f64) -> f64 {
        if self.prior_only {
            return 0.0;
        }
        let mut ss = 0.0;
        for (patient, row) in self.data.patients.iter().zip(self.theta) {
            match patient_residual_ss(patient, *row, x) {
                Ok(v) => ss += v,
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        -0.5 * ss / self.sigma2
    }
}

/// Target for `θ_{param, patient}` with every other block held at `state`.
pub fn conditional_theta<'a>(
    state: &ChainState,
    data: &'a Dataset,
    param: PkParam,
    patient: usize,
) -> ThetaConditional<'a> {
    let l = param.index();
    ThetaConditional {
        patient: &data.patients[patient],
        theta: state.theta[patient],
        param,
        zeta: state.zeta,
        sigma2: state.sigma2,
        prior: GaussianFactor::new(state.alpha[l], state.omega2[l]),
        prior_only: false,
    }
}

/// Target for `ζ` with every other block held at `state`.
pub fn conditional_zeta<'a>(state: &'a ChainState, data: &'a Dataset, priors: &Priors) -> ZetaConditional<'a> {
    ZetaConditional {
        data,
        theta: &state.theta,
        sigma2: state.sigma2,
        prior: GaussianFactor::new(0.0, priors.zeta_prior_variance),
        prior_only: false,
    }
}

/// Draw from `IG(shape, scale)` as `scale / Gamma(shape, 1)`.
pub fn inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0).expect("inverse-gamma shape must be positive");
    scale / g.sample(rng)
}

fn degenerate(block: &str, detail: String) -> Error {
    Error::Degenerate {
        block: block.into(),
        iteration: None,
        detail,
    }
}

/// Step 4: `σ² ~ IG(Σ M_i / 2, ½ Σ_i ‖y_i − f_i‖²)`.
pub fn sample_sigma2<R: Rng + ?Sized>(state: &ChainState, data: &Dataset, rng: &mut R) -> Result<f64> {
    let ss = total_residual_ss(state, data)?;
    if !(ss > 0.0 && ss.is_finite()) {
        return Err(degenerate(
            "sigma2",
            format!("total residual sum of squares is {ss}; the data are fitted exactly"),
        ));
    }
    Ok(inverse_gamma(0.5 * data.total_observations() as f64, 0.5 * ss, rng))
}

/// Step 5: `α_l ~ N(mean(θ_l·), ω_l² / N)`.
pub fn sample_alpha<R: Rng + ?Sized>(state: &ChainState, param: PkParam, rng: &mut R) -> f64 {
    let n = state.n_patients() as f64;
    let mean = state.theta_column(param).sum::<f64>() / n;
    let z: f64 = rng.sample(StandardNormal);
    mean + (state.omega2[param.index()] / n).sqrt() * z
}

/// Step 6: `ω_l² ~ IG(N / 2, ½ ‖θ_l − 1 α_l‖²)`.
pub fn sample_omega2<R: Rng + ?Sized>(state: &ChainState, param: PkParam, rng: &mut R) -> Result<f64> {
    let ss = state.population_ss(param);
    if !(ss > 0.0 && ss.is_finite()) {
        return Err(degenerate(
            Block::Omega2.name(),
            format!("‖θ_{} − α‖² is {ss}; all subjects coincide with the population mean", param.number()),
        ));
    }
    Ok(inverse_gamma(0.5 * state.n_patients() as f64, 0.5 * ss, rng))
}

/// Log-linear slope of the last (up to) three observations, as an elimination rate.
fn terminal_elimination_rate(patient: &PatientRecord) -> f64 {
    let m = patient.n_obs();
    let k = m.min(3);
    if k < 2 {
        return FALLBACK_ELIMINATION_RATE;
    }
    let t = &patient.times[m - k..];
    let y = &patient.log_conc[m - k..];
    let tm = t.iter().sum::<f64>() / k as f64;
    let ym = y.iter().sum::<f64>() / k as f64;
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    let ke = -sxy / sxx;
    if ke > 0.0 && ke.is_finite() {
        ke
    } else {
        FALLBACK_ELIMINATION_RATE
    }
}

/// Curve-sketching start: volume from the peak concentration, elimination
/// rate from the terminal slope, absorption three times faster than
/// elimination, `ζ = 0`, and moment-matched variances.
pub fn initial_state(data: &Dataset) -> ChainState {
    let theta: Vec<[f64; 3]> = data
        .patients
        .iter()
        .map(|p| {
            let log_cmax = p.log_conc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_v = (INIT_BIOAVAILABILITY * p.dose).ln() - log_cmax;
            let ke = terminal_elimination_rate(p);
            [log_v + ke.ln(), log_v, (3.0 * ke).ln()]
        })
        .collect();
    let n = theta.len() as f64;
    let mut alpha = [0.0; 3];
    let mut omega2 = [MIN_INIT_VARIANCE; 3];
    for l in 0..3 {
        alpha[l] = theta.iter().map(|r| r[l]).sum::<f64>() / n;
        if theta.len() > 1 {
            let var = theta.iter().map(|r| (r[l] - alpha[l]).powi(2)).sum::<f64>() / (n - 1.0);
            omega2[l] = var.max(MIN_INIT_VARIANCE);
        }
    }
    let mut state = ChainState {
        theta,
        zeta: 0.0,
        sigma2: 1.0,
        alpha,
        omega2,
    };
    let ss = total_residual_ss(&state, data).unwrap_or(f64::NAN);
    let sigma2 = ss / data.total_observations() as f64;
    state.sigma2 = if sigma2.is_finite() { sigma2.max(MIN_INIT_SIGMA2) } else { 1.0 };
    state
}

/// Post-burn-in acceptance rates per block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceSummary {
    pub theta: [f64; 3],
    pub zeta: f64,
    /// Largest number of ESS bracket shrinkages in any single ζ update.
    pub max_ess_shrinks: usize,
}

/// A retained state and the (0-based) iteration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub iteration: usize,
    pub state: ChainState,
}

#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub patient_ids: Vec<String>,
    pub draws: Vec<Draw>,
    pub acceptance: AcceptanceSummary,
    /// Frozen post-burn-in step sizes, `[patient][param]`.
    pub theta_steps: Vec<[f64; 3]>,
    pub zeta_step: f64,
    pub config: SamplerConfig,
    pub warnings: Vec<String>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// Trace of any scalar function of the state.
    pub fn trace(&self, f: impl Fn(&ChainState) -> f64) -> Vec<f64> {
        self.draws.iter().map(|d| f(&d.state)).collect()
    }

    pub fn alpha_trace(&self, param: PkParam) -> Vec<f64> {
        self.trace(|s| s.alpha[param.index()])
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

struct Tuning {
    theta: Vec<[StepSizeAdapter; 3]>,
    zeta: StepSizeAdapter,
}

/// Run the Gibbs sampler from `init` (or the curve-sketching start).
pub fn run_chain(
    data: &Dataset,
    priors: &Priors,
    config: &SamplerConfig,
    init: Option<ChainState>,
) -> Result<PosteriorDraws> {
    // A single subject is only a problem for the population blocks.
    if config.updates.alpha || config.updates.omega2 {
        data.validate_for_fit()?;
    } else if data.n_patients() == 0 {
        return Err(Error::InvalidData("dataset has no patients".into()));
    }
    priors.validate()?;
    config.validate()?;
    let n = data.n_patients();
    if n >= MAX_PATIENTS {
        return Err(Error::InvalidData(format!("at most {} patients supported", MAX_PATIENTS - 1)));
    }
    let mut state = match init {
        Some(s) => {
            if s.n_patients() != n || !s.is_valid() {
                return Err(Error::InvalidConfig(
                    "initial state must be valid and have one theta row per patient".into(),
                ));
            }
            s
        }
        None => initial_state(data),
    };

    let mut warnings = Vec::new();
    if n < 4 {
        warnings.push(format!(
            "only {n} patients: the omega2 conditionals IG(N/2, .) are very heavy-tailed"
        ));
    }

    let streams = RngStreams::new(config.seed);
    let theta_kernel = config.theta_kernel;
    let mut tuning = Tuning {
        theta: vec![[StepSizeAdapter::new(theta_kernel.step, theta_kernel.target_acceptance); 3]; n],
        zeta: StepSizeAdapter::new(config.zeta_kernel.step, config.zeta_kernel.target_acceptance),
    };
    let mut accepted_theta = [0usize; 3];
    let mut accepted_zeta = 0usize;
    let mut max_shrinks = 0usize;
    let mut draws = Vec::with_capacity(config.n_retained());

    let with_iteration = |e: Error, it: usize| match e {
        Error::Degenerate { block, detail, .. } => Error::Degenerate {
            block,
            iteration: Some(it),
            detail,
        },
        other => other,
    };

    for it in 0..config.n_iterations {
        let burning = it < config.burn_in;

        // Steps 1-3.
        for param in PkParam::ALL {
            let l = param.index();
            if !config.updates.theta[l] {
                continue;
            }
            let block = Block::theta(param);
            let update = |i: usize| -> Result<Step> {
                let mut target = conditional_theta(&state, data, param, i);
                target.prior_only = config.prior_only;
                let mut rng = streams.stream(it, block, i);
                kernel_step(&target, state.theta[i][l], &theta_kernel, tuning.theta[i][l].step(), &mut rng)
            };
            let steps: Vec<Result<Step>> = if config.parallel_patients {
                (0..n).into_par_iter().map(update).collect()
            } else {
                (0..n).map(update).collect()
            };
            for (i, step) in steps.into_iter().enumerate() {
                let step = step.map_err(|e| with_iteration(e, it))?;
                state.theta[i][l] = step.value;
                if burning {
                    if theta_kernel.adapt_during_burnin && theta_kernel.kind != KernelKind::Ess {
                        tuning.theta[i][l].observe(step.accepted);
                    }
                } else {
                    accepted_theta[l] += step.accepted as usize;
                }
            }
        }

        // Step 4.
        if config.updates.sigma2 && !config.prior_only {
            let mut rng = streams.stream(it, Block::Sigma2, 0);
            state.sigma2 = sample_sigma2(&state, data, &mut rng).map_err(|e| with_iteration(e, it))?;
        }

        // Step 5.
        if config.updates.alpha {
            for param in PkParam::ALL {
                let mut rng = streams.stream(it, Block::Alpha, param.index());
                state.alpha[param.index()] = sample_alpha(&state, param, &mut rng);
            }
        }

        // Step 6.
        if config.updates.omega2 {
            for param in PkParam::ALL {
                let mut rng = streams.stream(it, Block::Omega2, param.index());
                state.omega2[param.index()] =
                    sample_omega2(&state, param, &mut rng).map_err(|e| with_iteration(e, it))?;
            }
        }

        // Step 7.
        if config.updates.zeta {
            let mut rng = streams.stream(it, Block::Zeta, 0);
            let mut target = conditional_zeta(&state, data, priors);
            target.prior_only = config.prior_only;
            let zk = config.zeta_kernel;
            let step = if zk.kind == KernelKind::Ess {
                let o = ess_step(&target, state.zeta, &mut rng)?;
                max_shrinks = max_shrinks.max(o.shrinks);
                Step { value: o.value, accepted: true }
            } else {
                kernel_step(&target, state.zeta, &zk, tuning.zeta.step(), &mut rng)
                    .map_err(|e| with_iteration(e, it))?
            };
            state.zeta = step.value;
            if burning {
                if zk.adapt_during_burnin && zk.kind != KernelKind::Ess {
                    tuning.zeta.observe(step.accepted);
                }
            } else {
                accepted_zeta += step.accepted as usize;
            }
        }

        if config.retains(it) {
            draws.push(Draw {
                iteration: it,
                state: state.clone(),
            });
        }
    }

    let post = (config.n_iterations - config.burn_in) as f64;
    let acceptance = AcceptanceSummary {
        theta: accepted_theta.map(|a| a as f64 / (post * n as f64)),
        zeta: accepted_zeta as f64 / post,
        max_ess_shrinks: max_shrinks,
    };

    if config.updates.zeta && config.updates.alpha && draws.len() >= 10 {
        let z: Vec<f64> = draws.iter().map(|d| d.state.zeta).collect();
        let a: Vec<f64> = draws.iter().map(|d| d.state.alpha[PkParam::LogVolume.index()]).collect();
        let r = pearson(&z, &a);
        if r.abs() > CONFOUNDING_WARN_CORR {
            warnings.push(format!(
                "posterior corr(zeta, alpha2) = {r:.3}: bioavailability and volume are confounded; \
                 F and V_pop are identified mainly through the zeta prior"
            ));
        }
    }

    Ok(PosteriorDraws {
        patient_ids: data.patients.iter().map(|p| p.id.clone()).collect(),
        draws,
        acceptance,
        theta_steps: tuning.theta.iter().map(|row| row.map(|a| a.step())).collect(),
        zeta_step: tuning.zeta.step(),
        config: config.clone(),
        warnings,
    })
}
