//! Single-coordinate MCMC transition kernels.
//!
//! Three kernels act on a scalar [`ScalarTarget`]:
//!
//! * [`metropolis_step`]: Gaussian random walk with the symmetric-proposal
//!   acceptance rule.
//! * [`mala_step`]: Langevin proposal `N(x - δ ∇U(x), 2δ)` with
//!   `U = -log π`, corrected by the full Metropolis–Hastings ratio.
//! * [`ess_step`]: elliptical slice sampling on an ellipse centred at the
//!   mean of the target's Gaussian prior factor. Never rejects.
//!
//! Step sizes are tuned during burn-in by [`StepSizeAdapter`] and frozen
//! afterwards.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A Gaussian factor `N(mean, variance)` of a target density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFactor {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianFactor {
    pub fn new(mean: f64, variance: f64) -> Self {
        Self { mean, variance }
    }

    /// `-(x - μ)² / (2v)`.
    pub fn log_kernel(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * d * d / self.variance
    }

    pub fn log_kernel_gradient(&self, x: f64) -> f64 {
        -(x - self.mean) / self.variance
    }
}

/// An unnormalised one-dimensional log density.
///
/// Targets that factor as `likelihood × N(μ, v)` expose the factor through
/// [`gaussian_factor`](ScalarTarget::gaussian_factor); the elliptical slice
/// kernel needs it, the other kernels ignore it.
pub trait ScalarTarget {
    fn log_density(&self, x: f64) -> f64;

    /// `d/dx log_density`, when available.
    fn gradient(&self, _x: f64) -> Option<f64> {
        None
    }

    fn gaussian_factor(&self) -> Option<GaussianFactor> {
        None
    }

    /// The non-Gaussian part of the density, so that
    /// `log_density(x) = log_likelihood(x) + factor.log_kernel(x) + const`.
    fn log_likelihood(&self, x: f64) -> f64 {
        match self.gaussian_factor() {
            Some(g) => self.log_density(x) - g.log_kernel(x),
            None => self.log_density(x),
        }
    }
}

impl<T: ScalarTarget + ?Sized> ScalarTarget for &T {
    fn log_density(&self, x: f64) -> f64 {
        (**self).log_density(x)
    }
    fn gradient(&self, x: f64) -> Option<f64> {
        (**self).gradient(x)
    }
    fn gaussian_factor(&self) -> Option<GaussianFactor> {
        (**self).gaussian_factor()
    }
    fn log_likelihood(&self, x: f64) -> f64 {
        (**self).log_likelihood(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Metropolis,
    Mala,
    Ess,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Metropolis => "metropolis",
            KernelKind::Mala => "mala",
            KernelKind::Ess => "ess",
        }
    }

    /// Default acceptance rate the adapter steers toward.
    pub fn default_target_acceptance(self) -> f64 {
        match self {
            KernelKind::Metropolis => 0.44,
            KernelKind::Mala => 0.57,
            KernelKind::Ess => 1.0,
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "metropolis" | "mh" => Ok(KernelKind::Metropolis),
            "mala" => Ok(KernelKind::Mala),
            "ess" => Ok(KernelKind::Ess),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// Proposal sd for Metropolis, step size δ for MALA; unused by ESS.
    pub step: f64,
    pub adapt_during_burnin: bool,
    pub target_acceptance: f64,
}

impl KernelConfig {
    pub fn new(kind: KernelKind, step: f64) -> Self {
        Self {
            kind,
            step,
            adapt_during_burnin: true,
            target_acceptance: kind.default_target_acceptance(),
        }
    }

    pub fn metropolis(step: f64) -> Self {
        Self::new(KernelKind::Metropolis, step)
    }

    pub fn mala(step: f64) -> Self {
        Self::new(KernelKind::Mala, step)
    }

    pub fn ess() -> Self {
        Self::new(KernelKind::Ess, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!("kernel step must be > 0, got {}", self.step)));
        }
        if self.kind != KernelKind::Ess && !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target acceptance must lie in (0, 1), got {}",
                self.target_acceptance
            )));
        }
        Ok(())
    }
}

/// Result of one Metropolis-type transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub value: f64,
    pub accepted: bool,
}

/// Result of one elliptical slice transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssOutcome {
    pub value: f64,
    /// Number of bracket shrinkages before a point on the slice was found.
    pub shrinks: usize,
}

/// NaN and +inf are not densities; both are read as an impossible point.
fn sanitize(log_p: f64) -> f64 {
    if log_p.is_nan() || log_p == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        log_p
    }
}

/// `u < min{exp(log_ratio), 1}` for `u ∈ [0, 1)`.
fn accept(u: f64, log_ratio: f64) -> bool {
    if log_ratio.is_nan() {
        false
    } else if log_ratio >= 0.0 {
        true
    } else {
        u < log_ratio.exp()
    }
}

/// Random-walk Metropolis with proposal `N(current, step²)`.
pub fn metropolis_step<T, R>(target: &T, current: f64, step: f64, rng: &mut R) -> Step
where
    T: ScalarTarget + ?Sized,
    R: Rng + ?Sized,
{
    let u: f64 = rng.random();
    let z: f64 = rng.sample(StandardNormal);
    let proposal = current + step * z;
    if !proposal.is_finite() {
        return Step { value: current, accepted: false };
    }
    let log_ratio = sanitize(target.log_density(proposal)) - sanitize(target.log_density(current));
    if accept(u, log_ratio) {
        Step { value: proposal, accepted: true }
    } else {
        Step { value: current, accepted: false }
    }
}

/// Log of the MALA proposal density `q(to | from)` up to a constant.
fn langevin_log_proposal(from: f64, grad_from: f64, to: f64, step: f64) -> f64 {
    let d = to - from - step * grad_from;
    -d * d / (4.0 * step)
}

/// Metropolis–Hastings log ratio for a MALA move `from → to`, including the
/// proposal asymmetry `q(from | to) / q(to | from)`.
pub fn mala_log_ratio<T>(target: &T, from: f64, to: f64, step: f64) -> Result<f64>
where
    T: ScalarTarget + ?Sized,
{
    let g_from = target.gradient(from).ok_or(Error::MissingGradient)?;
    let g_to = target.gradient(to).ok_or(Error::MissingGradient)?;
    Ok(sanitize(target.log_density(to)) - sanitize(target.log_density(from))
        + langevin_log_proposal(to, g_to, from, step)
        - langevin_log_proposal(from, g_from, to, step))
}

/// Metropolis-adjusted Langevin step with proposal `N(x + δ ∇log π(x), 2δ)`.
pub fn mala_step<T, R>(target: &T, current: f64, step: f64, rng: &mut R) -> Result<Step>
where
    T: ScalarTarget + ?Sized,
    R: Rng + ?Sized,
{
    let grad = target.gradient(current).ok_or(Error::MissingGradient)?;
    let u: f64 = rng.random();
    let z: f64 = rng.sample(StandardNormal);
    let proposal = current + step * grad + (2.0 * step).sqrt() * z;
    let rejected = Step { value: current, accepted: false };
    if !proposal.is_finite() {
        return Ok(rejected);
    }
    let grad_proposal = target.gradient(proposal).ok_or(Error::MissingGradient)?;
    if !grad_proposal.is_finite() {
        return Ok(rejected);
    }
    let log_ratio = sanitize(target.log_density(proposal)) - sanitize(target.log_density(current))
        + langevin_log_proposal(proposal, grad_proposal, current, step)
        - langevin_log_proposal(current, grad, proposal, step);
    Ok(if accept(u, log_ratio) {
        Step { value: proposal, accepted: true }
    } else {
        rejected
    })
}

/// Point at angle `phi` on the ellipse through `current` and `nu`, centred at `mean`.
pub fn ellipse_point(current: f64, nu: f64, mean: f64, phi: f64) -> f64 {
    (current - mean) * phi.cos() + (nu - mean) * phi.sin() + mean
}

/// Elliptical slice step for a target `L(x) · N(x; μ, v)`.
///
/// Draws `ν ~ N(μ, v)`, a threshold `u ~ U[0, 1]` and an angle
/// `φ ~ U(-π, π]`, then shrinks the angle bracket toward zero until the
/// proposal clears the slice `L(x*) > u L(current)`.
pub fn ess_step<T, R>(target: &T, current: f64, rng: &mut R) -> Result<EssOutcome>
where
    T: ScalarTarget + ?Sized,
    R: Rng + ?Sized,
{
    let prior = target.gaussian_factor().ok_or(Error::MissingGaussianFactor)?;
    let z: f64 = rng.sample(StandardNormal);
    let nu = prior.mean + prior.variance.sqrt() * z;
    let u: f64 = rng.random();
    let log_threshold = sanitize(target.log_likelihood(current)) + u.ln();

    let mut phi = PI - 2.0 * PI * rng.random::<f64>();
    let (mut lo, mut hi) = (-PI, PI);
    let mut shrinks = 0;
    loop {
        let proposal = ellipse_point(current, nu, prior.mean, phi);
        if sanitize(target.log_likelihood(proposal)) > log_threshold {
            return Ok(EssOutcome { value: proposal, shrinks });
        }
        if phi > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        shrinks += 1;
        // The bracket always holds 0 in its closure; once it has collapsed
        // below float resolution the only remaining point is `current`.
        if hi - lo <= f64::MIN_POSITIVE {
            return Ok(EssOutcome { value: current, shrinks });
        }
        phi = hi - (hi - lo) * rng.random::<f64>();
    }
}

/// Robbins–Monro update `log δ ← log δ + k^{-0.6} (rate - target)`.
///
/// `iteration` counts from 1.
pub fn adapt_step_size(step: f64, acceptance_rate: f64, target_acceptance: f64, iteration: usize) -> f64 {
    let gain = (iteration.max(1) as f64).powf(-0.6);
    (step.ln() + gain * (acceptance_rate - target_acceptance)).exp()
}

/// Per-coordinate burn-in tuner feeding accept/reject outcomes to
/// [`adapt_step_size`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeAdapter {
    step: f64,
    target_acceptance: f64,
    updates: usize,
}

impl StepSizeAdapter {
    pub fn new(step: f64, target_acceptance: f64) -> Self {
        Self {
            step,
            target_acceptance,
            updates: 0,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn observe(&mut self, accepted: bool) -> f64 {
        self.updates += 1;
        let rate = if accepted { 1.0 } else { 0.0 };
        self.step = adapt_step_size(self.step, rate, self.target_acceptance, self.updates);
        self.step
    }
}

/// One transition of the kernel selected by `config`.
pub fn kernel_step<T, R>(target: &T, current: f64, config: &KernelConfig, step: f64, rng: &mut R) -> Result<Step>
where
    T: ScalarTarget + ?Sized,
    R: Rng + ?Sized,
{
    match config.kind {
        KernelKind::Metropolis => Ok(metropolis_step(target, current, step, rng)),
        KernelKind::Mala => mala_step(target, current, step, rng),
        KernelKind::Ess => ess_step(target, current, rng).map(|o| Step {
            value: o.value,
            accepted: true,
        }),
    }
}

/// Draws from a single-kernel chain on a fixed target.
#[derive(Debug, Clone)]
pub struct ScalarChain {
    pub draws: Vec<f64>,
    pub acceptance_rate: f64,
    pub final_step: f64,
    pub max_shrinks: usize,
}

/// Run one kernel on `target` for `burn_in + n_draws` steps, adapting the
/// step size during burn-in when the config asks for it.
pub fn run_scalar_chain<T>(
    target: &T,
    config: &KernelConfig,
    init: f64,
    burn_in: usize,
    n_draws: usize,
    seed: u64,
) -> Result<ScalarChain>
where
    T: ScalarTarget + ?Sized,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adapter = StepSizeAdapter::new(config.step, config.target_acceptance);
    let mut x = init;
    let mut accepted = 0usize;
    let mut max_shrinks = 0usize;
    let mut draws = Vec::with_capacity(n_draws);
    for it in 0..burn_in + n_draws {
        let step = adapter.step();
        let outcome = match config.kind {
            KernelKind::Ess => {
                let o = ess_step(target, x, &mut rng)?;
                max_shrinks = max_shrinks.max(o.shrinks);
                Step { value: o.value, accepted: true }
            }
            _ => kernel_step(target, x, config, step, &mut rng)?,
        };
        x = outcome.value;
        if it < burn_in {
            if config.adapt_during_burnin && config.kind != KernelKind::Ess {
                adapter.observe(outcome.accepted);
            }
        } else {
            accepted += outcome.accepted as usize;
            draws.push(x);
        }
    }
    Ok(ScalarChain {
        acceptance_rate: if n_draws > 0 { accepted as f64 / n_draws as f64 } else { 0.0 },
        final_step: adapter.step(),
        max_shrinks,
        draws,
    })
}

/// Reference targets with known distributions.
pub mod targets {
    use super::{GaussianFactor, ScalarTarget};

    /// `N(mean, variance)` with no factorisation.
    #[derive(Debug, Clone, Copy)]
    pub struct Normal {
        pub mean: f64,
        pub variance: f64,
    }

    impl Normal {
        pub fn standard() -> Self {
            Self { mean: 0.0, variance: 1.0 }
        }
    }

    impl ScalarTarget for Normal {
        fn log_density(&self, x: f64) -> f64 {
            GaussianFactor::new(self.mean, self.variance).log_kernel(x)
        }
        fn gradient(&self, x: f64) -> Option<f64> {
            Some(GaussianFactor::new(self.mean, self.variance).log_kernel_gradient(x))
        }
    }

    /// Gaussian likelihood `N(x; m, w)` times a Gaussian prior `N(μ, v)`.
    #[derive(Debug, Clone, Copy)]
    pub struct ConjugateNormal {
        pub likelihood_mean: f64,
        pub likelihood_variance: f64,
        pub prior: GaussianFactor,
    }

    impl ConjugateNormal {
        /// Closed-form posterior `(mean, variance)`.
        pub fn posterior(&self) -> (f64, f64) {
            let precision = 1.0 / self.likelihood_variance + 1.0 / self.prior.variance;
            let mean = (self.likelihood_mean / self.likelihood_variance + self.prior.mean / self.prior.variance)
                / precision;
            (mean, 1.0 / precision)
        }
    }

    impl ScalarTarget for ConjugateNormal {
        fn log_density(&self, x: f64) -> f64 {
            self.log_likelihood(x) + self.prior.log_kernel(x)
        }
        fn gradient(&self, x: f64) -> Option<f64> {
            Some(-(x - self.likelihood_mean) / self.likelihood_variance + self.prior.log_kernel_gradient(x))
        }
        fn gaussian_factor(&self) -> Option<GaussianFactor> {
            Some(self.prior)
        }
        fn log_likelihood(&self, x: f64) -> f64 {
            GaussianFactor::new(self.likelihood_mean, self.likelihood_variance).log_kernel(x)
        }
    }

    /// Constant likelihood under a Gaussian prior; the target is the prior.
    #[derive(Debug, Clone, Copy)]
    pub struct FlatLikelihood {
        pub prior: GaussianFactor,
    }

    impl ScalarTarget for FlatLikelihood {
        fn log_density(&self, x: f64) -> f64 {
            self.prior.log_kernel(x)
        }
        fn gradient(&self, x: f64) -> Option<f64> {
            Some(self.prior.log_kernel_gradient(x))
        }
        fn gaussian_factor(&self) -> Option<GaussianFactor> {
            Some(self.prior)
        }
        fn log_likelihood(&self, _x: f64) -> f64 {
            0.0
        }
    }

    /// Finite mixture of Gaussians `Σ w_k N(μ_k, v_k)`.
    #[derive(Debug, Clone)]
    pub struct GaussianMixture {
        /// `(weight, mean, variance)` per component.
        pub components: Vec<(f64, f64, f64)>,
    }

    impl GaussianMixture {
        fn component_log_terms(&self, x: f64) -> impl Iterator<Item = f64> + '_ {
            self.components.iter().map(move |&(w, m, v)| {
                w.ln() - 0.5 * (2.0 * std::f64::consts::PI * v).ln() - 0.5 * (x - m) * (x - m) / v
            })
        }
    }

    impl ScalarTarget for GaussianMixture {
        fn log_density(&self, x: f64) -> f64 {
            let max = self.component_log_terms(x).fold(f64::NEG_INFINITY, f64::max);
            max + self.component_log_terms(x).map(|t| (t - max).exp()).sum::<f64>().ln()
        }

        fn gradient(&self, x: f64) -> Option<f64> {
            let max = self.component_log_terms(x).fold(f64::NEG_INFINITY, f64::max);
            let (mut num, mut den) = (0.0, 0.0);
            for (t, &(_, m, v)) in self.component_log_terms(x).zip(&self.components) {
                let r = (t - max).exp();
                num += r * (-(x - m) / v);
                den += r;
            }
            Some(num / den)
        }
    }
}
