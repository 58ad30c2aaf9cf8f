//! Closed-form one-compartment model with first-order oral absorption.
//!
//! Drug moves from the absorption site into the central compartment at rate
//! `k_a` and is eliminated from it at rate `k_e = CL / V`:
//!
//! ```text
//! dA_a/dt = -k_a A_a                A_a(0) = D
//! dA/dt   =  k_a A_a - k_e A        A(0)   = 0
//! ```
//!
//! with solution `A(t) = D k_a / (k_a - k_e) (e^{-k_e t} - e^{-k_a t})`. The
//! observed plasma concentration is `C(t) = F A(t) / V`.
//!
//! All evaluations go through the factorisation
//! `e^{-k_min t} (1 - e^{-|k_a - k_e| t}) / |k_a - k_e|`, which is positive and
//! free of cancellation for either ordering of the rates. When the two rates
//! agree to within [`RATE_MERGE_RTOL`] the removable singularity is replaced by
//! its limit `t e^{-k_a t}`.

use crate::error::{Error, Result};

/// Relative rate gap below which `k_a` and `k_e` are treated as equal.
pub const RATE_MERGE_RTOL: f64 = 1e-8;

/// Constant in the half-life relation `t_1/2 = 0.693 V / CL`.
pub const HALF_LIFE_FACTOR: f64 = 0.693;

/// Pharmacokinetic parameters on their natural scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalParams {
    /// CL, volume per time (L/hr).
    pub clearance: f64,
    /// V, volume of distribution (L).
    pub volume: f64,
    /// k_a, first-order absorption rate (1/hr).
    pub absorption_rate: f64,
    /// F, fraction of the dose reaching circulation.
    pub bioavailability: f64,
}

impl NaturalParams {
    pub fn new(clearance: f64, volume: f64, absorption_rate: f64, bioavailability: f64) -> Result<Self> {
        let params = Self {
            clearance,
            volume,
            absorption_rate,
            bioavailability,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        positive("clearance", self.clearance)?;
        positive("volume", self.volume)?;
        positive("absorption_rate", self.absorption_rate)?;
        if !(0.0..=1.0).contains(&self.bioavailability) {
            return Err(Error::domain("bioavailability", self.bioavailability));
        }
        let ke = self.elimination_rate();
        if !(ke.is_finite() && ke > 0.0) {
            return Err(Error::domain("elimination_rate", ke));
        }
        Ok(())
    }

    /// `k_e = CL / V`.
    pub fn elimination_rate(&self) -> f64 {
        self.clearance / self.volume
    }

    pub fn half_life(&self) -> Result<f64> {
        half_life(self.clearance, self.volume)
    }

    pub fn to_model(&self) -> ModelParams {
        ModelParams {
            log_clearance: self.clearance.ln(),
            log_volume: self.volume.ln(),
            log_absorption_rate: self.absorption_rate.ln(),
            logit_bioavailability: logit(self.bioavailability),
        }
    }
}

/// Unconstrained parameterisation used by the sampler:
/// `(log CL, log V, log k_a, logit F)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub log_clearance: f64,
    pub log_volume: f64,
    pub log_absorption_rate: f64,
    pub logit_bioavailability: f64,
}

impl ModelParams {
    pub fn new(theta: [f64; 3], zeta: f64) -> Self {
        Self {
            log_clearance: theta[0],
            log_volume: theta[1],
            log_absorption_rate: theta[2],
            logit_bioavailability: zeta,
        }
    }

    pub fn to_natural(&self) -> NaturalParams {
        NaturalParams {
            clearance: self.log_clearance.exp(),
            volume: self.log_volume.exp(),
            absorption_rate: self.log_absorption_rate.exp(),
            bioavailability: logistic(self.logit_bioavailability),
        }
    }

    /// `log k_e = log CL - log V`.
    pub fn log_elimination_rate(&self) -> f64 {
        self.log_clearance - self.log_volume
    }
}

/// Inverse logit, `e^x / (1 + e^x)`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `log(e^x / (1 + e^x))` without overflow.
pub fn log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn positive(quantity: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(quantity, value))
    }
}

fn check_time(t: f64) -> Result<()> {
    // +inf is accepted: every amount has a well-defined limit there.
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain("time", t))
    }
}

fn check_dose(dose: f64) -> Result<()> {
    if dose >= 0.0 && dose.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("dose", dose))
    }
}

/// Amount remaining at the absorption site, `D e^{-k_a t}`.
pub fn amount_absorption_site(dose: f64, absorption_rate: f64, t: f64) -> Result<f64> {
    check_dose(dose)?;
    positive("absorption_rate", absorption_rate)?;
    check_time(t)?;
    Ok(dose * (-absorption_rate * t).exp())
}

/// Amount in the central compartment at time `t`.
pub fn amount_central(dose: f64, absorption_rate: f64, elimination_rate: f64, t: f64) -> Result<f64> {
    check_dose(dose)?;
    positive("absorption_rate", absorption_rate)?;
    positive("elimination_rate", elimination_rate)?;
    check_time(t)?;
    if t.is_infinite() {
        return Ok(0.0);
    }
    Ok(dose * absorption_rate * transfer_kernel(absorption_rate, elimination_rate, t))
}

/// `(e^{-k_e t} - e^{-k_a t}) / (k_a - k_e)`, with the `k_a = k_e` limit `t e^{-k_a t}`.
fn transfer_kernel(ka: f64, ke: f64, t: f64) -> f64 {
    let hi = ka.max(ke);
    let lo = ka.min(ke);
    let gap = hi - lo;
    if gap <= RATE_MERGE_RTOL * hi {
        t * (-ka * t).exp()
    } else {
        (-lo * t).exp() * (-(-gap * t).exp_m1()) / gap
    }
}

/// Plasma concentration `F D k_a / (V (k_a - k_e)) (e^{-k_e t} - e^{-k_a t})`.
pub fn concentration(params: &NaturalParams, dose: f64, t: f64) -> Result<f64> {
    params.validate()?;
    let amount = amount_central(dose, params.absorption_rate, params.elimination_rate(), t)?;
    Ok(params.bioavailability * amount / params.volume)
}

/// `t_1/2 = 0.693 V / CL`.
pub fn half_life(clearance: f64, volume: f64) -> Result<f64> {
    positive("clearance", clearance)?;
    positive("volume", volume)?;
    Ok(HALF_LIFE_FACTOR * volume / clearance)
}

fn check_log_inputs(dose: f64, t: f64) -> Result<()> {
    if !(dose > 0.0 && dose.is_finite()) {
        return Err(Error::domain("dose", dose));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain("time", t));
    }
    Ok(())
}

/// Rate geometry shared by the value and the gradient of the log mean.
struct RateGap {
    ka: f64,
    ke: f64,
    k_min: f64,
    /// `|k_a - k_e| t`; zero on the merged branch.
    scaled_gap: f64,
    log_gap: f64,
    merged: bool,
}

impl RateGap {
    fn new(log_ka: f64, log_ke: f64, t: f64) -> Self {
        let (l_hi, l_lo) = if log_ka >= log_ke { (log_ka, log_ke) } else { (log_ke, log_ka) };
        // (k_hi - k_lo) / k_hi
        let rel_gap = -(l_lo - l_hi).exp_m1();
        let merged = rel_gap <= RATE_MERGE_RTOL;
        let log_gap = l_hi + rel_gap.ln();
        Self {
            ka: log_ka.exp(),
            ke: log_ke.exp(),
            k_min: l_lo.exp(),
            scaled_gap: if merged { 0.0 } else { log_gap.exp() * t },
            log_gap,
            merged,
        }
    }

    /// `log[(e^{-k_e t} - e^{-k_a t}) / (k_a - k_e)]`.
    fn log_kernel(&self, t: f64) -> f64 {
        if self.merged {
            t.ln() - self.ka * t
        } else {
            -self.k_min * t + (-(-self.scaled_gap).exp_m1()).ln() - self.log_gap
        }
    }

    /// Partial derivatives of the log kernel with respect to `(k_e, k_a)`.
    fn log_kernel_rate_partials(&self, t: f64) -> (f64, f64) {
        let x = self.scaled_gap;
        let (lo_side, hi_side) = (t * slow_rate_factor(x), t * fast_rate_factor(x));
        if self.ka > self.ke {
            (lo_side, hi_side)
        } else {
            (hi_side, lo_side)
        }
    }
}

/// `1/expm1(x) - 1/x`: sensitivity factor of the faster rate.
fn fast_rate_factor(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        -0.5 + x * (1.0 / 12.0 - x2 * (1.0 / 720.0 - x2 / 30240.0))
    } else {
        1.0 / x.exp_m1() - 1.0 / x
    }
}

/// `1/x - 1/(1 - e^{-x})`: sensitivity factor of the slower rate.
fn slow_rate_factor(x: f64) -> f64 {
    fast_rate_factor(-x)
}

/// Log plasma concentration `f(t; θ1, θ2, θ3, ζ) = log C(t)`.
pub fn log_mean(params: &ModelParams, dose: f64, t: f64) -> Result<f64> {
    check_log_inputs(dose, t)?;
    let gap = RateGap::new(params.log_absorption_rate, params.log_elimination_rate(), t);
    Ok(log_mean_unchecked(params, dose, t, &gap))
}

fn log_mean_unchecked(params: &ModelParams, dose: f64, t: f64, gap: &RateGap) -> f64 {
    log_logistic(params.logit_bioavailability) + dose.ln() + params.log_absorption_rate
        - params.log_volume
        + gap.log_kernel(t)
}

/// Gradient of [`log_mean`] with respect to `(θ1, θ2, θ3, ζ)`.
pub fn grad_log_mean(params: &ModelParams, dose: f64, t: f64) -> Result<[f64; 4]> {
    log_mean_with_gradient(params, dose, t).map(|(_, g)| g)
}

/// [`log_mean`] and its gradient from a single pass over the rate geometry.
pub fn log_mean_with_gradient(params: &ModelParams, dose: f64, t: f64) -> Result<(f64, [f64; 4])> {
    check_log_inputs(dose, t)?;
    let gap = RateGap::new(params.log_absorption_rate, params.log_elimination_rate(), t);
    let value = log_mean_unchecked(params, dose, t, &gap);
    let (d_ke, d_ka) = gap.log_kernel_rate_partials(t);
    let elim = gap.ke * d_ke;
    let grad = [
        elim,
        -1.0 - elim,
        1.0 + gap.ka * d_ka,
        logistic(-params.logit_bioavailability),
    ];
    Ok((value, grad))
}
