//! Data and parameter containers for the two-stage hierarchy and the joint
//! log-posterior kernel.
//!
//! Stage 1 (individual): `y_ij = f(t_ij; θ_1i, θ_2i, θ_3i, ζ) + ε_ij`,
//! `ε_ij ~ N(0, σ²)`, where `f` is the log concentration.
//! Stage 2 (population): `θ_li ~ N(α_l, ω_l²)`. Priors: flat on `α_l`,
//! `1/ω_l²` and `1/σ²` (Jeffreys), and `ζ ~ N(0, ρ²)`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::pk_math::{self, ModelParams};

/// Index of a subject-level pharmacokinetic parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PkParam {
    /// θ1 = log CL
    LogClearance = 0,
    /// θ2 = log V
    LogVolume = 1,
    /// θ3 = log k_a
    LogAbsorptionRate = 2,
}

impl PkParam {
    pub const ALL: [PkParam; 3] = [PkParam::LogClearance, PkParam::LogVolume, PkParam::LogAbsorptionRate];

    pub fn index(self) -> usize {
        self as usize
    }

    /// 1-based number used in column names (`theta1`, `alpha2`, ...).
    pub fn number(self) -> usize {
        self as usize + 1
    }

    /// Natural-scale population name for `exp(α_l)`.
    pub fn population_name(self) -> &'static str {
        match self {
            PkParam::LogClearance => "CL_pop",
            PkParam::LogVolume => "V_pop",
            PkParam::LogAbsorptionRate => "ka_pop",
        }
    }
}

/// One subject's dose and log-concentration profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub id: String,
    pub dose: f64,
    pub times: Vec<f64>,
    pub log_conc: Vec<f64>,
}

impl PatientRecord {
    pub fn new(id: impl Into<String>, dose: f64, times: Vec<f64>, log_conc: Vec<f64>) -> Result<Self> {
        let record = Self {
            id: id.into(),
            dose,
            times,
            log_conc,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        let id = &self.id;
        if !(self.dose > 0.0 && self.dose.is_finite()) {
            return Err(Error::InvalidData(format!("patient {id}: dose must be > 0, got {}", self.dose)));
        }
        if self.times.is_empty() {
            return Err(Error::InvalidData(format!("patient {id}: no observations")));
        }
        if self.times.len() != self.log_conc.len() {
            return Err(Error::InvalidData(format!(
                "patient {id}: {} times but {} concentrations",
                self.times.len(),
                self.log_conc.len()
            )));
        }
        if let Some(t) = self.times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidData(format!("patient {id}: observation time {t} is not > 0")));
        }
        if let Some(w) = self.times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidData(format!(
                "patient {id}: times not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(y) = self.log_conc.iter().find(|y| !y.is_finite()) {
            return Err(Error::InvalidData(format!("patient {id}: non-finite log concentration {y}")));
        }
        Ok(())
    }

    pub fn n_obs(&self) -> usize {
        self.times.len()
    }

    /// Log mean curve `f(t_ij)` at every observation time.
    pub fn mean_curve(&self, theta: [f64; 3], zeta: f64) -> Result<Vec<f64>> {
        let params = ModelParams::new(theta, zeta);
        self.times.iter().map(|&t| pk_math::log_mean(&params, self.dose, t)).collect()
    }
}

/// An ordered collection of subjects with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub patients: Vec<PatientRecord>,
}

impl Dataset {
    pub fn new(patients: Vec<PatientRecord>) -> Result<Self> {
        if patients.is_empty() {
            return Err(Error::InvalidData("dataset has no patients".into()));
        }
        let mut seen = HashSet::new();
        for p in &patients {
            p.validate()?;
            if !seen.insert(p.id.as_str()) {
                return Err(Error::InvalidData(format!("duplicate patient id {}", p.id)));
            }
        }
        Ok(Self { patients })
    }

    pub fn n_patients(&self) -> usize {
        self.patients.len()
    }

    /// `Σ_i M_i`.
    pub fn total_observations(&self) -> usize {
        self.patients.iter().map(PatientRecord::n_obs).sum()
    }

    /// Fitting needs at least two subjects for a usable `ω_l²` conditional.
    pub fn validate_for_fit(&self) -> Result<()> {
        if self.n_patients() < 2 {
            return Err(Error::InvalidData(format!(
                "fitting needs at least 2 patients, got {}",
                self.n_patients()
            )));
        }
        Ok(())
    }
}

/// Prior settings. Only the variance of the `ζ` prior is configurable; the
/// flat and Jeffreys priors are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    /// ρ² in `ζ ~ N(0, ρ²)`.
    pub zeta_prior_variance: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self { zeta_prior_variance: 10.0 }
    }
}

impl Priors {
    pub fn new(zeta_prior_variance: f64) -> Result<Self> {
        let p = Self { zeta_prior_variance };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.zeta_prior_variance > 0.0 && self.zeta_prior_variance.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "rho2 must be > 0, got {}",
                self.zeta_prior_variance
            )))
        }
    }
}

/// Every latent quantity at one Gibbs iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    /// Row `i` holds `(θ_1i, θ_2i, θ_3i)`.
    pub theta: Vec<[f64; 3]>,
    pub zeta: f64,
    pub sigma2: f64,
    pub alpha: [f64; 3],
    pub omega2: [f64; 3],
}

impl ChainState {
    pub fn n_patients(&self) -> usize {
        self.theta.len()
    }

    pub fn theta_column(&self, param: PkParam) -> impl Iterator<Item = f64> + '_ {
        self.theta.iter().map(move |row| row[param.index()])
    }

    pub fn model_params(&self, patient: usize) -> ModelParams {
        ModelParams::new(self.theta[patient], self.zeta)
    }

    /// Positivity of the variances and finiteness of every entry.
    pub fn is_valid(&self) -> bool {
        self.sigma2 > 0.0
            && self.omega2.iter().all(|w| *w > 0.0)
            && self.zeta.is_finite()
            && self.sigma2.is_finite()
            && self.alpha.iter().chain(&self.omega2).all(|v| v.is_finite())
            && self.theta.iter().flatten().all(|v| v.is_finite())
    }

    /// `‖θ_l − 1 α_l‖²`.
    pub fn population_ss(&self, param: PkParam) -> f64 {
        let a = self.alpha[param.index()];
        self.theta_column(param).map(|v| (v - a) * (v - a)).sum()
    }
}

/// `Σ_j (y_ij − f_ij)²` for a subject with parameters `theta` and shared `zeta`.
pub fn patient_residual_ss(patient: &PatientRecord, theta: [f64; 3], zeta: f64) -> Result<f64> {
    let params = ModelParams::new(theta, zeta);
    let mut ss = 0.0;
    for (&t, &y) in patient.times.iter().zip(&patient.log_conc) {
        let r = y - pk_math::log_mean(&params, patient.dose, t)?;
        ss += r * r;
    }
    Ok(ss)
}

/// Residual sum of squares for subject `patient` at `state`.
pub fn residual_ss(state: &ChainState, data: &Dataset, patient: usize) -> Result<f64> {
    let record = data
        .patients
        .get(patient)
        .ok_or_else(|| Error::InvalidData(format!("patient index {patient} out of range")))?;
    patient_residual_ss(record, state.theta[patient], state.zeta)
}

/// Residual sum of squares over all subjects.
pub fn total_residual_ss(state: &ChainState, data: &Dataset) -> Result<f64> {
    (0..data.n_patients()).map(|i| residual_ss(state, data, i)).sum()
}

/// Unnormalised joint log posterior, dropping every parameter-free constant.
///
/// Returns `-inf` for states that violate positivity or that the mean
/// function cannot evaluate.
pub fn log_joint(state: &ChainState, data: &Dataset, priors: &Priors) -> f64 {
    if !state.is_valid() || state.n_patients() != data.n_patients() {
        return f64::NEG_INFINITY;
    }
    let ss = match total_residual_ss(state, data) {
        Ok(v) => v,
        Err(_) => return f64::NEG_INFINITY,
    };
    let m_total = data.total_observations() as f64;
    let n = data.n_patients() as f64;

    // Gaussian likelihood with the Jeffreys prior on σ².
    let mut lp = -(0.5 * m_total + 1.0) * state.sigma2.ln() - 0.5 * ss / state.sigma2;
    for param in PkParam::ALL {
        let l = param.index();
        lp += -(0.5 * n + 1.0) * state.omega2[l].ln() - 0.5 * state.population_ss(param) / state.omega2[l];
    }
    lp - 0.5 * state.zeta * state.zeta / priors.zeta_prior_variance
}
