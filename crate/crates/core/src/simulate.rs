//! Synthetic data from the generative model.
//!
//! Subject parameters are drawn as `θ_li = α_l + η_li`, `η_li ~ N(0, ω_l²)`,
//! and observations as `y_ij = f(t_ij; θ_i, ζ) + ε_ij`, `ε_ij ~ N(0, σ²)`,
//! directly on the log scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{Dataset, PatientRecord};
use crate::pk_math::{self, ModelParams};

/// Sampling times of the reference design (hr).
pub const REFERENCE_TIMES: [f64; 10] = [0.25, 0.5, 1.0, 2.0, 3.5, 5.0, 7.0, 9.0, 12.0, 24.0];
pub const REFERENCE_DOSE: f64 = 320.0;
pub const REFERENCE_PATIENTS: usize = 12;
/// Population `(CL, V, k_a)` of the reference scenario.
pub const REFERENCE_POPULATION: [f64; 3] = [2.79, 31.61, 1.38];
pub const REFERENCE_BIOAVAILABILITY: f64 = 0.8;
/// Between-subject variances of `(log CL, log V, log k_a)`.
pub const REFERENCE_OMEGA2: [f64; 3] = [0.09, 0.02, 0.25];
pub const REFERENCE_SIGMA: f64 = 0.1;

/// Population truth plus the sampling design.
///
/// `doses` and `design_times` hold either one entry per subject or a single
/// entry shared by every subject.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthSpec {
    pub alpha: [f64; 3],
    pub omega2: [f64; 3],
    pub zeta: f64,
    pub sigma2: f64,
    pub doses: Vec<f64>,
    pub design_times: Vec<Vec<f64>>,
}

impl TruthSpec {
    /// Theophylline-scale scenario: `CL = 2.79`, `V = 31.61`, `k_a = 1.38`,
    /// `F = 0.8`, 320 mg, ten samples over 24 h, `σ = 0.1`.
    pub fn reference() -> Self {
        Self {
            alpha: REFERENCE_POPULATION.map(f64::ln),
            omega2: REFERENCE_OMEGA2,
            zeta: pk_math::logit(REFERENCE_BIOAVAILABILITY),
            sigma2: REFERENCE_SIGMA * REFERENCE_SIGMA,
            doses: vec![REFERENCE_DOSE],
            design_times: vec![REFERENCE_TIMES.to_vec()],
        }
    }

    pub fn validate(&self, n_patients: usize) -> Result<()> {
        if self.omega2.iter().chain([&self.sigma2]).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig("variances must be finite and >= 0".into()));
        }
        if self.alpha.iter().chain([&self.zeta]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("alpha and zeta must be finite".into()));
        }
        for (what, len) in [("doses", self.doses.len()), ("design_times", self.design_times.len())] {
            if len != 1 && len != n_patients {
                return Err(Error::InvalidConfig(format!(
                    "{what} must have 1 or {n_patients} entries, got {len}"
                )));
            }
        }
        if self.doses.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidConfig("doses must be > 0".into()));
        }
        for times in &self.design_times {
            if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidConfig(
                    "design times must be non-empty, > 0 and strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    fn dose(&self, i: usize) -> f64 {
        self.doses[if self.doses.len() == 1 { 0 } else { i }]
    }

    fn times(&self, i: usize) -> &[f64] {
        &self.design_times[if self.design_times.len() == 1 { 0 } else { i }]
    }
}

/// Observables together with the latent subject parameters that produced them.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub dataset: Dataset,
    pub theta: Vec<[f64; 3]>,
}

/// Subject ids used by the simulator: `"1"`, `"2"`, ...
pub fn patient_id(i: usize) -> String {
    (i + 1).to_string()
}

/// Draw `n_patients` subjects and their noisy log concentrations.
pub fn simulate_dataset(truth: &TruthSpec, n_patients: usize, seed: u64) -> Result<SimulatedData> {
    if n_patients < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 patients, got {n_patients}")));
    }
    truth.validate(n_patients)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = Vec::with_capacity(n_patients);
    for _ in 0..n_patients {
        let mut row = [0.0; 3];
        for (l, v) in row.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *v = truth.alpha[l] + truth.omega2[l].sqrt() * z;
        }
        theta.push(row);
    }
    let mut patients = Vec::with_capacity(n_patients);
    for (i, row) in theta.iter().enumerate() {
        let params = ModelParams::new(*row, truth.zeta);
        let dose = truth.dose(i);
        let times = truth.times(i).to_vec();
        let mut y = Vec::with_capacity(times.len());
        for &t in &times {
            let z: f64 = rng.sample(StandardNormal);
            y.push(pk_math::log_mean(&params, dose, t)? + truth.sigma2.sqrt() * z);
        }
        patients.push(PatientRecord::new(patient_id(i), dose, times, y)?);
    }
    Ok(SimulatedData {
        dataset: Dataset::new(patients)?,
        theta,
    })
}
