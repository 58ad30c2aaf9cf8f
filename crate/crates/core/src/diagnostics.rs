//! Posterior summaries and chain-quality statistics.

use crate::error::{Error, Result};
use crate::gibbs::{Draw, PosteriorDraws};
use crate::model::{ChainState, PkParam};
use crate::pk_math::{self, ModelParams};

/// Fewest draws [`summarize`] accepts.
pub const MIN_SUMMARY_DRAWS: usize = 10;
/// Autocorrelation cut-off for the ESS sum.
pub const ACF_TRUNCATION: f64 = 0.05;
/// Number of lags reported in [`ParameterSummary::autocorrelation`].
pub const REPORTED_LAGS: usize = 40;

/// Monotone map from the sampler scale to the natural scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Exp,
    Logistic,
}

impl Transform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Exp => x.exp(),
            Transform::Logistic => pk_math::logistic(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSummary {
    pub name: String,
    pub mean: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    /// Lags `0..=L`.
    pub autocorrelation: Vec<f64>,
    pub effective_sample_size: f64,
    pub natural_scale: Option<NaturalSummary>,
}

/// Quantile of sorted data by linear interpolation of order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let k = (h.floor() as usize).min(n - 2);
    let w = h - k as f64;
    sorted[k] + w * (sorted[k + 1] - sorted[k])
}

fn mean_and_centered(x: &[f64]) -> (f64, Vec<f64>) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    (mean, x.iter().map(|v| v - mean).collect())
}

fn lag_autocovariance(centered: &[f64], lag: usize) -> f64 {
    centered.iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / centered.len() as f64
}

/// Sample autocorrelations for lags `0..=max_lag`. A constant series reports `[1]`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let (_, c) = mean_and_centered(x);
    let c0 = lag_autocovariance(&c, 0);
    if !(c0 > 0.0) {
        return vec![1.0];
    }
    let max_lag = max_lag.min(x.len().saturating_sub(1));
    (0..=max_lag).map(|k| lag_autocovariance(&c, k) / c0).collect()
}

/// Single-chain effective sample size `n / (1 + 2 Σ ρ_k)`.
///
/// The sum stops before the first lag with `ρ_k ≤ 0.05`, before a lag whose
/// pair sum `ρ_k + ρ_{k+1}` is negative, or at `n/4` lags. The result is
/// clipped to `[1, n]`.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return n as f64;
    }
    let (_, c) = mean_and_centered(x);
    let c0 = lag_autocovariance(&c, 0);
    if !(c0 > 0.0) {
        return 1.0;
    }
    let max_lag = n / 4;
    let rho = |k: usize| lag_autocovariance(&c, k) / c0;
    let mut sum = 0.0;
    let mut k = 1;
    let mut next = if max_lag >= 1 { rho(1) } else { 0.0 };
    while k <= max_lag {
        let current = next;
        if current <= ACF_TRUNCATION {
            break;
        }
        next = if k < max_lag { rho(k + 1) } else { 0.0 };
        if current + next < 0.0 {
            break;
        }
        sum += current;
        k += 1;
    }
    (n as f64 / (1.0 + 2.0 * sum)).clamp(1.0, n as f64)
}

/// Summary of one trace, optionally with a back-transformed natural-scale view.
pub fn summarize_trace(name: &str, values: &[f64], natural: Option<(&str, Transform)>) -> Result<ParameterSummary> {
    if values.len() < MIN_SUMMARY_DRAWS {
        return Err(Error::InvalidData(format!(
            "summaries need at least {MIN_SUMMARY_DRAWS} draws, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (q025, q50, q975) = (
        quantile_sorted(&sorted, 0.025),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.975),
    );
    let natural_scale = natural.map(|(natural_name, tr)| NaturalSummary {
        name: natural_name.to_string(),
        mean: values.iter().map(|v| tr.apply(*v)).sum::<f64>() / n,
        q025: tr.apply(q025),
        q50: tr.apply(q50),
        q975: tr.apply(q975),
    });
    Ok(ParameterSummary {
        name: name.to_string(),
        mean,
        sd,
        q025,
        q50,
        q975,
        autocorrelation: autocorrelation(values, REPORTED_LAGS),
        effective_sample_size: effective_sample_size(values),
        natural_scale,
    })
}

type Extractor = fn(&ChainState) -> f64;
/// Summary name, value extractor, optional natural-scale name and transform.
pub type SummarySpec = (&'static str, Extractor, Option<(&'static str, Transform)>);

/// Population-level parameters in reporting order.
pub fn summary_parameters() -> Vec<SummarySpec> {
    vec![
        ("alpha1", |s| s.alpha[0], Some((PkParam::LogClearance.population_name(), Transform::Exp))),
        ("alpha2", |s| s.alpha[1], Some((PkParam::LogVolume.population_name(), Transform::Exp))),
        ("alpha3", |s| s.alpha[2], Some((PkParam::LogAbsorptionRate.population_name(), Transform::Exp))),
        ("omega2_1", |s| s.omega2[0], None),
        ("omega2_2", |s| s.omega2[1], None),
        ("omega2_3", |s| s.omega2[2], None),
        ("sigma2", |s| s.sigma2, None),
        ("zeta", |s| s.zeta, Some(("F", Transform::Logistic))),
    ]
}

/// Summaries of `α_1..3`, `ω²_1..3`, `σ²`, `ζ`, with `CL_pop`, `V_pop`,
/// `ka_pop` and `F` as natural-scale views.
pub fn summarize(draws: &PosteriorDraws) -> Result<Vec<ParameterSummary>> {
    summarize_draws(&draws.draws)
}

/// [`summarize`] over bare retained draws, e.g. read back from disk.
pub fn summarize_draws(draws: &[Draw]) -> Result<Vec<ParameterSummary>> {
    summary_parameters()
        .into_iter()
        .map(|(name, f, natural)| {
            let trace: Vec<f64> = draws.iter().map(|d| f(&d.state)).collect();
            summarize_trace(name, &trace, natural)
        })
        .collect()
}

/// Curve whose uncertainty a band describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandLevel {
    /// Subject `i`'s own `θ_i` draws.
    Patient(usize),
    /// The population curve at `θ = α`.
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub time: f64,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// Pointwise 2.5/50/97.5% quantiles of the concentration curve `exp(f(t))`
/// over the posterior draws.
pub fn predictive_band(draws: &PosteriorDraws, level: BandLevel, dose: f64, times: &[f64]) -> Result<Vec<BandPoint>> {
    band_from_states(draws.draws.iter().map(|d| &d.state), level, dose, times)
}

/// [`predictive_band`] over any collection of states.
pub fn band_from_states<'a>(
    states: impl Iterator<Item = &'a ChainState>,
    level: BandLevel,
    dose: f64,
    times: &[f64],
) -> Result<Vec<BandPoint>> {
    let params: Vec<ModelParams> = states
        .map(|s| match level {
            BandLevel::Patient(i) => s
                .theta
                .get(i)
                .map(|row| ModelParams::new(*row, s.zeta))
                .ok_or_else(|| Error::InvalidData(format!("patient index {i} out of range"))),
            BandLevel::Population => Ok(ModelParams::new(s.alpha, s.zeta)),
        })
        .collect::<Result<_>>()?;
    if params.is_empty() {
        return Err(Error::InvalidData("predictive band needs at least one draw".into()));
    }
    times
        .iter()
        .map(|&t| {
            let mut c: Vec<f64> = params
                .iter()
                .map(|p| pk_math::concentration(&p.to_natural(), dose, t))
                .collect::<Result<_>>()?;
            c.sort_by(f64::total_cmp);
            Ok(BandPoint {
                time: t,
                lower: quantile_sorted(&c, 0.025),
                median: quantile_sorted(&c, 0.5),
                upper: quantile_sorted(&c, 0.975),
            })
        })
        .collect()
}

/// Gelman–Rubin potential scale reduction across independent equal-length runs.
pub fn rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::InvalidData("R-hat needs at least two chains".into()));
    }
    let n = chains[0].len();
    if n < 2 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidData("R-hat needs equal-length chains of at least 2 draws".into()));
    }
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let grand = means.iter().sum::<f64>() / m as f64;
    let between = n as f64 / (m - 1) as f64 * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / m as f64;
    let pooled = (n - 1) as f64 / n as f64 * within + between / n as f64;
    Ok((pooled / within).sqrt())
}
