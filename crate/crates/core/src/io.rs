//! On-disk formats: dataset, draws, summary and band CSVs, and the flat
//! `key=value` run and truth configs.
//!
//! Floats are written in their shortest round-trip representation, so a
//! write followed by a read reproduces every value exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::diagnostics::{BandPoint, ParameterSummary};
use crate::error::{Error, Result};
use crate::gibbs::{Draw, PosteriorDraws, SamplerConfig};
use crate::kernels::{KernelConfig, KernelKind};
use crate::model::{ChainState, Dataset, PatientRecord, PkParam, Priors};
use crate::simulate::{self, TruthSpec};

pub const DATASET_HEADER: [&str; 4] = ["patient_id", "dose_mg", "time_hr", "conc"];
pub const SUMMARY_HEADER: [&str; 12] = [
    "parameter",
    "mean",
    "sd",
    "q2.5",
    "q50",
    "q97.5",
    "ess",
    "natural_name",
    "natural_mean",
    "natural_q2.5",
    "natural_q50",
    "natural_q97.5",
];
pub const BAND_HEADER: [&str; 4] = ["time_hr", "conc_q2.5", "conc_q50", "conc_q97.5"];
const TAIL_COLUMNS: [&str; 8] = [
    "zeta", "sigma2", "alpha1", "alpha2", "alpha3", "omega2_1", "omega2_2", "omega2_3",
];

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn parse_f64(field: &str, what: &str, row: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidData(format!("row {row}: cannot parse {what} `{field}`")))
}

/// Dataset rows parsed from CSV, plus one warning per dropped row.
#[derive(Debug, Clone)]
pub struct DatasetImport {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

/// Parse the `patient_id,dose_mg,time_hr,conc` format.
///
/// Concentrations are natural-scale and are log-transformed here. Rows with
/// `time_hr <= 0` or `conc <= 0` are dropped with a warning. Rows of one
/// subject may appear in any order; subjects keep their first-appearance
/// order.
pub fn parse_dataset_csv<R: Read>(reader: R) -> Result<DatasetImport> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != DATASET_HEADER {
        return Err(Error::InvalidData(format!(
            "dataset header must be `{}`, got `{}`",
            DATASET_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, (f64, Vec<(f64, f64)>)> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        // Line 1 is the header.
        let line = k + 2;
        let record = record.map_err(|e| Error::InvalidData(format!("row {line}: {e}")))?;
        if record.len() != 4 {
            return Err(Error::InvalidData(format!("row {line}: expected 4 fields, got {}", record.len())));
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(Error::InvalidData(format!("row {line}: empty patient_id")));
        }
        let dose = parse_f64(&record[1], "dose_mg", line)?;
        let t = parse_f64(&record[2], "time_hr", line)?;
        let c = parse_f64(&record[3], "conc", line)?;
        if !(dose > 0.0 && dose.is_finite()) {
            return Err(Error::InvalidData(format!("row {line}: dose_mg must be > 0, got {dose}")));
        }
        let entry = rows.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            (dose, Vec::new())
        });
        if entry.0 != dose {
            return Err(Error::InvalidData(format!(
                "row {line}: patient {id} has conflicting doses {} and {dose}",
                entry.0
            )));
        }
        if !(t > 0.0) || !(c > 0.0) {
            warnings.push(format!(
                "row {line}: dropped observation for patient {id} (time_hr={t}, conc={c}); \
                 the log-scale model needs time > 0 and conc > 0"
            ));
            continue;
        }
        if !t.is_finite() || !c.is_finite() {
            return Err(Error::InvalidData(format!("row {line}: non-finite time or concentration")));
        }
        entry.1.push((t, c.ln()));
    }
    let mut patients = Vec::with_capacity(order.len());
    for id in order {
        let (dose, mut obs) = rows.remove(&id).expect("every ordered id has rows");
        if obs.is_empty() {
            return Err(Error::InvalidData(format!(
                "patient {id} has no usable observations after dropping invalid rows"
            )));
        }
        obs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = obs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidData(format!("patient {id} has two observations at time {}", w[0].0)));
        }
        let (times, log_conc) = obs.into_iter().unzip();
        patients.push(PatientRecord::new(id, dose, times, log_conc)?);
    }
    Ok(DatasetImport {
        dataset: Dataset::new(patients)?,
        warnings,
    })
}

pub fn read_dataset_csv(path: &Path) -> Result<DatasetImport> {
    let file = fs::File::open(path).map_err(|e| Error::InvalidData(format!("cannot read {}: {e}", path.display())))?;
    parse_dataset_csv(file)
}

pub fn write_dataset_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DATASET_HEADER)?;
    for p in &dataset.patients {
        for (&t, &y) in p.times.iter().zip(&p.log_conc) {
            w.write_record([p.id.clone(), fmt_f64(p.dose), fmt_f64(t), fmt_f64(y.exp())])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Column names of `draws.csv` for the given subjects.
pub fn draws_header(patient_ids: &[String]) -> Vec<String> {
    let mut h = vec!["iteration".to_string()];
    for param in PkParam::ALL {
        for id in patient_ids {
            h.push(format!("theta{}_{id}", param.number()));
        }
    }
    h.extend(TAIL_COLUMNS.iter().map(|s| s.to_string()));
    h
}

pub fn write_draws_csv<W: Write>(patient_ids: &[String], draws: &[Draw], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(draws_header(patient_ids))?;
    for d in draws {
        let s = &d.state;
        let mut row = Vec::with_capacity(1 + 3 * patient_ids.len() + TAIL_COLUMNS.len());
        row.push(d.iteration.to_string());
        for l in 0..3 {
            row.extend(s.theta.iter().map(|r| fmt_f64(r[l])));
        }
        row.push(fmt_f64(s.zeta));
        row.push(fmt_f64(s.sigma2));
        row.extend(s.alpha.iter().map(|v| fmt_f64(*v)));
        row.extend(s.omega2.iter().map(|v| fmt_f64(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Retained draws read back from `draws.csv`.
#[derive(Debug, Clone)]
pub struct DrawsTable {
    pub patient_ids: Vec<String>,
    pub draws: Vec<Draw>,
}

pub fn parse_draws_csv<R: Read>(reader: R) -> Result<DrawsTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let schema_err = |msg: String| Error::InvalidData(format!("draws schema mismatch: {msg}"));
    if header.first().map(String::as_str) != Some("iteration") {
        return Err(schema_err("first column must be `iteration`".into()));
    }
    let n_theta = header.len().saturating_sub(1 + TAIL_COLUMNS.len());
    if n_theta == 0 || !n_theta.is_multiple_of(3) {
        return Err(schema_err(format!("unexpected column count {}", header.len())));
    }
    let n = n_theta / 3;
    let patient_ids: Vec<String> = header[1..=n]
        .iter()
        .map(|c| c.strip_prefix("theta1_").map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| schema_err("expected theta1_<id> columns".into()))?;
    if header != draws_header(&patient_ids) {
        return Err(schema_err("columns do not follow iteration, theta1..3_<id>, zeta, sigma2, alpha1..3, omega2_1..3".into()));
    }
    let mut draws = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::InvalidData(format!("row {line}: {e}")))?;
        if record.len() != header.len() {
            return Err(Error::InvalidData(format!("row {line}: expected {} fields", header.len())));
        }
        let iteration = record[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidData(format!("row {line}: bad iteration `{}`", &record[0])))?;
        let v: Vec<f64> = record
            .iter()
            .skip(1)
            .zip(header.iter().skip(1))
            .map(|(f, name)| parse_f64(f, name, line))
            .collect::<Result<_>>()?;
        let theta = (0..n).map(|i| [v[i], v[n + i], v[2 * n + i]]).collect();
        let t = &v[3 * n..];
        draws.push(Draw {
            iteration,
            state: ChainState {
                theta,
                zeta: t[0],
                sigma2: t[1],
                alpha: [t[2], t[3], t[4]],
                omega2: [t[5], t[6], t[7]],
            },
        });
    }
    Ok(DrawsTable { patient_ids, draws })
}

pub fn read_draws_csv(path: &Path) -> Result<DrawsTable> {
    let file = fs::File::open(path).map_err(|e| Error::InvalidData(format!("cannot read {}: {e}", path.display())))?;
    parse_draws_csv(file)
}

pub fn write_summary_csv<W: Write>(summaries: &[ParameterSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        let mut row = vec![
            s.name.clone(),
            fmt_f64(s.mean),
            fmt_f64(s.sd),
            fmt_f64(s.q025),
            fmt_f64(s.q50),
            fmt_f64(s.q975),
            fmt_f64(s.effective_sample_size),
        ];
        match &s.natural_scale {
            Some(n) => row.extend([n.name.clone(), fmt_f64(n.mean), fmt_f64(n.q025), fmt_f64(n.q50), fmt_f64(n.q975)]),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_band_csv<W: Write>(band: &[BandPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BAND_HEADER)?;
    for b in band {
        w.write_record([fmt_f64(b.time), fmt_f64(b.lower), fmt_f64(b.median), fmt_f64(b.upper)])?;
    }
    w.flush()?;
    Ok(())
}

/// Lines of a `key=value` file with `#` comments and blank lines removed.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value, got `{raw}`", k + 1)))?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::InvalidConfig(format!("line {}: duplicate key `{key}`", k + 1)));
        }
    }
    Ok(map)
}

fn take<T: std::str::FromStr>(map: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::InvalidConfig(format!("cannot parse `{key}` value `{v}`"))),
    }
}

fn reject_unknown(map: BTreeMap<String, String>) -> Result<()> {
    match map.keys().next() {
        Some(k) => Err(Error::InvalidConfig(format!("unknown key `{k}`"))),
        None => Ok(()),
    }
}

/// A parsed run config: everything `fit` needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sampler: SamplerConfig,
    pub priors: Priors,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::new(DEFAULT_ITERATIONS, DEFAULT_BURN_IN),
            priors: Priors::default(),
        }
    }
}

pub const DEFAULT_ITERATIONS: usize = 20_000;
pub const DEFAULT_BURN_IN: usize = 10_000;
pub const DEFAULT_THETA_STEP: f64 = 0.1;
pub const DEFAULT_ZETA_STEP: f64 = 0.1;

/// Parse a run config. Keys: `iterations`, `burn_in`, `thin`, `seed`,
/// `theta_kernel`, `theta_step`, `zeta_kernel`, `zeta_step`, `rho2`,
/// `parallel`, `adapt`. Missing keys take defaults; unknown keys are errors.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut map = parse_key_values(text)?;
    let iterations = take(&mut map, "iterations")?.unwrap_or(DEFAULT_ITERATIONS);
    let burn_in = take(&mut map, "burn_in")?.unwrap_or(DEFAULT_BURN_IN.min(iterations / 2));
    let mut sampler = SamplerConfig::new(iterations, burn_in);
    sampler.thin = take(&mut map, "thin")?.unwrap_or(1);
    sampler.seed = take(&mut map, "seed")?.unwrap_or(0);
    let theta_kind: KernelKind = take(&mut map, "theta_kernel")?.unwrap_or(KernelKind::Metropolis);
    let theta_step = take(&mut map, "theta_step")?.unwrap_or(DEFAULT_THETA_STEP);
    let zeta_kind: KernelKind = take(&mut map, "zeta_kernel")?.unwrap_or(KernelKind::Ess);
    let zeta_step = take(&mut map, "zeta_step")?.unwrap_or(DEFAULT_ZETA_STEP);
    let adapt = take(&mut map, "adapt")?.unwrap_or(true);
    sampler.theta_kernel = KernelConfig::new(theta_kind, theta_step);
    sampler.zeta_kernel = KernelConfig::new(zeta_kind, zeta_step);
    sampler.theta_kernel.adapt_during_burnin = adapt;
    sampler.zeta_kernel.adapt_during_burnin = adapt;
    sampler.parallel_patients = take(&mut map, "parallel")?.unwrap_or(false);
    let priors = Priors::new(take(&mut map, "rho2")?.unwrap_or(Priors::default().zeta_prior_variance))?;
    reject_unknown(map)?;
    sampler.validate()?;
    Ok(RunConfig { sampler, priors })
}

pub fn render_run_config(config: &RunConfig) -> String {
    let s = &config.sampler;
    format!(
        "iterations={}\nburn_in={}\nthin={}\nseed={}\ntheta_kernel={}\ntheta_step={}\nzeta_kernel={}\nzeta_step={}\nrho2={}\nparallel={}\nadapt={}\n",
        s.n_iterations,
        s.burn_in,
        s.thin,
        s.seed,
        s.theta_kernel.kind,
        fmt_f64(s.theta_kernel.step),
        s.zeta_kernel.kind,
        fmt_f64(s.zeta_kernel.step),
        fmt_f64(config.priors.zeta_prior_variance),
        s.parallel_patients,
        s.theta_kernel.adapt_during_burnin,
    )
}

/// Simulation request: truth, number of subjects and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthConfig {
    pub truth: TruthSpec,
    pub n_patients: usize,
    pub seed: u64,
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse `{key}` entry `{x}`")))
        })
        .collect()
}

/// Parse a truth config. Keys (natural scale, all optional, defaulting to the
/// reference scenario): `patients`, `seed`, `clearance`, `volume`,
/// `absorption_rate`, `bioavailability`, `omega2_clearance`, `omega2_volume`,
/// `omega2_absorption`, `sigma2`, `dose`, `times` (comma-separated).
pub fn parse_truth_config(text: &str) -> Result<TruthConfig> {
    let mut map = parse_key_values(text)?;
    let mut truth = TruthSpec::reference();
    let n_patients = take(&mut map, "patients")?.unwrap_or(simulate::REFERENCE_PATIENTS);
    let seed = take(&mut map, "seed")?.unwrap_or(0);
    for (key, l) in [("clearance", 0), ("volume", 1), ("absorption_rate", 2)] {
        if let Some(v) = take::<f64>(&mut map, key)? {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("`{key}` must be > 0")));
            }
            truth.alpha[l] = v.ln();
        }
    }
    for (key, l) in [("omega2_clearance", 0), ("omega2_volume", 1), ("omega2_absorption", 2)] {
        if let Some(v) = take(&mut map, key)? {
            truth.omega2[l] = v;
        }
    }
    if let Some(f) = take::<f64>(&mut map, "bioavailability")? {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidConfig("`bioavailability` must lie in (0, 1)".into()));
        }
        truth.zeta = crate::pk_math::logit(f);
    }
    if let Some(v) = take(&mut map, "sigma2")? {
        truth.sigma2 = v;
    }
    if let Some(v) = map.remove("dose") {
        truth.doses = parse_list("dose", &v)?;
    }
    if let Some(v) = map.remove("times") {
        truth.design_times = vec![parse_list("times", &v)?];
    }
    reject_unknown(map)?;
    truth.validate(n_patients)?;
    Ok(TruthConfig { truth, n_patients, seed })
}

/// `parameter,value` sidecar with the population truth and every subject's θ.
pub fn write_truth_csv<W: Write>(truth: &TruthSpec, ids: &[String], theta: &[[f64; 3]], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["parameter", "value"])?;
    for (l, a) in truth.alpha.iter().enumerate() {
        w.write_record([format!("alpha{}", l + 1), fmt_f64(*a)])?;
    }
    for (l, o) in truth.omega2.iter().enumerate() {
        w.write_record([format!("omega2_{}", l + 1), fmt_f64(*o)])?;
    }
    w.write_record(["zeta".to_string(), fmt_f64(truth.zeta)])?;
    w.write_record(["sigma2".to_string(), fmt_f64(truth.sigma2)])?;
    for param in PkParam::ALL {
        for (id, row) in ids.iter().zip(theta) {
            w.write_record([format!("theta{}_{id}", param.number()), fmt_f64(row[param.index()])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Human-readable record of a fit: config echo, seed, acceptance, warnings.
pub fn render_manifest(config: &RunConfig, draws: &PosteriorDraws, extra: &[(String, String)]) -> String {
    let mut out = String::from("# run manifest\n");
    out.push_str(&render_run_config(config));
    out.push_str(&format!("retained_draws={}\n", draws.len()));
    for param in PkParam::ALL {
        out.push_str(&format!(
            "acceptance_theta{}={}\n",
            param.number(),
            fmt_f64(draws.acceptance.theta[param.index()])
        ));
    }
    out.push_str(&format!("acceptance_zeta={}\n", fmt_f64(draws.acceptance.zeta)));
    out.push_str(&format!("max_ess_shrinks={}\n", draws.acceptance.max_ess_shrinks));
    for (id, steps) in draws.patient_ids.iter().zip(&draws.theta_steps) {
        out.push_str(&format!(
            "theta_step_{id}={},{},{}\n",
            fmt_f64(steps[0]),
            fmt_f64(steps[1]),
            fmt_f64(steps[2])
        ));
    }
    out.push_str(&format!("zeta_step_final={}\n", fmt_f64(draws.zeta_step)));
    for (k, v) in extra {
        out.push_str(&format!("{k}={v}\n"));
    }
    for w in &draws.warnings {
        out.push_str(&format!("warning={w}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -2.5, 1e-300, 6.02e23, 0.1 + 0.2, f64::MIN_POSITIVE, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn dataset_drops_invalid_rows() {
        let text = "patient_id,dose_mg,time_hr,conc\n1,320,0,0.7\n1,320,1,5.0\n1,320,2,6.0\n2,300,0.5,0\n2,300,1,4.0\n";
        let imp = parse_dataset_csv(text.as_bytes()).unwrap();
        assert_eq!(imp.warnings.len(), 2);
        assert!(imp.warnings[0].contains("row 2"));
        assert_eq!(imp.dataset.patients[0].times, vec![1.0, 2.0]);
        assert_eq!(imp.dataset.patients[1].times, vec![1.0]);
        assert_eq!(imp.dataset.patients[0].log_conc[0], 5f64.ln());
    }

    #[test]
    fn dataset_errors() {
        let bad_header = "id,dose,time,conc\n1,1,1,1\n";
        assert!(parse_dataset_csv(bad_header.as_bytes()).is_err());
        let all_dropped = "patient_id,dose_mg,time_hr,conc\n1,320,0,1\n2,320,1,1\n";
        assert!(parse_dataset_csv(all_dropped.as_bytes()).is_err());
        let dose_conflict = "patient_id,dose_mg,time_hr,conc\n1,320,1,1\n1,300,2,1\n";
        assert!(parse_dataset_csv(dose_conflict.as_bytes()).is_err());
        let garbage = "patient_id,dose_mg,time_hr,conc\n1,320,x,1\n";
        assert!(parse_dataset_csv(garbage.as_bytes()).unwrap_err().to_string().contains("row 2"));
    }

    #[test]
    fn run_config_parsing() {
        let c = parse_run_config("iterations=100\nburn_in=50 # half\nthin=5\nseed=9\ntheta_kernel=mala\ntheta_step=0.02\nzeta_kernel=ess\nrho2=4\nparallel=true\nadapt=false\n").unwrap();
        assert_eq!(c.sampler.n_retained(), 10);
        assert_eq!(c.sampler.theta_kernel.kind, KernelKind::Mala);
        assert!(!c.sampler.theta_kernel.adapt_during_burnin);
        assert!(c.sampler.parallel_patients);
        assert_eq!(c.priors.zeta_prior_variance, 4.0);
        assert_eq!(parse_run_config(&render_run_config(&c)).unwrap(), c);

        assert!(parse_run_config("iterations=10\nburn_in=20\n").is_err());
        assert!(parse_run_config("bogus=1\n").is_err());
        assert!(parse_run_config("seed=abc\n").is_err());
        assert!(parse_run_config("seed=1\nseed=2\n").is_err());
        assert!(parse_run_config("theta_kernel=nuts\n").is_err());
    }

    #[test]
    fn truth_config_defaults_to_reference() {
        let t = parse_truth_config("# reference\n").unwrap();
        assert_eq!(t.truth, TruthSpec::reference());
        assert_eq!(t.n_patients, 12);
        let t = parse_truth_config("patients=3\nsigma2=0\ntimes=1,2,4\ndose=100,200,300\n").unwrap();
        assert_eq!(t.truth.design_times, vec![vec![1.0, 2.0, 4.0]]);
        assert!(parse_truth_config("patients=2\ndose=1,2,3\n").is_err());
        assert!(parse_truth_config("bioavailability=1.5\n").is_err());
    }

    #[test]
    fn draws_schema_mismatch() {
        assert!(parse_draws_csv("iteration,foo\n1,2\n".as_bytes()).is_err());
        assert!(parse_draws_csv("it,a,b\n".as_bytes()).is_err());
    }
}
