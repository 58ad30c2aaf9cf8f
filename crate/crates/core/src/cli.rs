//! Command implementations behind the `popkit` binary.
//!
//! Each command returns a process exit code:
//! `0` success, `1` I/O failure writing outputs, `2` malformed input,
//! `3` a degenerate conditional aborted the sampler.

use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::{self, BandLevel, BandPoint};
use crate::error::{Error, Result};
use crate::gibbs::{self, Draw};
use crate::io::{self, RunConfig};
use crate::model::Dataset;
use crate::simulate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Environment variable capping patient-level threads (`0` = all cores).
pub const THREADS_ENV: &str = "POPKIT_THREADS";
/// Points in every band time grid.
pub const BAND_GRID_POINTS: usize = 101;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Degenerate { .. } => EXIT_DEGENERATE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_MALFORMED,
    }
}

fn finish(result: Result<Vec<String>>) -> i32 {
    match result {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Fit the model to `data_path` and write draws, summaries, bands and a
/// manifest into `out_dir`. Without a config file every key takes its default.
pub fn cmd_fit(data_path: &Path, config_path: Option<&Path>, out_dir: &Path) -> i32 {
    finish(fit(data_path, config_path, out_dir))
}

/// Simulate a dataset from a truth config into `out_dir/data.csv` and
/// `out_dir/truth.csv`.
pub fn cmd_simulate(truth_path: &Path, out_dir: &Path) -> i32 {
    finish(simulate_files(truth_path, out_dir))
}

/// Recompute `summary.csv` (and, given the dataset, the band files) from an
/// existing `draws.csv`.
pub fn cmd_diagnose(draws_path: &Path, out_dir: &Path, data_path: Option<&Path>) -> i32 {
    finish(diagnose(draws_path, out_dir, data_path))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidData(format!("cannot read {}: {e}", path.display())))
}

fn create(path: PathBuf) -> Result<fs::File> {
    Ok(fs::File::create(path)?)
}

/// `0 ..= t_max` in [`BAND_GRID_POINTS`] equal steps.
pub fn band_grid(t_max: f64) -> Vec<f64> {
    let n = BAND_GRID_POINTS - 1;
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

/// Subject id made safe for a file name.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn thread_cap() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
    }
}

fn fit(data_path: &Path, config_path: Option<&Path>, out_dir: &Path) -> Result<Vec<String>> {
    let import = io::read_dataset_csv(data_path)?;
    let config = match config_path {
        Some(p) => io::parse_run_config(&read_text(p)?)?,
        None => RunConfig::default(),
    };
    let data = import.dataset;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start thread pool: {e}")))?;
    let draws = pool.install(|| gibbs::run_chain(&data, &config.priors, &config.sampler, None))?;

    fs::create_dir_all(out_dir)?;
    io::write_draws_csv(&draws.patient_ids, &draws.draws, create(out_dir.join("draws.csv"))?)?;
    let summaries = diagnostics::summarize(&draws)?;
    io::write_summary_csv(&summaries, create(out_dir.join("summary.csv"))?)?;
    let population_dose = write_bands(&data, &draws.draws, out_dir)?;

    let extra = vec![
        ("data".to_string(), data_path.display().to_string()),
        ("patients".to_string(), data.n_patients().to_string()),
        ("observations".to_string(), data.total_observations().to_string()),
        ("population_band_dose".to_string(), io::fmt_f64(population_dose)),
        ("dropped_rows".to_string(), import.warnings.len().to_string()),
    ];
    fs::write(out_dir.join("run_manifest.txt"), io::render_manifest(&config, &draws, &extra))?;

    let mut warnings = import.warnings;
    warnings.extend(draws.warnings);
    Ok(warnings)
}

fn write_band(band: &[BandPoint], path: PathBuf) -> Result<()> {
    io::write_band_csv(band, create(path)?)
}

/// Per-subject bands plus a population band at the mean dose. Returns that dose.
fn write_bands(data: &Dataset, draws: &[Draw], out_dir: &Path) -> Result<f64> {
    let states = || draws.iter().map(|d| &d.state);
    let mut t_max: f64 = 0.0;
    for (i, p) in data.patients.iter().enumerate() {
        let last = *p.times.last().expect("validated records are non-empty");
        t_max = t_max.max(last);
        let band = diagnostics::band_from_states(states(), BandLevel::Patient(i), p.dose, &band_grid(last))?;
        write_band(&band, out_dir.join(format!("bands_patient_{}.csv", file_stem(&p.id))))?;
    }
    let dose = data.patients.iter().map(|p| p.dose).sum::<f64>() / data.n_patients() as f64;
    let band = diagnostics::band_from_states(states(), BandLevel::Population, dose, &band_grid(t_max))?;
    write_band(&band, out_dir.join("bands_population.csv"))?;
    Ok(dose)
}

fn simulate_files(truth_path: &Path, out_dir: &Path) -> Result<Vec<String>> {
    let cfg = io::parse_truth_config(&read_text(truth_path)?)?;
    let sim = simulate::simulate_dataset(&cfg.truth, cfg.n_patients, cfg.seed)?;
    fs::create_dir_all(out_dir)?;
    io::write_dataset_csv(&sim.dataset, create(out_dir.join("data.csv"))?)?;
    let ids: Vec<String> = sim.dataset.patients.iter().map(|p| p.id.clone()).collect();
    io::write_truth_csv(&cfg.truth, &ids, &sim.theta, create(out_dir.join("truth.csv"))?)?;
    Ok(Vec::new())
}

fn diagnose(draws_path: &Path, out_dir: &Path, data_path: Option<&Path>) -> Result<Vec<String>> {
    let table = io::read_draws_csv(draws_path)?;
    let summaries = diagnostics::summarize_draws(&table.draws)?;
    fs::create_dir_all(out_dir)?;
    io::write_summary_csv(&summaries, create(out_dir.join("summary.csv"))?)?;
    if let Some(path) = data_path {
        let data = io::read_dataset_csv(path)?.dataset;
        let ids: Vec<&str> = data.patients.iter().map(|p| p.id.as_str()).collect();
        if ids != table.patient_ids.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::InvalidData(
                "dataset patients do not match the draws columns".into(),
            ));
        }
        write_bands(&data, &table.draws, out_dir)?;
    }
    Ok(Vec::new())
}
