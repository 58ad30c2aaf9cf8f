use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use popkit::io;
use popkit::model::PkParam;
use popkit::pk_math::{log_mean, ModelParams};

fn popkit(args: &[&Path], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_popkit"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(s: &str) -> PathBuf {
    PathBuf::from(s)
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn join(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Simulated reference dataset plus its truth sidecar, in `sim/`.
    fn simulate(&self, truth: &str) -> (PathBuf, Output) {
        let cfg = self.file("truth.cfg", truth);
        let out = self.join("sim");
        let o = popkit(&[&path("simulate"), &cfg, &path("--out"), &out], &[]);
        (out, o)
    }

    fn fit(&self, data: &Path, config: &str, out: &str) -> (PathBuf, Output) {
        let cfg = self.file(&format!("{out}.cfg"), config);
        let out = self.join(out);
        let o = popkit(&[&path("fit"), data, &path("--config"), &cfg, &path("--out"), &out], &[]);
        (out, o)
    }
}

const SHORT_RUN: &str = "iterations=600\nburn_in=300\nthin=3\nseed=11\n";

fn csv_rows(p: &Path) -> Vec<String> {
    fs::read_to_string(p).unwrap().lines().skip(1).map(str::to_string).collect()
}

#[test]
fn simulate_reference_design() {
    let ws = Workspace::new();
    let (out, o) = ws.simulate("seed=3\n");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out.join("data.csv")).len(), 120);
    let first = fs::read(out.join("data.csv")).unwrap();
    let (out2, _) = {
        let cfg = ws.file("again.cfg", "seed=3\n");
        let out = ws.join("sim2");
        (out.clone(), popkit(&[&path("simulate"), &cfg, &path("--out"), &out], &[]))
    };
    assert_eq!(first, fs::read(out2.join("data.csv")).unwrap());
    assert_eq!(fs::read(out.join("truth.csv")).unwrap(), fs::read(out2.join("truth.csv")).unwrap());
}

#[test]
fn noise_free_simulation_matches_model_curve() {
    let ws = Workspace::new();
    let (out, o) = ws.simulate("seed=4\nsigma2=0\npatients=4\n");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let data = io::read_dataset_csv(&out.join("data.csv")).unwrap().dataset;
    let truth: Vec<(String, f64)> = csv::Reader::from_path(out.join("truth.csv"))
        .unwrap()
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap())
        })
        .collect();
    let get = |k: &str| truth.iter().find(|(n, _)| n == k).unwrap().1;
    for p in &data.patients {
        let theta = PkParam::ALL.map(|q| get(&format!("theta{}_{}", q.number(), p.id)));
        let params = ModelParams::new(theta, get("zeta"));
        for (&t, &y) in p.times.iter().zip(&p.log_conc) {
            assert!((y - log_mean(&params, p.dose, t).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn malformed_truth_config_exits_2() {
    let ws = Workspace::new();
    let (_, o) = ws.simulate("patients=12\nclearence=3\n");
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("clearence"));
}

#[test]
fn fit_writes_every_output() {
    let ws = Workspace::new();
    let (sim, _) = ws.simulate("seed=5\n");
    let (out, o) = ws.fit(&sim.join("data.csv"), SHORT_RUN, "fit");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out.join("draws.csv")).len(), (600 - 300) / 3);
    let summary = csv_rows(&out.join("summary.csv"));
    assert_eq!(summary.len(), 8);
    for row in &summary {
        let ess: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
        assert!(ess >= 1.0, "{row}");
    }
    for id in 1..=12 {
        let band = csv_rows(&out.join(format!("bands_patient_{id}.csv")));
        assert_eq!(band.len(), 101);
        assert!(band[0].starts_with("0,0,0,0"), "band at t = 0 is zero: {}", band[0]);
    }
    assert_eq!(csv_rows(&out.join("bands_population.csv")).len(), 101);
    let manifest = fs::read_to_string(out.join("run_manifest.txt")).unwrap();
    assert!(manifest.contains("seed=11"));
    assert!(manifest.contains("acceptance_theta1="));
    assert!(manifest.contains("population_band_dose=320"));
}

#[test]
fn fit_is_byte_identical_across_reruns_and_threads() {
    let ws = Workspace::new();
    let (sim, _) = ws.simulate("seed=6\n");
    let data = sim.join("data.csv");
    let (a, _) = ws.fit(&data, SHORT_RUN, "a");
    let (b, _) = ws.fit(&data, SHORT_RUN, "b");
    let cfg = ws.file("par.cfg", &format!("{SHORT_RUN}parallel=true\n"));
    let c = ws.join("c");
    let o = popkit(
        &[&path("fit"), &data, &path("--config"), &cfg, &path("--out"), &c],
        &[("POPKIT_THREADS", "3")],
    );
    assert_eq!(code(&o), 0);
    for f in ["draws.csv", "summary.csv", "bands_patient_1.csv", "bands_population.csv"] {
        let reference = fs::read(a.join(f)).unwrap();
        assert_eq!(reference, fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(reference, fs::read(c.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bad_thread_count_is_malformed_input() {
    let ws = Workspace::new();
    let (sim, _) = ws.simulate("seed=6\npatients=3\n");
    let cfg = ws.file("run.cfg", SHORT_RUN);
    let out = ws.join("out");
    let o = popkit(
        &[&path("fit"), &sim.join("data.csv"), &path("--config"), &cfg, &path("--out"), &out],
        &[("POPKIT_THREADS", "many")],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn time_zero_rows_are_dropped_with_a_warning() {
    let ws = Workspace::new();
    let mut text = String::from("patient_id,dose_mg,time_hr,conc\n");
    for id in ["a", "b", "c"] {
        text.push_str(&format!("{id},320,0,0\n"));
        for (t, c) in [(0.5, 4.0), (1.0, 6.5), (2.0, 7.9), (4.0, 6.8), (8.0, 5.1), (12.0, 3.7), (24.0, 1.3)] {
            text.push_str(&format!("{id},320,{t},{c}\n"));
        }
    }
    let data = ws.file("data.csv", &text);
    let (out, o) = ws.fit(&data, SHORT_RUN, "fit");
    assert_eq!(code(&o), 0);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.matches("dropped observation").count(), 3, "{stderr}");
    assert!(stderr.contains("row 2"));
    assert!(out.join("bands_patient_a.csv").exists());

    // A subject with only t = 0 left is an error.
    let data = ws.file("bad.csv", &format!("{text}d,320,0,1.0\n"));
    let (_, o) = ws.fit(&data, SHORT_RUN, "bad");
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("patient d"));
}

#[test]
fn malformed_inputs_exit_2() {
    let ws = Workspace::new();
    let header_only = ws.file("h.csv", "patient,dose,time,conc\n1,1,1,1\n");
    assert_eq!(code(&ws.fit(&header_only, SHORT_RUN, "h").1), 2);
    let (sim, _) = ws.simulate("seed=1\npatients=3\n");
    let data = sim.join("data.csv");
    assert_eq!(code(&ws.fit(&data, "iterations=10\nburn_in=20\n", "c1").1), 2);
    assert_eq!(code(&ws.fit(&data, "theta_kernel=hmc\n", "c2").1), 2);
    let missing = ws.join("missing.csv");
    assert_eq!(code(&ws.fit(&missing, SHORT_RUN, "m").1), 2);
}

#[test]
fn diagnose_reproduces_fit_summary_and_bands() {
    let ws = Workspace::new();
    let (sim, _) = ws.simulate("seed=8\n");
    let data = sim.join("data.csv");
    let (fit, _) = ws.fit(&data, SHORT_RUN, "fit");
    let out = ws.join("diag");
    let o = popkit(
        &[&path("diagnose"), &fit.join("draws.csv"), &path("--out"), &out, &path("--data"), &data],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary.csv", "bands_patient_7.csv", "bands_population.csv"] {
        assert_eq!(fs::read(fit.join(f)).unwrap(), fs::read(out.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn diagnose_rejects_bad_draws() {
    let ws = Workspace::new();
    let (sim, _) = ws.simulate("seed=9\npatients=3\n");
    let (fit, _) = ws.fit(&sim.join("data.csv"), SHORT_RUN, "fit");
    let full = fs::read_to_string(fit.join("draws.csv")).unwrap();
    let truncated: String = full.lines().take(9).map(|l| format!("{l}\n")).collect();
    let short = ws.file("short.csv", &truncated);
    let out = ws.join("d");
    assert_eq!(code(&popkit(&[&path("diagnose"), &short, &path("--out"), &out], &[])), 2);

    let renamed = full.replacen("sigma2", "sigma", 1);
    let bad = ws.file("bad.csv", &renamed);
    let o = popkit(&[&path("diagnose"), &bad, &path("--out"), &out], &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
}
