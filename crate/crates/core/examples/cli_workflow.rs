//! The command layer end to end: simulate, fit, diagnose, in a temporary
//! directory. Equivalent to
//!
//! ```text
//! popkit simulate configs/truth.cfg --out sim
//! popkit fit sim/data.csv --config configs/run.cfg --out fit
//! popkit diagnose fit/draws.csv --out diag --data sim/data.csv
//! ```
//!
//! cargo run --release --example cli_workflow

use std::fs;
use std::path::Path;

use popkit::cli;

fn main() -> std::io::Result<()> {
    let root = std::env::temp_dir().join(format!("popkit_workflow_{}", std::process::id()));
    fs::create_dir_all(&root)?;
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");

    let sim = root.join("sim");
    assert_eq!(cli::cmd_simulate(&configs.join("truth.cfg"), &sim), cli::EXIT_OK);
    let fit = root.join("fit");
    assert_eq!(cli::cmd_fit(&sim.join("data.csv"), Some(&configs.join("run.cfg")), &fit), cli::EXIT_OK);
    let diag = root.join("diag");
    assert_eq!(cli::cmd_diagnose(&fit.join("draws.csv"), &diag, Some(&sim.join("data.csv"))), cli::EXIT_OK);

    let same = fs::read(fit.join("summary.csv"))? == fs::read(diag.join("summary.csv"))?;
    println!("outputs in {}", root.display());
    println!("diagnose reproduces summary.csv: {same}\n");
    print!("{}", fs::read_to_string(fit.join("summary.csv"))?);
    println!();
    print!("{}", fs::read_to_string(fit.join("run_manifest.txt"))?);
    Ok(())
}
