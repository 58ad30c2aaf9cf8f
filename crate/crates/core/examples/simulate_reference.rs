//! Draw the 12-subject reference study and compare the latent subject
//! parameters with their population distribution.
//!
//! cargo run --example simulate_reference [seed]

use popkit::model::PkParam;
use popkit::simulate::{simulate_dataset, TruthSpec};

fn main() -> popkit::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let truth = TruthSpec::reference();
    let sim = simulate_dataset(&truth, 12, seed)?;
    println!("{} subjects, {} observations", sim.dataset.n_patients(), sim.dataset.total_observations());
    for param in PkParam::ALL {
        let l = param.index();
        let col: Vec<f64> = sim.theta.iter().map(|r| r[l].exp()).collect();
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:<7} population {:>6.2}  subjects {:>6.2} .. {:>6.2}",
            param.population_name(),
            truth.alpha[l].exp(),
            lo,
            hi
        );
    }
    let p = &sim.dataset.patients[0];
    println!("\nsubject {} (dose {} mg)", p.id, p.dose);
    for (t, y) in p.times.iter().zip(&p.log_conc) {
        println!("  t={t:>5}  C={:>7.3}", y.exp());
    }
    Ok(())
}
