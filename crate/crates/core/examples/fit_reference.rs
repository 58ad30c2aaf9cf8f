//! Fit the hierarchical model to a simulated reference study and compare
//! the posterior with the truth.
//!
//! cargo run --release --example fit_reference [iterations]

use popkit::diagnostics::summarize;
use popkit::gibbs::{run_chain, SamplerConfig};
use popkit::model::Priors;
use popkit::simulate::{simulate_dataset, TruthSpec};

fn main() -> popkit::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let truth = TruthSpec::reference();
    let sim = simulate_dataset(&truth, 12, 2024)?;
    let config = SamplerConfig::new(n, n / 2).with_seed(7);
    let started = std::time::Instant::now();
    let draws = run_chain(&sim.dataset, &Priors::default(), &config, None)?;
    println!("{} retained draws in {:.1?}", draws.len(), started.elapsed());
    println!(
        "acceptance theta {:.3?}, zeta {:.3} (max slice shrinks {})",
        draws.acceptance.theta, draws.acceptance.zeta, draws.acceptance.max_ess_shrinks
    );

    let truth_natural = [
        truth.alpha[0].exp(),
        truth.alpha[1].exp(),
        truth.alpha[2].exp(),
        popkit::pk_math::logistic(truth.zeta),
    ];
    println!("\n{:<8} {:>8} {:>8} {:>8} {:>8} {:>8}", "param", "truth", "mean", "2.5%", "97.5%", "ESS");
    let mut k = 0;
    for s in summarize(&draws)? {
        match &s.natural_scale {
            Some(nat) => {
                println!(
                    "{:<8} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.0}",
                    nat.name, truth_natural[k], nat.mean, nat.q025, nat.q975, s.effective_sample_size
                );
                k += 1;
            }
            None => println!(
                "{:<8} {:>8} {:>8.4} {:>8.4} {:>8.4} {:>8.0}",
                s.name, "", s.mean, s.q025, s.q975, s.effective_sample_size
            ),
        }
    }
    for w in &draws.warnings {
        println!("\nwarning: {w}");
    }
    Ok(())
}
