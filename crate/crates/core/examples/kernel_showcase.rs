//! The three scalar transition kernels on targets with known answers:
//! a conjugate Gaussian (exact posterior) and a bimodal mixture.
//!
//! cargo run --release --example kernel_showcase

use popkit::diagnostics::effective_sample_size;
use popkit::kernels::targets::{ConjugateNormal, GaussianMixture};
use popkit::kernels::{run_scalar_chain, GaussianFactor, KernelConfig, ScalarTarget};

fn report<T: ScalarTarget>(label: &str, target: &T) -> popkit::Result<()> {
    println!("{label}");
    for config in [KernelConfig::metropolis(1.0), KernelConfig::mala(0.5), KernelConfig::ess()] {
        let chain = run_scalar_chain(target, &config, 0.0, 2_000, 50_000, 1)?;
        let n = chain.draws.len() as f64;
        let mean = chain.draws.iter().sum::<f64>() / n;
        let var = chain.draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        println!(
            "  {:<10} mean {mean:>7.4} var {var:>7.4} accept {:.3} step {:.3} ESS {:>7.0} max shrinks {}",
            config.kind.to_string(),
            chain.acceptance_rate,
            chain.final_step,
            effective_sample_size(&chain.draws),
            chain.max_shrinks,
        );
    }
    Ok(())
}

fn main() -> popkit::Result<()> {
    let conj = ConjugateNormal {
        likelihood_mean: 1.5,
        likelihood_variance: 0.5,
        prior: GaussianFactor::new(-0.5, 2.0),
    };
    let (m, v) = conj.posterior();
    report(&format!("conjugate normal, exact mean {m:.4} var {v:.4}"), &conj)?;

    // Mixture with a unit Gaussian factor so the slice sampler applies.
    struct Bimodal(GaussianMixture);
    impl ScalarTarget for Bimodal {
        fn log_density(&self, x: f64) -> f64 {
            self.0.log_density(x)
        }
        fn gradient(&self, x: f64) -> Option<f64> {
            self.0.gradient(x)
        }
        fn gaussian_factor(&self) -> Option<GaussianFactor> {
            Some(GaussianFactor::new(0.0, 4.0))
        }
    }
    let mix = Bimodal(GaussianMixture {
        components: vec![(0.3, -2.0, 0.25), (0.7, 2.0, 0.25)],
    });
    report("mixture 0.3 N(-2, 0.25) + 0.7 N(2, 0.25), exact mean 0.8000", &mix)?;
    println!("(MALA's small gradient-guided steps rarely cross between the two modes)");
    Ok(())
}
