#![allow(dead_code)]

use popkit::model::{ChainState, Dataset, PkParam};
use popkit::simulate::{simulate_dataset, TruthSpec};
use rand::Rng;

/// Reference-scenario dataset with the latent subject parameters.
pub fn reference_data(seed: u64) -> (Dataset, Vec<[f64; 3]>) {
    let sim = simulate_dataset(&TruthSpec::reference(), 12, seed).unwrap();
    (sim.dataset, sim.theta)
}

/// A plausible but arbitrary state near the generating values.
pub fn random_state<R: Rng>(theta: &[[f64; 3]], rng: &mut R) -> ChainState {
    let truth = TruthSpec::reference();
    ChainState {
        theta: theta
            .iter()
            .map(|row| row.map(|v| v + rng.random_range(-0.3..0.3)))
            .collect(),
        zeta: truth.zeta + rng.random_range(-1.0..1.0),
        sigma2: rng.random_range(0.005..0.05),
        alpha: truth.alpha.map(|a| a + rng.random_range(-0.3..0.3)),
        omega2: PkParam::ALL.map(|_| rng.random_range(0.02..0.5)),
    }
}

/// Log density of `IG(shape, scale)` up to a constant.
pub fn inverse_gamma_log_kernel(x: f64, shape: f64, scale: f64) -> f64 {
    -(shape + 1.0) * x.ln() - scale / x
}

pub fn normal_log_kernel(x: f64, mean: f64, variance: f64) -> f64 {
    -0.5 * (x - mean) * (x - mean) / variance
}
