mod common;

use popkit::diagnostics::{band_from_states, effective_sample_size, rhat, BandLevel};
use popkit::gibbs::{run_chain, BlockUpdates, SamplerConfig};
use popkit::kernels::KernelConfig;
use popkit::model::{ChainState, PkParam, Priors};
use popkit::oracle::ks_distance_sorted;
use popkit::pk_math::{concentration, ModelParams};
use popkit::simulate::TruthSpec;
use popkit::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as NormalDist};
use statrs::distribution::{ContinuousCDF, Normal};

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn truth_state(theta: &[[f64; 3]]) -> ChainState {
    let t = TruthSpec::reference();
    ChainState {
        theta: theta.to_vec(),
        zeta: t.zeta,
        sigma2: t.sigma2,
        alpha: t.alpha,
        omega2: t.omega2,
    }
}

#[test]
fn prior_only_zeta_recovers_its_prior() {
    let (data, theta) = common::reference_data(1);
    let priors = Priors::new(2.0).unwrap();
    let mut config = SamplerConfig::new(42_000, 2_000).with_seed(3);
    config.prior_only = true;
    config.updates = BlockUpdates::none();
    config.updates.zeta = true;
    let draws = run_chain(&data, &priors, &config, Some(truth_state(&theta))).unwrap();
    let z = sorted(draws.trace(|s| s.zeta));
    let prior = Normal::new(0.0, 2f64.sqrt()).unwrap();
    let ks = ks_distance_sorted(&z, |x| prior.cdf(x));
    assert!(ks < 0.02, "KS {ks}");
}

#[test]
fn prior_only_theta_follows_the_population_distribution() {
    let (data, theta) = common::reference_data(2);
    let state = truth_state(&theta);
    for kernel in [KernelConfig::metropolis(0.3), KernelConfig::mala(0.1), KernelConfig::ess()] {
        let mut config = SamplerConfig::new(22_000, 2_000).with_seed(5);
        config.prior_only = true;
        config.theta_kernel = kernel;
        config.updates = BlockUpdates::only_theta(PkParam::LogAbsorptionRate);
        let draws = run_chain(&data, &Priors::default(), &config, Some(state.clone())).unwrap();
        let x = sorted(draws.trace(|s| s.theta[4][2]));
        let prior = Normal::new(state.alpha[2], state.omega2[2].sqrt()).unwrap();
        let ks = ks_distance_sorted(&x, |v| prior.cdf(v));
        assert!(ks < 0.03, "{}: KS {ks}", kernel.kind);
        // Untouched blocks stay frozen.
        assert!(draws.draws.iter().all(|d| d.state.theta[4][0] == state.theta[4][0]));
    }
}

#[test]
fn degenerate_conditional_reports_block_and_iteration() {
    let (data, _) = common::reference_data(3);
    let t = TruthSpec::reference();
    // Every subject sits exactly on the population mean, so ‖θ_l − α_l‖² = 0.
    let mut state = truth_state(&vec![t.alpha; 12]);
    state.alpha = t.alpha;
    let mut config = SamplerConfig::new(10, 0);
    config.updates = BlockUpdates::none();
    config.updates.omega2 = true;
    match run_chain(&data, &Priors::default(), &config, Some(state)) {
        Err(Error::Degenerate { block, iteration, .. }) => {
            assert_eq!(block, "omega2");
            assert_eq!(iteration, Some(0));
        }
        other => panic!("expected a degenerate-conditional error, got {other:?}"),
    }
}

#[test]
fn single_patient_needs_frozen_population_blocks() {
    let (data, theta) = common::reference_data(4);
    let one = popkit::model::Dataset::new(vec![data.patients[0].clone()]).unwrap();
    let config = SamplerConfig::new(100, 50);
    assert!(run_chain(&one, &Priors::default(), &config, None).is_err());
    let mut config = config;
    config.updates.alpha = false;
    config.updates.omega2 = false;
    let state = truth_state(&theta[..1]);
    assert_eq!(run_chain(&one, &Priors::default(), &config, Some(state)).unwrap().len(), 50);
}

#[test]
fn independent_chains_agree_on_identified_quantities() {
    let (data, _) = common::reference_data(5);
    // ka_pop and σ² are identified without the bioavailability prior.
    let runs: Vec<_> = (0..4)
        .map(|seed| {
            let config = SamplerConfig::new(6_000, 2_000).with_seed(seed);
            run_chain(&data, &Priors::default(), &config, None).unwrap()
        })
        .collect();
    for f in [|s: &ChainState| s.alpha[2], |s: &ChainState| s.sigma2] {
        let chains: Vec<Vec<f64>> = runs.iter().map(|r| r.trace(f)).collect();
        let r = rhat(&chains).unwrap();
        assert!(r < 1.1, "R-hat {r}");
        assert!(effective_sample_size(&chains[0]) > 50.0);
    }
    // CL/F is identified even though CL and F are not separately.
    let cl_over_f: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| r.trace(|s| s.alpha[0] - popkit::pk_math::log_logistic(s.zeta)))
        .collect();
    assert!(rhat(&cl_over_f).unwrap() < 1.1);
}

#[test]
fn band_quantiles_follow_draw_quantiles() {
    // Concentration falls monotonically in CL, so with only α_1 varying the
    // band limits are the concentrations at the α_1 quantiles, swapped.
    let t = TruthSpec::reference();
    let sd = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dist = NormalDist::new(t.alpha[0], sd).unwrap();
    let states: Vec<ChainState> = (0..200_000)
        .map(|_| {
            let mut s = truth_state(&[t.alpha]);
            s.alpha[0] = dist.sample(&mut rng);
            s
        })
        .collect();
    let times = [0.5, 2.0, 8.0, 24.0];
    let band = band_from_states(states.iter(), BandLevel::Population, 320.0, &times).unwrap();
    let z = 1.959963984540054;
    let conc = |a1: f64, time: f64| {
        let p = ModelParams::new([a1, t.alpha[1], t.alpha[2]], t.zeta);
        concentration(&p.to_natural(), 320.0, time).unwrap()
    };
    for b in &band {
        for (got, a1) in [(b.lower, t.alpha[0] + z * sd), (b.median, t.alpha[0]), (b.upper, t.alpha[0] - z * sd)] {
            let want = conc(a1, b.time);
            assert!(((got - want) / want).abs() < 5e-3, "t={} got {got} want {want}", b.time);
        }
    }
    // Patient band of the same states uses θ instead of α.
    let pb = band_from_states(states.iter(), BandLevel::Patient(0), 320.0, &[2.0]).unwrap();
    assert!((pb[0].upper - pb[0].lower).abs() < 1e-12);
}

#[test]
fn subject_bands_cover_held_out_true_curves() {
    // Subject curves depend on F/V only, so they are identified even though
    // F and V are not.
    let truth = TruthSpec::reference();
    let held_out = [0.75, 1.5, 3.0, 4.0, 6.0, 8.0, 10.0, 16.0];
    let (mut inside, mut total) = (0usize, 0usize);
    for rep in 0..8u64 {
        let sim = popkit::simulate::simulate_dataset(&truth, 12, 300 + rep).unwrap();
        let config = SamplerConfig::new(6_000, 3_000).with_seed(rep);
        let draws = run_chain(&sim.dataset, &Priors::default(), &config, None).unwrap();
        for (i, p) in sim.dataset.patients.iter().enumerate() {
            let band = popkit::diagnostics::predictive_band(&draws, BandLevel::Patient(i), p.dose, &held_out).unwrap();
            let params = ModelParams::new(sim.theta[i], truth.zeta).to_natural();
            for b in band {
                assert!(b.lower <= b.median && b.median <= b.upper);
                let c = concentration(&params, p.dose, b.time).unwrap();
                inside += (b.lower <= c && c <= b.upper) as usize;
                total += 1;
            }
        }
    }
    let rate = inside as f64 / total as f64;
    let sd = (0.95 * 0.05 / total as f64).sqrt();
    assert!((rate - 0.95).abs() < 3.0 * sd, "coverage {rate} over {total} points");
}
