use popkit::gibbs::Draw;
use popkit::io::{fmt_f64, parse_dataset_csv, parse_draws_csv, write_dataset_csv, write_draws_csv};
use popkit::kernels::{ess_step, metropolis_step, mala_step, targets::ConjugateNormal, GaussianFactor};
use popkit::model::{ChainState, Dataset, PatientRecord};
use popkit::pk_math::{
    amount_absorption_site, amount_central, grad_log_mean, log_mean, logistic, logit, ModelParams,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn mass_balance(d in 1.0f64..1e3, ka in 1e-3f64..10.0, ke in 1e-3f64..10.0, t in 0.0f64..200.0) {
        let a = amount_central(d, ka, ke, t).unwrap();
        let aa = amount_absorption_site(d, ka, t).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(aa + a <= d * (1.0 + 1e-12));
    }

    #[test]
    fn rate_symmetry(d in 1.0f64..1e3, ka in 1e-2f64..5.0, ke in 1e-2f64..5.0, t in 0.0f64..50.0) {
        // D ka (e^{-ke t} - e^{-ka t}) / (ka - ke) is symmetric in (ka, ke) up to the ka prefactor.
        let a = amount_central(d, ka, ke, t).unwrap() / ka;
        let b = amount_central(d, ke, ka, t).unwrap() / ke;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn log_mean_and_gradient_are_finite(
        th in prop::array::uniform3(-5.0f64..5.0), zeta in -30.0f64..30.0,
        d in 1e-3f64..1e4, t in 1e-3f64..100.0,
    ) {
        let p = ModelParams::new(th, zeta);
        prop_assert!(log_mean(&p, d, t).unwrap().is_finite());
        prop_assert!(grad_log_mean(&p, d, t).unwrap().iter().all(|g| g.is_finite()));
    }

    #[test]
    fn logit_inverts_logistic(x in -30.0f64..30.0) {
        prop_assert!((logit(logistic(x)) - x).abs() < 1e-9 * (1.0 + x.abs()) * x.abs().exp().min(1e6));
    }

    #[test]
    fn float_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn dataset_csv_round_trips(
        rows in prop::collection::vec(
            (1e-3f64..1e4, prop::collection::btree_set(1u32..10_000, 1..8), prop::collection::vec(-20.0f64..10.0, 8)),
            1..5,
        )
    ) {
        let patients: Vec<PatientRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, (dose, times, y))| {
                let times: Vec<f64> = times.iter().map(|&t| t as f64 / 97.0).collect();
                let y = y[..times.len()].to_vec();
                PatientRecord::new(format!("p{i}"), *dose, times, y).unwrap()
            })
            .collect();
        let data = Dataset::new(patients).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&data, &mut buf).unwrap();
        let back = parse_dataset_csv(buf.as_slice()).unwrap();
        prop_assert!(back.warnings.is_empty());
        for (a, b) in data.patients.iter().zip(&back.dataset.patients) {
            prop_assert_eq!(&a.id, &b.id);
            prop_assert_eq!(a.dose, b.dose);
            prop_assert_eq!(&a.times, &b.times);
            // The file holds exp(y); logging it back costs at most a few ulps.
            for (ya, yb) in a.log_conc.iter().zip(&b.log_conc) {
                prop_assert!((ya - yb).abs() <= 4.0 * f64::EPSILON * ya.abs().max(1.0));
            }
        }
    }

    #[test]
    fn draws_csv_round_trips_exactly(
        vals in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 17),
        iteration in 0usize..1_000_000,
    ) {
        let ids = vec!["a".to_string(), "b b".to_string(), "c,1".to_string()];
        let state = ChainState {
            theta: vec![[vals[0], vals[1], vals[2]], [vals[3], vals[4], vals[5]], [vals[6], vals[7], vals[8]]],
            zeta: vals[9],
            sigma2: vals[10],
            alpha: [vals[11], vals[12], vals[13]],
            omega2: [vals[14], vals[15], vals[16]],
        };
        let draws = vec![Draw { iteration, state }];
        let mut buf = Vec::new();
        write_draws_csv(&ids, &draws, &mut buf).unwrap();
        let back = parse_draws_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.patient_ids, ids);
        prop_assert_eq!(back.draws, draws);
    }

    #[test]
    fn kernels_return_finite_states(seed in any::<u64>(), x0 in -50.0f64..50.0, m in -20.0f64..20.0, w in 1e-6f64..1e2) {
        let target = ConjugateNormal {
            likelihood_mean: m,
            likelihood_variance: w,
            prior: GaussianFactor::new(0.0, 4.0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(metropolis_step(&target, x0, 0.5, &mut rng).value.is_finite());
        prop_assert!(mala_step(&target, x0, 0.05, &mut rng).unwrap().value.is_finite());
        let o = ess_step(&target, x0, &mut rng).unwrap();
        prop_assert!(o.value.is_finite());
    }
}
