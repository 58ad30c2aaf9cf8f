//! Fully Bayesian population pharmacokinetics for the one-compartment model
//! with first-order oral absorption.
//!
//! The crate is organised bottom-up:
//!
//! * [`pk_math`]: closed-form amounts, concentrations, the log mean curve
//!   and its analytic gradient.
//! * [`model`]: datasets, chain states and the joint log posterior.
//! * [`kernels`]: Metropolis, MALA and elliptical slice transitions for
//!   scalar targets.
//! * [`gibbs`]: the seven-block Gibbs sampler.
//! * [`diagnostics`]: summaries, effective sample sizes, predictive bands.
//! * [`simulate`]: synthetic datasets from the generative model.
//! * [`oracle`]: RK4 and grid-quadrature references used for verification.
//! * [`io`] and [`cli`]: file formats and the `popkit` commands.
//!
//! ```
//! use popkit::gibbs::{run_chain, SamplerConfig};
//! use popkit::model::Priors;
//! use popkit::simulate::{simulate_dataset, TruthSpec};
//!
//! let sim = simulate_dataset(&TruthSpec::reference(), 12, 1).unwrap();
//! let config = SamplerConfig::new(400, 200).with_seed(7);
//! let draws = run_chain(&sim.dataset, &Priors::default(), &config, None).unwrap();
//! assert_eq!(draws.len(), 200);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod kernels;
pub mod model;
pub mod oracle;
pub mod pk_math;
pub mod simulate;

pub use error::{Error, Result};
