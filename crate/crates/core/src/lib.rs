//! Estimation for semiparametric logistic-Cox mixture cure models.
//!
//! Two estimators are provided: the EM maximum likelihood estimator
//! ([`em::fit_em`]) and the presmoothed 2-step estimator
//! ([`two_step::fit_two_step`]), which replaces the latent cure status by a
//! kernel-smoothed product-limit estimate conditional on a single index and
//! then fits the incidence by fractional logistic regression. Bootstrap
//! inference, prediction error and a Monte Carlo harness build on top.

pub mod cox;
pub mod em;
pub mod error;
pub mod inference;
pub mod logistic;
pub mod model;
pub mod rng;
pub mod simulation;
pub mod survival_core;
pub mod two_step;

mod linalg;

pub use cox::{fit_cox, uncured_survival, CoxFit};
pub use em::{fit_em, refit_latency, EmConfig, MixtureCureFit};
pub use error::{CureError, Result};
pub use logistic::{fit_fractional_logistic, phi, trim_by_index_density, LogisticFit};
pub use inference::{bootstrap_inference, pe_comparison, Estimator, InferenceReport};
pub use model::{e_step, observed_loglik, CureModel};
pub use survival_core::{Dataset, Kernel, StepFunction, Subject};
pub use two_step::{fit_two_step, two_step_with_em_preliminary, TwoStepConfig, TwoStepFit};
pub use simulation::{generate_dataset, run_monte_carlo, MonteCarloReport, ScenarioConfig};
