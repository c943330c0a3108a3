//! Censored-data primitives: datasets, step functions, kernels, product-limit
//! estimators and bandwidth selection.

mod bandwidth;
mod dataset;
mod kernel;
pub(crate) mod product_limit;
mod step;

pub use bandwidth::{cv_bandwidth, cv_score, default_bandwidth_grid};
pub use dataset::{Dataset, Subject};
pub use kernel::{epanechnikov, Kernel};
pub use product_limit::{
    beran_survival, cure_probs_at_own_index, kaplan_meier, nadaraya_watson_weights,
    nonparametric_cure_prob,
};
pub use step::StepFunction;
