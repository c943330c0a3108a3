use curemix::inference::InferenceReport;
use curemix::Estimator;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub covariate: String,
    pub estimate: f64,
    /// null when inference was skipped
    pub se: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorBlock {
    pub estimator: Estimator,
    /// convergence of the EM fit (the preliminary fit for the 2-step)
    pub em_converged: bool,
    /// selected bandwidth; 2-step only
    pub bandwidth: Option<f64>,
    pub n_bootstrap_failed: Option<usize>,
    pub incidence: Vec<CoefficientRow>,
    pub latency: Vec<CoefficientRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub input: String,
    pub n: usize,
    pub n_events: usize,
    pub n_dropped_rows: usize,
    pub seed: u64,
    pub bootstrap: usize,
    pub fits: Vec<EstimatorBlock>,
}

impl EstimatorBlock {
    /// Splits the stacked `(gamma, beta)` vector into the two blocks.
    pub fn from_estimates(
        estimator: Estimator,
        incidence_names: &[String],
        latency_names: &[String],
        estimates: &[f64],
        em_converged: bool,
        inference: Option<&InferenceReport>,
    ) -> Self {
        let names: Vec<String> = std::iter::once("(Intercept)".to_string())
            .chain(incidence_names.iter().cloned())
            .chain(latency_names.iter().cloned())
            .collect();
        let mut rows: Vec<CoefficientRow> = names
            .into_iter()
            .enumerate()
            .map(|(j, covariate)| CoefficientRow {
                covariate,
                estimate: estimates[j],
                se: inference.map(|r| r.standard_errors[j]),
                p_value: inference.and_then(|r| r.p_values[j]),
            })
            .collect();
        let latency = rows.split_off(incidence_names.len() + 1);
        Self {
            estimator,
            em_converged,
            bandwidth: None,
            n_bootstrap_failed: inference.map(|r| r.n_bootstrap_failed),
            incidence: rows,
            latency,
        }
    }
}
