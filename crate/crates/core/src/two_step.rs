//! Presmoothed 2-step estimator.
//!
//! 1. Build the single index `v_i = g~'(1, x_i)` from a preliminary fit.
//! 2. Choose the bandwidth by cross-validation (or take an override).
//! 3. Estimate each subject's cure probability with the Beran estimator at
//!    the largest observed event time, conditioning on the index.
//! 4. Fit the incidence by fractional logistic regression of `1 - pi_hat`.
//! 5. Refit the latency by EM with the incidence held fixed.

use serde::{Deserialize, Serialize};

use crate::em::{fit_em, refit_latency, EmConfig, MixtureCureFit};
use crate::error::{CureError, Result};
use crate::logistic::{fit_fractional_logistic, trim_by_index_density};
use crate::model::{incidence_predictor, CureModel};
use crate::survival_core::product_limit::SortedSample;
use crate::survival_core::{
    cure_probs_at_own_index, cv_bandwidth, default_bandwidth_grid, Dataset, Kernel, StepFunction,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepConfig {
    /// density threshold `c` of the trimming indicator; 0 disables trimming
    pub trim_threshold: f64,
    pub bandwidth_override: Option<f64>,
    /// candidate bandwidths for cross-validation; `None` uses the default grid
    pub bandwidth_grid: Option<Vec<f64>>,
    pub kernel: Kernel,
    /// configuration of the preliminary EM fit and of the latency refit
    pub em: EmConfig,
}

impl Default for TwoStepConfig {
    fn default() -> Self {
        Self {
            trim_threshold: 0.0,
            bandwidth_override: None,
            bandwidth_grid: None,
            kernel: Kernel::Epanechnikov,
            em: EmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoStepDiagnostics {
    /// `None` when the preliminary index did not come from an EM fit
    pub preliminary_converged: Option<bool>,
    pub logistic_converged: bool,
    pub logistic_separation: bool,
    pub latency_converged: bool,
    pub latency_iterations: usize,
    /// subjects whose kernel window was empty (trimmed out)
    pub n_degenerate: usize,
    /// subjects with zero trim weight, degenerate ones included
    pub n_trimmed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepFit {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub baseline_cum_hazard: StepFunction,
    pub preliminary_gamma: Vec<f64>,
    pub bandwidth: f64,
    pub pi_hat: Vec<f64>,
    pub diagnostics: TwoStepDiagnostics,
}

impl CureModel for TwoStepFit {
    fn gamma(&self) -> &[f64] {
        &self.gamma
    }
    fn beta(&self) -> &[f64] {
        &self.beta
    }
    fn baseline_cum_hazard(&self) -> &StepFunction {
        &self.baseline_cum_hazard
    }
}

/// Result of the presmoothing stage: per-subject cure probabilities and trim weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Presmoothing {
    pub index: Vec<f64>,
    pub bandwidth: f64,
    pub pi_hat: Vec<f64>,
    pub trim: Vec<f64>,
    pub n_degenerate: usize,
}

/// Steps 1-3: index, bandwidth and nonparametric cure probabilities.
pub fn presmooth(dataset: &Dataset, preliminary_gamma: &[f64], config: &TwoStepConfig) -> Result<Presmoothing> {
    if preliminary_gamma.len() != dataset.p() + 1 {
        return Err(CureError::InvalidInput(format!(
            "preliminary gamma has length {}, expected {}",
            preliminary_gamma.len(),
            dataset.p() + 1
        )));
    }
    if !preliminary_gamma.iter().all(|v| v.is_finite()) {
        return Err(CureError::InvalidInput("preliminary gamma must be finite".into()));
    }
    let index: Vec<f64> = dataset
        .subjects()
        .iter()
        .map(|s| incidence_predictor(preliminary_gamma, &s.x))
        .collect();
    let times = dataset.times();
    let events = dataset.events();

    let bandwidth = match config.bandwidth_override {
        Some(b) if b > 0.0 && b.is_finite() => b,
        Some(b) => {
            return Err(CureError::InvalidInput(format!("bandwidth override must be positive, got {b}")))
        }
        None => {
            let grid = config
                .bandwidth_grid
                .clone()
                .unwrap_or_else(|| default_bandwidth_grid(&index));
            cv_bandwidth(&index, &times, &events, &grid, config.kernel)?
        }
    };

    let raw = cure_probs_at_own_index(&index, &times, &events, bandwidth, config.kernel)?;
    let fallback = SortedSample::new(&times, &events).plateau(&vec![1.0; times.len()]);
    let mut trim = trim_by_index_density(&index, bandwidth, config.kernel, config.trim_threshold);
    let mut n_degenerate = 0;
    let pi_hat = raw
        .iter()
        .zip(trim.iter_mut())
        .map(|(p, t)| match p {
            Some(v) => *v,
            None => {
                n_degenerate += 1;
                *t = 0.0;
                fallback
            }
        })
        .collect();
    Ok(Presmoothing {
        index,
        bandwidth,
        pi_hat,
        trim,
        n_degenerate,
    })
}

/// Step 4: projection of the presmoothed cure probabilities on the logistic model.
pub fn project_incidence(
    dataset: &Dataset,
    pi_hat: &[f64],
    trim: &[f64],
) -> Result<crate::logistic::LogisticFit> {
    let design = dataset.incidence_design();
    let responses: Vec<f64> = pi_hat.iter().map(|p| (1.0 - p).clamp(0.0, 1.0)).collect();
    fit_fractional_logistic(&design, &responses, trim)
}

/// 2-step fit from an EM preliminary estimate (converged or not).
pub fn fit_two_step(dataset: &Dataset, preliminary: &MixtureCureFit, config: &TwoStepConfig) -> Result<TwoStepFit> {
    let mut fit = fit_two_step_from_gamma(dataset, &preliminary.gamma, config)?;
    fit.diagnostics.preliminary_converged = Some(preliminary.converged);
    Ok(fit)
}

/// 2-step fit from an arbitrary preliminary incidence vector.
pub fn fit_two_step_from_gamma(
    dataset: &Dataset,
    preliminary_gamma: &[f64],
    config: &TwoStepConfig,
) -> Result<TwoStepFit> {
    let pre = presmooth(dataset, preliminary_gamma, config)?;
    let logistic = project_incidence(dataset, &pre.pi_hat, &pre.trim)?;
    let latency = refit_latency(dataset, &logistic.gamma, &config.em)?;
    let n_trimmed = pre.trim.iter().filter(|&&t| t == 0.0).count();
    Ok(TwoStepFit {
        gamma: logistic.gamma,
        beta: latency.beta,
        baseline_cum_hazard: latency.baseline_cum_hazard,
        preliminary_gamma: preliminary_gamma.to_vec(),
        bandwidth: pre.bandwidth,
        pi_hat: pre.pi_hat,
        diagnostics: TwoStepDiagnostics {
            preliminary_converged: None,
            logistic_converged: logistic.converged,
            logistic_separation: logistic.separation,
            latency_converged: latency.converged,
            latency_iterations: latency.n_iterations,
            n_degenerate: pre.n_degenerate,
            n_trimmed,
        },
    })
}

/// EM preliminary fit followed by the 2-step estimator.
pub fn two_step_with_em_preliminary(dataset: &Dataset, config: &TwoStepConfig) -> Result<TwoStepFit> {
    let em = fit_em(dataset, &config.em)?;
    fit_two_step(dataset, &em, config)
}
