//! EM maximum likelihood for the logistic-Cox mixture cure model.
//!
//! Each iteration computes posterior uncure weights `w`, refits the incidence
//! by fractional logistic regression of `w` on `(1, x)`, and refits the latency
//! by a Cox model with offsets `log w` (subjects with `w = 0` leave the risk
//! sets) followed by the Breslow baseline.

use serde::{Deserialize, Serialize};

use crate::cox::{breslow_at, fit_cox_from, CoxFit};
use crate::error::{CureError, Result};
use crate::linalg::max_abs;
use crate::logistic::fit_fractional_logistic_from;
use crate::model::{e_step, observed_loglik, CureModel};
use crate::survival_core::{Dataset, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// relative sup-norm change of `(gamma, beta)` that ends the iterations
    pub param_tolerance: f64,
    pub clamp_epsilon: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            param_tolerance: 1e-7,
            clamp_epsilon: 1e-10,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.param_tolerance > 0.0) || !(self.clamp_epsilon > 0.0) {
            return Err(CureError::InvalidInput(format!("invalid EM configuration {self:?}")));
        }
        Ok(())
    }
}

/// Structural events recorded during the iterations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmDiagnostics {
    pub logistic_separation: bool,
    pub cox_separation: bool,
    /// M-steps whose Cox solver stopped short of its gradient tolerance
    pub cox_unconverged_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureCureFit {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub baseline_cum_hazard: StepFunction,
    pub converged: bool,
    pub n_iterations: usize,
    /// observed-data log-likelihood after initialization and after each iteration
    pub observed_loglik_trace: Vec<f64>,
    pub diagnostics: EmDiagnostics,
}

impl CureModel for MixtureCureFit {
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

fn latency_step(
    dataset: &Dataset,
    w: &[f64],
    start: Option<&[f64]>,
    diag: &mut EmDiagnostics,
) -> Result<CoxFit> {
    let case: Vec<f64> = w.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let offsets: Vec<f64> = w.iter().map(|&v| if v > 0.0 { v.ln() } else { 0.0 }).collect();
    let fit = fit_cox_from(dataset, &case, &offsets, start)?;
    diag.cox_separation |= fit.separation;
    if !fit.converged {
        diag.cox_unconverged_steps += 1;
    }
    Ok(fit)
}

fn relative_change(old: &[f64], new: &[f64]) -> f64 {
    let diff: Vec<f64> = old.iter().zip(new).map(|(a, b)| b - a).collect();
    max_abs(&diff) / max_abs(old).max(1.0)
}

fn check_dataset(dataset: &Dataset) -> Result<()> {
    if dataset.n_events() == dataset.len() {
        return Err(CureError::InvalidInput(
            "mixture cure fit needs at least one censored subject".into(),
        ));
    }
    Ok(())
}

/// Full EM fit of incidence and latency.
pub fn fit_em(dataset: &Dataset, config: &EmConfig) -> Result<MixtureCureFit> {
    config.validate()?;
    check_dataset(dataset)?;
    let design = dataset.incidence_design();
    let ones = vec![1.0; dataset.len()];
    let delta: Vec<f64> = dataset.subjects().iter().map(|s| s.delta()).collect();
    let mut diag = EmDiagnostics::default();

    let init = fit_fractional_logistic_from(&design, &delta, &ones, None)?;
    diag.logistic_separation |= init.separation;
    let mut gamma = init.gamma;
    // beta = 0 with the Breslow baseline of the events
    let mut beta = vec![0.0; dataset.q()];
    let mut baseline = breslow_at(dataset, &delta, &vec![0.0; dataset.len()], &beta)?;

    let eps = config.clamp_epsilon;
    let mut trace = vec![observed_loglik(&gamma, &beta, &baseline, dataset, eps)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let w = e_step(&gamma, &beta, &baseline, dataset);
        let inc = fit_fractional_logistic_from(&design, &w, &ones, Some(&gamma))?;
        diag.logistic_separation |= inc.separation;
        let cox = latency_step(dataset, &w, Some(&beta), &mut diag)?;

        let old: Vec<f64> = gamma.iter().chain(&beta).copied().collect();
        let new: Vec<f64> = inc.gamma.iter().chain(&cox.beta).copied().collect();
        let change = relative_change(&old, &new);

        gamma = inc.gamma;
        beta = cox.beta;
        baseline = cox.baseline_cum_hazard;
        trace.push(observed_loglik(&gamma, &beta, &baseline, dataset, eps));

        if !new.iter().all(|v| v.is_finite()) {
            return Err(CureError::Divergence("EM produced non-finite parameters".into()));
        }
        if change < config.param_tolerance {
            converged = true;
            break;
        }
    }

    Ok(MixtureCureFit {
        gamma,
        beta,
        baseline_cum_hazard: baseline,
        converged,
        n_iterations: iterations,
        observed_loglik_trace: trace,
        diagnostics: diag,
    })
}

/// EM over the latency only, with the incidence held at `gamma_fixed`.
pub fn refit_latency(dataset: &Dataset, gamma_fixed: &[f64], config: &EmConfig) -> Result<MixtureCureFit> {
    config.validate()?;
    check_dataset(dataset)?;
    if gamma_fixed.len() != dataset.p() + 1 {
        return Err(CureError::InvalidInput(format!(
            "gamma has length {}, expected {}",
            gamma_fixed.len(),
            dataset.p() + 1
        )));
    }
    if !gamma_fixed.iter().all(|v| v.is_finite()) {
        return Err(CureError::InvalidInput("gamma must be finite".into()));
    }
    let delta: Vec<f64> = dataset.subjects().iter().map(|s| s.delta()).collect();
    let mut diag = EmDiagnostics::default();
    // beta = 0 with the Breslow baseline of the events
    let mut beta = vec![0.0; dataset.q()];
    let mut baseline = breslow_at(dataset, &delta, &vec![0.0; dataset.len()], &beta)?;

    let eps = config.clamp_epsilon;
    let mut trace = vec![observed_loglik(gamma_fixed, &beta, &baseline, dataset, eps)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let w = e_step(gamma_fixed, &beta, &baseline, dataset);
        let cox = latency_step(dataset, &w, Some(&beta), &mut diag)?;
        let change = relative_change(&beta, &cox.beta);
        beta = cox.beta;
        baseline = cox.baseline_cum_hazard;
        trace.push(observed_loglik(gamma_fixed, &beta, &baseline, dataset, eps));
        if change < config.param_tolerance {
            converged = true;
            break;
        }
    }

    Ok(MixtureCureFit {
        gamma: gamma_fixed.to_vec(),
        beta,
        baseline_cum_hazard: baseline,
        converged,
        n_iterations: iterations,
        observed_loglik_trace: trace,
        diagnostics: diag,
    })
}
