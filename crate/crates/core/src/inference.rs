//! Naive bootstrap standard errors, Wald p-values and the train/test
//! prediction-error comparison of the two estimators.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::em::fit_em;
use crate::error::{CureError, Result};
use crate::logistic::softplus;
use crate::model::{incidence_predictor, posterior_uncure, CureModel};
use crate::rng::{derive_seed, stream_rng};
use crate::survival_core::{Dataset, Subject};
use crate::two_step::{fit_two_step, TwoStepConfig};

/// Standard errors below this are treated as degenerate (no p-value).
pub const DEGENERATE_SE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Em,
    TwoStep,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Em => "em",
            Estimator::TwoStep => "two_step",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Estimator {
    type Err = CureError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "em" => Ok(Estimator::Em),
            "two_step" | "two-step" | "2step" => Ok(Estimator::TwoStep),
            other => Err(CureError::InvalidInput(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Parameters of one fit: `gamma` (intercept first) followed by `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedParameters {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub em_converged: bool,
}

impl FittedParameters {
    pub fn stacked(&self) -> Vec<f64> {
        self.gamma.iter().chain(&self.beta).copied().collect()
    }
}

/// Fits `estimator` on `dataset`. The 2-step estimator uses the EM fit as its
/// preliminary estimate.
pub fn fit_parameters(dataset: &Dataset, estimator: Estimator, config: &TwoStepConfig) -> Result<FittedParameters> {
    let em = fit_em(dataset, &config.em)?;
    match estimator {
        Estimator::Em => Ok(FittedParameters {
            gamma: em.gamma,
            beta: em.beta,
            em_converged: em.converged,
        }),
        Estimator::TwoStep => {
            let ts = fit_two_step(dataset, &em, config)?;
            Ok(FittedParameters {
                gamma: ts.gamma,
                beta: ts.beta,
                em_converged: em.converged,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub estimator: Estimator,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// `None` where the standard error is degenerate
    pub p_values: Vec<Option<f64>>,
    pub n_bootstrap: usize,
    pub n_bootstrap_failed: usize,
    /// whether the EM fit on the full data met its convergence criterion
    pub em_converged: bool,
}

/// Two-sided Wald p-value `2 (1 - Phi(|z|))`.
pub fn wald_p_value(estimate: f64, se: f64) -> Option<f64> {
    if !(se >= DEGENERATE_SE) || !estimate.is_finite() {
        return None;
    }
    let z = (estimate / se).abs();
    Some(erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

fn bootstrap_indices(n: usize, seed: u64, replicate: usize) -> Vec<usize> {
    let mut rng = stream_rng(seed, replicate as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Naive bootstrap: `b` resamples of the subjects with replacement.
///
/// A resample counts as failed when the fit errors, or, for the EM estimator,
/// when the EM does not converge. Failed resamples are excluded.
pub fn bootstrap_inference(
    dataset: &Dataset,
    estimator: Estimator,
    b: usize,
    seed: u64,
    config: &TwoStepConfig,
) -> Result<InferenceReport> {
    if b < 2 {
        return Err(CureError::InvalidInput("bootstrap needs at least 2 resamples".into()));
    }
    let full = fit_parameters(dataset, estimator, config)?;
    let estimates = full.stacked();
    let n = dataset.len();

    let draws: Vec<Option<Vec<f64>>> = (0..b)
        .into_par_iter()
        .map(|r| {
            let idx = bootstrap_indices(n, seed, r);
            let resample = dataset.select(&idx).ok()?;
            let fit = fit_parameters(&resample, estimator, config).ok()?;
            if estimator == Estimator::Em && !fit.em_converged {
                return None;
            }
            let v = fit.stacked();
            v.iter().all(|x| x.is_finite()).then_some(v)
        })
        .collect();

    let ok: Vec<&Vec<f64>> = draws.iter().flatten().collect();
    let failed = b - ok.len();
    if 2 * failed > b || ok.len() < 2 {
        return Err(CureError::InferenceUnreliable { failed, total: b });
    }
    let k = ok.len() as f64;
    let standard_errors: Vec<f64> = (0..estimates.len())
        .map(|j| {
            let mean = ok.iter().map(|v| v[j]).sum::<f64>() / k;
            (ok.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        })
        .collect();
    let p_values = estimates
        .iter()
        .zip(&standard_errors)
        .map(|(&e, &se)| wald_p_value(e, se))
        .collect();
    Ok(InferenceReport {
        estimator,
        estimates,
        standard_errors,
        p_values,
        n_bootstrap: b,
        n_bootstrap_failed: failed,
        em_converged: full.em_converged,
    })
}

/// Negative log score of the incidence on held-out subjects, with the
/// posterior uncure probabilities playing the role of the outcome.
pub fn prediction_error<M: CureModel + ?Sized>(test: &Dataset, fit: &M) -> f64 {
    prediction_error_subjects(test.subjects(), fit)
}

pub fn prediction_error_subjects<M: CureModel + ?Sized>(test: &[Subject], fit: &M) -> f64 {
    test.iter()
        .map(|s| {
            let w = posterior_uncure(fit.gamma(), fit.beta(), fit.baseline_cum_hazard(), s);
            let eta = incidence_predictor(fit.gamma(), &s.x);
            // -[w log phi + (1 - w) log(1 - phi)]
            let mut term = 0.0;
            if w > 0.0 {
                term += w * softplus(-eta);
            }
            if w < 1.0 {
                term += (1.0 - w) * softplus(eta);
            }
            term
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionErrorResult {
    pub split: usize,
    /// seed of the random partition of this split
    pub split_seed: u64,
    pub pe_two_step: Option<f64>,
    pub pe_em: Option<f64>,
}

impl PredictionErrorResult {
    /// `PE(two-step) - PE(EM)` when both are available.
    pub fn difference(&self) -> Option<f64> {
        Some(self.pe_two_step? - self.pe_em?)
    }
}

/// Train size of the 2:1 split: the ceiling of `2n/3`.
pub fn train_size(n: usize) -> usize {
    (2 * n).div_ceil(3)
}

/// Random 2:1 partition into `(train, test)` index sets.
pub fn split_indices(n: usize, split_seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(split_seed, 0);
    idx.shuffle(&mut rng);
    let test = idx.split_off(train_size(n));
    (idx, test)
}

fn one_split(dataset: &Dataset, split: usize, seed: u64, config: &TwoStepConfig) -> PredictionErrorResult {
    let split_seed = derive_seed(seed, split as u64);
    let (train_idx, test_idx) = split_indices(dataset.len(), split_seed);
    let test: Vec<Subject> = test_idx.iter().map(|&i| dataset.subjects()[i].clone()).collect();
    let mut result = PredictionErrorResult {
        split,
        split_seed,
        pe_two_step: None,
        pe_em: None,
    };
    let Ok(train) = dataset.select(&train_idx) else {
        return result;
    };
    let Ok(em) = fit_em(&train, &config.em) else {
        return result;
    };
    result.pe_em = Some(prediction_error_subjects(&test, &em));
    if let Ok(ts) = fit_two_step(&train, &em, config) {
        result.pe_two_step = Some(prediction_error_subjects(&test, &ts));
    }
    result
}

/// Repeated 2:1 train/test splits; both estimators are fit on each training
/// part and scored on the held-out part.
pub fn pe_comparison(
    dataset: &Dataset,
    n_splits: usize,
    seed: u64,
    config: &TwoStepConfig,
) -> Result<Vec<PredictionErrorResult>> {
    if n_splits == 0 {
        return Err(CureError::InvalidInput("need at least one split".into()));
    }
    Ok((0..n_splits)
        .into_par_iter()
        .map(|s| one_split(dataset, s, seed, config))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeSummary {
    pub n_valid: usize,
    pub median_difference: f64,
    pub fraction_negative: f64,
}

/// Median of `PE(two-step) - PE(EM)` and the fraction of negative differences
/// over the splits where both fits succeeded.
pub fn summarize_pe(results: &[PredictionErrorResult]) -> Option<PeSummary> {
    let mut diffs: Vec<f64> = results.iter().filter_map(|r| r.difference()).collect();
    if diffs.is_empty() {
        return None;
    }
    diffs.sort_by(f64::total_cmp);
    let m = diffs.len();
    let median = if m % 2 == 1 {
        diffs[m / 2]
    } else {
        0.5 * (diffs[m / 2 - 1] + diffs[m / 2])
    };
    Some(PeSummary {
        n_valid: m,
        median_difference: median,
        fraction_negative: diffs.iter().filter(|&&d| d < 0.0).count() as f64 / m as f64,
    })
}
