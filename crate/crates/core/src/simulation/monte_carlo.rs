use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::generate_dataset;
use super::scenario::ScenarioConfig;
use crate::em::fit_em;
use crate::error::{CureError, Result};
use crate::inference::Estimator;
use crate::rng::stream_rng;
use crate::two_step::{fit_two_step, TwoStepConfig};

/// Outcome of one simulated replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub cure_rate: f64,
    pub censoring_rate: f64,
    /// false when the EM errored or hit its iteration cap
    pub em_converged: bool,
    pub em_iterations: usize,
    pub em_estimates: Option<Vec<f64>>,
    pub two_step_estimates: Option<Vec<f64>>,
    /// set when the 2-step was requested and failed structurally
    pub two_step_error: Option<String>,
    /// range of the presmoothed cure probabilities
    pub pi_hat_min: Option<f64>,
    pub pi_hat_max: Option<f64>,
}

/// One line of the report: error summary of one parameter under one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: u8,
    pub scenario: u8,
    pub n: usize,
    pub estimator: Estimator,
    pub parameter: String,
    /// `None` when fewer than two replications qualify
    pub bias: Option<f64>,
    pub variance: Option<f64>,
    pub mse: Option<f64>,
    /// replications entering the statistics
    pub n_reps: usize,
    pub n_nonconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub n_replications: usize,
    pub n_nonconverged_em: usize,
    pub n_failed_two_step: usize,
    pub empirical_cure_rate: f64,
    pub empirical_censor_rate: f64,
    pub rows: Vec<ReportRow>,
    pub replications: Vec<ReplicationRecord>,
}

impl MonteCarloReport {
    pub fn row(&self, estimator: Estimator, parameter: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.parameter == parameter)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| CureError::InvalidInput(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| CureError::InvalidInput(e.to_string()))
    }
}

fn run_replication(
    config: &ScenarioConfig,
    r: usize,
    seed: u64,
    want_two_step: bool,
    ts_config: &TwoStepConfig,
) -> Result<ReplicationRecord> {
    let mut rng = stream_rng(seed, r as u64);
    let sim = generate_dataset(config, &mut rng)?;
    let mut rec = ReplicationRecord {
        replication: r,
        cure_rate: sim.cure_rate(),
        censoring_rate: sim.censoring_rate(),
        em_converged: false,
        em_iterations: 0,
        em_estimates: None,
        two_step_estimates: None,
        two_step_error: None,
        pi_hat_min: None,
        pi_hat_max: None,
    };
    let em = match fit_em(&sim.dataset, &ts_config.em) {
        Ok(em) => em,
        Err(e) => {
            if want_two_step {
                rec.two_step_error = Some(format!("preliminary fit failed: {e}"));
            }
            return Ok(rec);
        }
    };
    rec.em_converged = em.converged;
    rec.em_iterations = em.n_iterations;
    rec.em_estimates = Some(em.gamma.iter().chain(&em.beta).copied().collect());
    if want_two_step {
        match fit_two_step(&sim.dataset, &em, ts_config) {
            Ok(ts) => {
                rec.pi_hat_min = ts.pi_hat.iter().copied().reduce(f64::min);
                rec.pi_hat_max = ts.pi_hat.iter().copied().reduce(f64::max);
                rec.two_step_estimates = Some(ts.gamma.iter().chain(&ts.beta).copied().collect());
            }
            Err(e) => rec.two_step_error = Some(e.to_string()),
        }
    }
    Ok(rec)
}

fn estimates_of(rec: &ReplicationRecord, estimator: Estimator) -> Option<&Vec<f64>> {
    match estimator {
        Estimator::Em => rec.em_estimates.as_ref(),
        Estimator::TwoStep => rec.two_step_estimates.as_ref(),
    }
}

/// Bias, variance (denominator `k - 1`) and `bias^2 + variance` of at least two `values`.
pub fn error_summary(values: &[f64], truth: f64) -> (f64, f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let bias = mean - truth;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (bias, variance, bias * bias + variance)
}

/// Monte Carlo experiment over `n_replications` independent datasets.
///
/// Replication `r` draws from the stream `(seed, r)`. Statistics use only
/// replications whose EM converged and, per estimator, produced finite estimates.
pub fn run_monte_carlo(
    config: &ScenarioConfig,
    n_replications: usize,
    estimators: &[Estimator],
    seed: u64,
    ts_config: &TwoStepConfig,
) -> Result<MonteCarloReport> {
    config.validate()?;
    if n_replications < 2 {
        return Err(CureError::InvalidInput("need at least 2 replications".into()));
    }
    if estimators.is_empty() {
        return Err(CureError::InvalidInput("no estimator requested".into()));
    }
    let want_two_step = estimators.contains(&Estimator::TwoStep);
    let replications: Vec<ReplicationRecord> = (0..n_replications)
        .into_par_iter()
        .map(|r| run_replication(config, r, seed, want_two_step, ts_config))
        .collect::<Result<_>>()?;

    let n_nonconverged_em = replications.iter().filter(|r| !r.em_converged).count();
    let n_failed_two_step = replications.iter().filter(|r| r.two_step_error.is_some()).count();
    let k = n_replications as f64;
    let empirical_cure_rate = replications.iter().map(|r| r.cure_rate).sum::<f64>() / k;
    let empirical_censor_rate = replications.iter().map(|r| r.censoring_rate).sum::<f64>() / k;

    let truth: Vec<f64> = config.true_gamma().into_iter().chain(config.true_beta()).collect();
    let names = config.parameter_names();
    let mut rows = Vec::new();
    for &est in estimators {
        let used: Vec<&Vec<f64>> = replications
            .iter()
            .filter(|r| r.em_converged)
            .filter_map(|r| estimates_of(r, est))
            .filter(|v| v.iter().all(|x| x.is_finite()))
            .collect();
        for (j, name) in names.iter().enumerate() {
            let values: Vec<f64> = used.iter().map(|v| v[j]).collect();
            let (bias, variance, mse) = if values.len() < 2 {
                (None, None, None)
            } else {
                let (b, v, m) = error_summary(&values, truth[j]);
                (Some(b), Some(v), Some(m))
            };
            rows.push(ReportRow {
                model: config.model,
                scenario: config.scenario,
                n: config.n,
                estimator: est,
                parameter: name.clone(),
                bias,
                variance,
                mse,
                n_reps: values.len(),
                n_nonconverged: n_nonconverged_em,
            });
        }
    }

    Ok(MonteCarloReport {
        config: config.clone(),
        seed,
        n_replications,
        n_nonconverged_em,
        n_failed_two_step,
        empirical_cure_rate,
        empirical_censor_rate,
        rows,
        replications,
    })
}

/// Writes report rows as CSV with a header.
pub fn write_rows_csv<W: Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| CureError::InvalidInput(e.to_string()))?;
    }
    w.flush().map_err(|e| CureError::InvalidInput(e.to_string()))
}

pub fn read_rows_csv<R: Read>(reader: R) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CureError::InvalidInput(e.to_string()))
}
