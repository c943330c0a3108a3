//! Weighted Cox partial likelihood with offsets, Newton solver and Breslow
//! baseline cumulative hazard.
//!
//! Ties use the Breslow convention. The log partial likelihood is
//! `sum_i d_i c_i [b'z_i + o_i - log sum_{j: Y_j >= Y_i} c_j exp(b'z_j + o_j)]`
//! for case weights `c` and offsets `o`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CureError, Result};
use crate::linalg::{dot, max_abs, solve_spd};
use crate::survival_core::product_limit::SortedSample;
use crate::survival_core::{Dataset, StepFunction};

pub const COX_GRADIENT_TOL: f64 = 1e-8;
const MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;
const SEPARATION_BOUND: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub beta: Vec<f64>,
    pub baseline_cum_hazard: StepFunction,
    pub n_iterations: usize,
    pub converged: bool,
    pub final_gradient_norm: f64,
    /// monotone likelihood: coefficients drifted past the separation bound
    pub separation: bool,
    pub log_partial_likelihood: f64,
}

impl CoxFit {
    pub fn uncured_survival(&self, t: f64, z: &[f64]) -> f64 {
        uncured_survival_from(&self.baseline_cum_hazard, &self.beta, t, z)
    }
}

/// `exp(-L0(t) exp(b'z))`, completed by zero beyond the last jump of `L0`.
pub fn uncured_survival_from(baseline: &StepFunction, beta: &[f64], t: f64, z: &[f64]) -> f64 {
    match baseline.last_jump() {
        Some(last) if t > last => 0.0,
        _ => {
            let h = baseline.eval(t);
            if h == 0.0 {
                1.0
            } else {
                (-h * dot(beta, z).exp()).exp().clamp(0.0, 1.0)
            }
        }
    }
}

/// Uncured survival for a fitted Cox model.
pub fn uncured_survival(fit: &CoxFit, t: f64, z: &[f64]) -> f64 {
    fit.uncured_survival(t, z)
}

/// Precomputed risk-set structure for repeated likelihood evaluations.
pub(crate) struct CoxProblem<'a> {
    z: Vec<&'a [f64]>,
    events: Vec<bool>,
    weights: &'a [f64],
    offsets: &'a [f64],
    sample: SortedSample,
    q: usize,
}

pub(crate) struct CoxEval {
    pub loglik: f64,
    pub grad: DVector<f64>,
    pub info: DMatrix<f64>,
}

impl<'a> CoxProblem<'a> {
    pub(crate) fn new(dataset: &'a Dataset, weights: &'a [f64], offsets: &'a [f64]) -> Result<Self> {
        let n = dataset.len();
        if weights.len() != n || offsets.len() != n {
            return Err(CureError::InvalidInput(format!(
                "cox: {n} subjects but {} weights and {} offsets",
                weights.len(),
                offsets.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(CureError::InvalidInput("case weights must be non-negative".into()));
        }
        if offsets
            .iter()
            .zip(weights)
            .any(|(o, w)| *w > 0.0 && !o.is_finite())
        {
            return Err(CureError::InvalidInput("offsets must be finite".into()));
        }
        let times = dataset.times();
        let events = dataset.events();
        if !events.iter().zip(weights).any(|(&e, &w)| e && w > 0.0) {
            return Err(CureError::InvalidInput(
                "cox: no event with positive weight".into(),
            ));
        }
        Ok(Self {
            z: dataset.subjects().iter().map(|s| s.z.as_slice()).collect(),
            sample: SortedSample::new(&times, &events),
            events,
            weights,
            offsets,
            q: dataset.q(),
        })
    }

    fn linear_predictors(&self, beta: &[f64]) -> Vec<f64> {
        self.z
            .iter()
            .zip(self.offsets)
            .map(|(z, o)| dot(beta, z) + o)
            .collect()
    }

    fn shift(&self, eta: &[f64]) -> f64 {
        eta.iter()
            .zip(self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(e, _)| *e)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Log partial likelihood, score and observed information.
    pub(crate) fn evaluate(&self, beta: &[f64], with_info: bool) -> CoxEval {
        let q = self.q;
        let eta = self.linear_predictors(beta);
        let m = self.shift(&eta);
        let order = self.sample.order();
        let n = order.len();

        let mut s0 = 0.0;
        let mut s1 = vec![0.0; q];
        let mut s2 = DMatrix::<f64>::zeros(q, q);
        let mut loglik = 0.0;
        let mut grad = DVector::<f64>::zeros(q);
        let mut info = DMatrix::<f64>::zeros(q, q);

        let mut pos = n;
        let event_times = self.sample.event_times();
        for k in (0..event_times.len()).rev() {
            let start = self.sample.risk_start_at(k);
            while pos > start {
                pos -= 1;
                let j = order[pos];
                let w = self.weights[j];
                if w <= 0.0 {
                    continue;
                }
                let r = w * (eta[j] - m).exp();
                s0 += r;
                let z = self.z[j];
                for a in 0..q {
                    s1[a] += r * z[a];
                    if with_info {
                        let rza = r * z[a];
                        for b in 0..=a {
                            s2[(a, b)] += rza * z[b];
                        }
                    }
                }
            }
            let mut d = 0.0;
            for &i in self.sample.event_members_at(k) {
                let w = self.weights[i];
                if w <= 0.0 || !self.events[i] {
                    continue;
                }
                d += w;
                loglik += w * (eta[i] - m);
                for a in 0..q {
                    grad[a] += w * self.z[i][a];
                }
            }
            if d == 0.0 {
                continue;
            }
            loglik -= d * s0.ln();
            for a in 0..q {
                let mean_a = s1[a] / s0;
                grad[a] -= d * mean_a;
                if with_info {
                    for b in 0..=a {
                        let v = d * (s2[(a, b)] / s0 - mean_a * s1[b] / s0);
                        info[(a, b)] += v;
                    }
                }
            }
        }
        if with_info {
            for a in 0..q {
                for b in 0..a {
                    info[(b, a)] = info[(a, b)];
                }
            }
        }
        CoxEval { loglik, grad, info }
    }

    /// Breslow estimator of the baseline cumulative hazard at `beta`.
    pub(crate) fn breslow(&self, beta: &[f64]) -> StepFunction {
        let eta = self.linear_predictors(beta);
        let m = self.shift(&eta);
        let order = self.sample.order();
        let event_times = self.sample.event_times();
        let mut s0 = 0.0;
        let mut pos = order.len();
        let mut jumps = vec![0.0; event_times.len()];
        for k in (0..event_times.len()).rev() {
            let start = self.sample.risk_start_at(k);
            while pos > start {
                pos -= 1;
                let j = order[pos];
                let w = self.weights[j];
                if w > 0.0 {
                    s0 += w * (eta[j] - m).exp();
                }
            }
            let d: f64 = self
                .sample
                .event_members_at(k)
                .iter()
                .filter(|&&i| self.events[i])
                .map(|&i| self.weights[i])
                .sum();
            if d > 0.0 {
                // d / sum c_j exp(eta_j), with the shift undone
                jumps[k] = d / s0 * (-m).exp();
            }
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut cum = 0.0;
        for (k, &t) in event_times.iter().enumerate() {
            if jumps[k] > 0.0 {
                cum += jumps[k];
                times.push(t);
                values.push(cum);
            }
        }
        StepFunction::new(times, values, 0.0)
    }
}

/// Breslow baseline cumulative hazard at a given `beta`, without fitting.
pub fn breslow_at(dataset: &Dataset, case_weights: &[f64], offsets: &[f64], beta: &[f64]) -> Result<StepFunction> {
    Ok(CoxProblem::new(dataset, case_weights, offsets)?.breslow(beta))
}

/// Log partial likelihood at `beta`.
pub fn cox_partial_loglik(dataset: &Dataset, weights: &[f64], offsets: &[f64], beta: &[f64]) -> Result<f64> {
    Ok(CoxProblem::new(dataset, weights, offsets)?.evaluate(beta, false).loglik)
}

/// Score (gradient of the log partial likelihood) at `beta`.
pub fn cox_score(dataset: &Dataset, weights: &[f64], offsets: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
    Ok(CoxProblem::new(dataset, weights, offsets)?
        .evaluate(beta, false)
        .grad
        .as_slice()
        .to_vec())
}

/// Fits the Cox model by Newton's method from `beta = 0`.
pub fn fit_cox(dataset: &Dataset, case_weights: &[f64], offsets: &[f64]) -> Result<CoxFit> {
    fit_cox_from(dataset, case_weights, offsets, None)
}

/// As [`fit_cox`], with an optional warm start.
pub fn fit_cox_from(
    dataset: &Dataset,
    case_weights: &[f64],
    offsets: &[f64],
    start: Option<&[f64]>,
) -> Result<CoxFit> {
    let problem = CoxProblem::new(dataset, case_weights, offsets)?;
    let q = dataset.q();
    let mut beta = match start {
        Some(s) if s.len() == q && s.iter().all(|v| v.is_finite()) => s.to_vec(),
        _ => vec![0.0; q],
    };
    let mut current = problem.evaluate(&beta, true);
    if !current.loglik.is_finite() && start.is_some() {
        beta = vec![0.0; q];
        current = problem.evaluate(&beta, true);
    }
    if !current.loglik.is_finite() {
        return Err(CureError::Divergence("non-finite partial likelihood at start".into()));
    }

    let mut iterations = 0;
    let mut separation = false;
    let mut stalled = false;
    let mut optimum = q == 0;
    let mut step_norm = f64::INFINITY;
    while q > 0 && iterations < MAX_ITER {
        let Some(step) = solve_spd(&current.info, &current.grad) else {
            stalled = true;
            break;
        };
        step_norm = max_abs(step.as_slice());
        // a tiny gradient with a non-negligible Newton step is a drifting
        // monotone likelihood, not an optimum
        let beta_scale = max_abs(&beta).max(1.0);
        if max_abs(current.grad.as_slice()) < COX_GRADIENT_TOL && step_norm < 1e-6 * beta_scale {
            optimum = true;
            break;
        }
        // inside the quadratic basin the gain is below the resolution of the
        // likelihood, so one unguarded Newton step finishes the job
        if current.grad.dot(&step) < 1e-10 * current.loglik.abs().max(1.0) && step_norm < 1e-6 * beta_scale {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
            let eval = problem.evaluate(&cand, true);
            if eval.loglik.is_finite() && max_abs(eval.grad.as_slice()) <= max_abs(current.grad.as_slice()) {
                beta = cand;
                current = eval;
            }
            iterations += 1;
            optimum = true;
            break;
        }
        iterations += 1;
        let mut scale = 1.0;
        let mut accepted = None;
        let mut any_finite = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + scale * s).collect();
            let eval = problem.evaluate(&cand, false);
            if eval.loglik.is_finite() {
                any_finite = true;
                if eval.loglik >= current.loglik {
                    accepted = Some(cand);
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some(cand) = accepted else {
            if !any_finite {
                return Err(CureError::Divergence(
                    "partial likelihood not finite after step-halving".into(),
                ));
            }
            stalled = true;
            break;
        };
        beta = cand;
        current = problem.evaluate(&beta, true);
        if max_abs(&beta) > SEPARATION_BOUND {
            separation = true;
            break;
        }
    }

    let gnorm = max_abs(current.grad.as_slice());
    let scale = max_abs(&beta).max(1.0);
    if stalled && gnorm < 1e-6 && step_norm >= 1e-4 * scale {
        // the line search can no longer resolve a likelihood flattening at infinity
        separation = true;
    }
    let converged = !separation && (optimum || (stalled && gnorm < 1e-6));
    Ok(CoxFit {
        baseline_cum_hazard: problem.breslow(&beta),
        beta,
        n_iterations: iterations,
        converged,
        final_gradient_norm: gnorm,
        separation,
        log_partial_likelihood: current.loglik,
    })
}
