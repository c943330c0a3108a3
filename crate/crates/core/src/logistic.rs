//! Fractional-response logistic maximum likelihood with per-subject trim weights.
//!
//! Maximizes `sum_i t_i [r_i log phi(g'x_i) + (1 - r_i) log(1 - phi(g'x_i))]`
//! for responses `r_i` in `[0, 1]`. The objective is concave for any such
//! responses, so Newton–Raphson with step-halving is used throughout.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CureError, Result};
use crate::linalg::{dot, inverse_condition, max_abs, solve_spd, to_rows};
use crate::survival_core::Kernel;

const GRADIENT_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;
const MAX_HALVINGS: usize = 30;
const SEPARATION_BOUND: f64 = 50.0;

/// Logistic link `e^u / (1 + e^u)`, evaluated without overflow.
#[inline]
pub fn phi(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^u)` without overflow.
#[inline]
pub(crate) fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    /// intercept first
    pub gamma: Vec<f64>,
    pub converged: bool,
    pub n_iterations: usize,
    /// negative Hessian of the objective at `gamma`
    pub neg_hessian: Vec<Vec<f64>>,
    pub gradient_norm: f64,
    /// coefficients drifted past the separation bound
    pub separation: bool,
}

/// Objective value at `gamma`.
pub fn fractional_loglik(design: &[Vec<f64>], responses: &[f64], trim: &[f64], gamma: &[f64]) -> f64 {
    design
        .iter()
        .zip(responses)
        .zip(trim)
        .filter(|(_, &t)| t > 0.0)
        .map(|((x, &r), &t)| {
            let eta = dot(x, gamma);
            t * (r * eta - softplus(eta))
        })
        .sum()
}

fn derivatives(
    design: &[Vec<f64>],
    responses: &[f64],
    trim: &[f64],
    gamma: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let d = gamma.len();
    let mut grad = DVector::zeros(d);
    let mut info = DMatrix::zeros(d, d);
    for ((x, &r), &t) in design.iter().zip(responses).zip(trim) {
        if t <= 0.0 {
            continue;
        }
        let p = phi(dot(x, gamma));
        let resid = t * (r - p);
        let w = t * p * (1.0 - p);
        for a in 0..d {
            grad[a] += resid * x[a];
            let wa = w * x[a];
            for b in 0..=a {
                info[(a, b)] += wa * x[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (grad, info)
}

fn validate(design: &[Vec<f64>], responses: &[f64], trim: &[f64]) -> Result<usize> {
    let n = design.len();
    if n == 0 || responses.len() != n || trim.len() != n {
        return Err(CureError::InvalidInput(format!(
            "logistic fit: design has {n} rows, responses {}, trim weights {}",
            responses.len(),
            trim.len()
        )));
    }
    let d = design[0].len();
    if design.iter().any(|row| row.len() != d) {
        return Err(CureError::InvalidInput("ragged design matrix".into()));
    }
    if responses.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(CureError::InvalidInput("responses must lie in [0, 1]".into()));
    }
    if trim.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(CureError::InvalidInput("trim weights must be non-negative".into()));
    }
    Ok(d)
}

/// Fits the fractional-response logistic model starting from `gamma = 0`.
pub fn fit_fractional_logistic(
    design: &[Vec<f64>],
    responses: &[f64],
    trim_weights: &[f64],
) -> Result<LogisticFit> {
    fit_fractional_logistic_from(design, responses, trim_weights, None)
}

/// As [`fit_fractional_logistic`], with an optional warm start.
pub fn fit_fractional_logistic_from(
    design: &[Vec<f64>],
    responses: &[f64],
    trim_weights: &[f64],
    start: Option<&[f64]>,
) -> Result<LogisticFit> {
    let d = validate(design, responses, trim_weights)?;

    // rank check on the trimmed subsample: X' T X
    let mut gram = DMatrix::zeros(d, d);
    for (x, &t) in design.iter().zip(trim_weights) {
        if t > 0.0 {
            for a in 0..d {
                for b in 0..d {
                    gram[(a, b)] += t * x[a] * x[b];
                }
            }
        }
    }
    if inverse_condition(&gram) < 1e-12 {
        return Err(CureError::SingularDesign(
            "design is rank deficient on the trimmed subsample".into(),
        ));
    }

    let mut gamma: Vec<f64> = match start {
        Some(s) if s.len() == d && s.iter().all(|v| v.is_finite()) => s.to_vec(),
        _ => vec![0.0; d],
    };
    let mut value = fractional_loglik(design, responses, trim_weights, &gamma);
    let (mut grad, mut info) = derivatives(design, responses, trim_weights, &gamma);
    let mut iterations = 0;
    let mut separation = false;
    let mut stalled = false;

    let mut optimum = false;
    let mut step_norm = f64::INFINITY;
    while iterations < MAX_ITER {
        let Some(step) = solve_spd(&info, &grad) else {
            stalled = true;
            break;
        };
        step_norm = max_abs(step.as_slice());
        // a tiny gradient with a large Newton step means drift toward separation
        let gamma_scale = max_abs(&gamma).max(1.0);
        if max_abs(grad.as_slice()) < GRADIENT_TOL && step_norm < 1e-6 * gamma_scale {
            optimum = true;
            break;
        }
        // gain below the resolution of the likelihood: finish with one unguarded Newton step
        if grad.dot(&step) < 1e-10 * value.abs().max(1.0) && step_norm < 1e-6 * gamma_scale {
            let cand: Vec<f64> = gamma.iter().zip(step.iter()).map(|(g, s)| g + s).collect();
            let v = fractional_loglik(design, responses, trim_weights, &cand);
            let (g2, i2) = derivatives(design, responses, trim_weights, &cand);
            if v.is_finite() && max_abs(g2.as_slice()) <= max_abs(grad.as_slice()) {
                gamma = cand;
                (grad, info) = (g2, i2);
            }
            iterations += 1;
            optimum = true;
            break;
        }
        iterations += 1;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = gamma.iter().zip(step.iter()).map(|(g, s)| g + scale * s).collect();
            let v = fractional_loglik(design, responses, trim_weights, &cand);
            if v.is_finite() && v >= value {
                accepted = Some((cand, v));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, v)) = accepted else {
            stalled = true;
            break;
        };
        gamma = cand;
        value = v;
        (grad, info) = derivatives(design, responses, trim_weights, &gamma);
        if max_abs(&gamma) > SEPARATION_BOUND {
            separation = true;
            break;
        }
    }

    let gradient_norm = max_abs(grad.as_slice());
    if stalled && gradient_norm < 1e-8 && step_norm >= 1e-4 * max_abs(&gamma).max(1.0) {
        separation = true;
    }
    let converged = !separation && (optimum || (stalled && gradient_norm < 1e-8));
    Ok(LogisticFit {
        gamma,
        converged,
        n_iterations: iterations,
        neg_hessian: to_rows(&info),
        gradient_norm,
        separation,
    })
}

/// Indicator of a kernel density estimate of the index at each subject's own
/// value being at least `threshold`. A zero threshold keeps every subject.
pub fn trim_by_index_density(
    index_values: &[f64],
    bandwidth: f64,
    kernel: Kernel,
    threshold: f64,
) -> Vec<f64> {
    if threshold <= 0.0 {
        return vec![1.0; index_values.len()];
    }
    index_density(index_values, bandwidth, kernel)
        .into_iter()
        .map(|f| if f >= threshold { 1.0 } else { 0.0 })
        .collect()
}

/// Kernel density estimate of the index evaluated at each observation.
pub fn index_density(index_values: &[f64], bandwidth: f64, kernel: Kernel) -> Vec<f64> {
    let n = index_values.len() as f64;
    index_values
        .iter()
        .map(|&u| {
            index_values
                .iter()
                .map(|&v| kernel.scaled(v - u, bandwidth))
                .sum::<f64>()
                / n
        })
        .collect()
}
