//! Quantities shared by every fitted logistic-Cox mixture cure model.

use crate::cox::uncured_survival_from;
use crate::linalg::dot;
use crate::logistic::{phi, softplus};
use crate::survival_core::{Dataset, StepFunction, Subject};

/// Read access to a fitted `(gamma, beta, baseline)` triple.
pub trait CureModel {
    /// Incidence coefficients, intercept first.
    fn gamma(&self) -> &[f64];
    fn beta(&self) -> &[f64];
    fn baseline_cum_hazard(&self) -> &StepFunction;

    /// Probability of being uncured, `phi(gamma'(1, x))`.
    fn uncure_probability(&self, x: &[f64]) -> f64 {
        phi(incidence_predictor(self.gamma(), x))
    }

    /// Survival of the uncured with zero-tail completion.
    fn uncured_survival(&self, t: f64, z: &[f64]) -> f64 {
        uncured_survival_from(self.baseline_cum_hazard(), self.beta(), t, z)
    }

    /// Population survival `1 - phi + phi * S_u`.
    fn population_survival(&self, t: f64, x: &[f64], z: &[f64]) -> f64 {
        let p = self.uncure_probability(x);
        1.0 - p + p * self.uncured_survival(t, z)
    }
}

/// `gamma'(1, x)` with `gamma[0]` the intercept.
#[inline]
pub fn incidence_predictor(gamma: &[f64], x: &[f64]) -> f64 {
    gamma[0] + dot(&gamma[1..], x)
}

/// Posterior probability of being uncured given the observed record:
/// `w = d + (1 - d) phi S_u / (1 - phi + phi S_u)`.
pub fn e_step(gamma: &[f64], beta: &[f64], baseline: &StepFunction, dataset: &Dataset) -> Vec<f64> {
    dataset
        .subjects()
        .iter()
        .map(|s| posterior_uncure(gamma, beta, baseline, s))
        .collect()
}

/// Posterior uncure probability of a single subject.
pub fn posterior_uncure(gamma: &[f64], beta: &[f64], baseline: &StepFunction, s: &Subject) -> f64 {
    if s.event {
        return 1.0;
    }
    let p = phi(incidence_predictor(gamma, &s.x)).min(1.0 - 1e-10);
    let su = uncured_survival_from(baseline, beta, s.time, &s.z);
    let num = p * su;
    (num / (1.0 - p + num)).clamp(0.0, 1.0)
}

/// Observed-data log-likelihood of the mixture model with a discrete
/// baseline hazard; the uncured density at an event time is the hazard jump
/// times the survival. Probabilities are floored at `eps` inside logs.
pub fn observed_loglik(
    gamma: &[f64],
    beta: &[f64],
    baseline: &StepFunction,
    dataset: &Dataset,
    eps: f64,
) -> f64 {
    dataset
        .subjects()
        .iter()
        .map(|s| {
            let eta = incidence_predictor(gamma, &s.x);
            if s.event {
                let lp = dot(beta, &s.z);
                let jump = baseline.jump_at(s.time).max(eps);
                let cum = baseline.eval(s.time);
                // log phi + log dL0 + b'z - L0 exp(b'z)
                -softplus(-eta) + jump.ln() + lp - cum * lp.exp()
            } else {
                let p = phi(eta);
                let su = uncured_survival_from(baseline, beta, s.time, &s.z);
                (1.0 - p + p * su).max(eps).ln()
            }
        })
        .sum()
}
