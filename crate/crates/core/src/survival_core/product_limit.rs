//! Kaplan–Meier and kernel-weighted (Beran) product-limit estimators.
//!
//! Ties: all events sharing a time form one factor; a censored observation
//! tied with an event time stays in that event's risk set.

use crate::error::{CureError, Result};
use crate::survival_core::{Dataset, Kernel, StepFunction};

/// Time-sorted view of `(times, events)` shared by the product-limit routines.
#[derive(Debug, Clone)]
pub(crate) struct SortedSample {
    /// subject indices in ascending time order
    order: Vec<usize>,
    /// distinct event times, ascending
    event_times: Vec<f64>,
    /// for each distinct event time, position in `order` of the first subject with `Y >= t`
    risk_start: Vec<usize>,
    /// for each distinct event time, the subjects with an event exactly at it
    event_members: Vec<Vec<usize>>,
    /// for each distinct event time, number of subjects with `Y <= t`
    prefix_len: Vec<usize>,
}

impl SortedSample {
    pub(crate) fn new(times: &[f64], events: &[bool]) -> Self {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

        let mut event_times = Vec::new();
        let mut risk_start = Vec::new();
        let mut event_members: Vec<Vec<usize>> = Vec::new();
        let mut prefix_len = Vec::new();

        let mut pos = 0;
        while pos < order.len() {
            let t = times[order[pos]];
            let mut end = pos;
            let mut members = Vec::new();
            while end < order.len() && times[order[end]] == t {
                if events[order[end]] {
                    members.push(order[end]);
                }
                end += 1;
            }
            if !members.is_empty() {
                event_times.push(t);
                risk_start.push(pos);
                event_members.push(members);
                prefix_len.push(end);
            }
            pos = end;
        }

        Self {
            order,
            event_times,
            risk_start,
            event_members,
            prefix_len,
        }
    }

    pub(crate) fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    /// Weighted product-limit survival evaluated at each distinct event time.
    pub(crate) fn product_limit(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.order.len();
        let mut suffix = vec![0.0; n + 1];
        for pos in (0..n).rev() {
            suffix[pos] = suffix[pos + 1] + weights[self.order[pos]];
        }
        let mut surv = 1.0;
        let mut out = Vec::with_capacity(self.event_times.len());
        for (k, members) in self.event_members.iter().enumerate() {
            let at_risk = suffix[self.risk_start[k]];
            let d: f64 = members.iter().map(|&i| weights[i]).sum();
            if at_risk > 0.0 && d > 0.0 {
                let factor = (1.0 - d / at_risk).clamp(0.0, 1.0);
                surv *= factor;
            }
            out.push(surv);
        }
        out
    }

    /// Final value of the weighted product-limit estimator (at the largest event time).
    pub(crate) fn plateau(&self, weights: &[f64]) -> f64 {
        self.product_limit(weights).last().copied().unwrap_or(1.0).clamp(0.0, 1.0)
    }

    pub(crate) fn order(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn prefix_len(&self) -> &[usize] {
        &self.prefix_len
    }

    pub(crate) fn risk_start_at(&self, k: usize) -> usize {
        self.risk_start[k]
    }

    pub(crate) fn event_members_at(&self, k: usize) -> &[usize] {
        &self.event_members[k]
    }
}

fn check_lengths(index_values: &[f64], times: &[f64], events: &[bool]) -> Result<()> {
    if index_values.len() != times.len() || times.len() != events.len() {
        return Err(CureError::InvalidInput(format!(
            "length mismatch: index {}, times {}, events {}",
            index_values.len(),
            times.len(),
            events.len()
        )));
    }
    if times.is_empty() {
        return Err(CureError::InvalidInput("empty sample".into()));
    }
    if !events.iter().any(|&e| e) {
        return Err(CureError::InvalidInput("no observed events".into()));
    }
    Ok(())
}

/// Product-limit estimator of the survival function.
pub fn kaplan_meier(dataset: &Dataset) -> StepFunction {
    kaplan_meier_raw(&dataset.times(), &dataset.events())
}

pub(crate) fn kaplan_meier_raw(times: &[f64], events: &[bool]) -> StepFunction {
    let sample = SortedSample::new(times, events);
    let values = sample.product_limit(&vec![1.0; times.len()]);
    StepFunction::new(sample.event_times.clone(), values, 1.0)
}

/// Normalized Nadaraya–Watson weights at `u`, or a degenerate-neighborhood error.
pub fn nadaraya_watson_weights(
    index_values: &[f64],
    u: f64,
    bandwidth: f64,
    kernel: Kernel,
) -> Result<Vec<f64>> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(CureError::InvalidInput(format!(
            "bandwidth must be positive and finite, got {bandwidth}"
        )));
    }
    let mut w: Vec<f64> = index_values
        .iter()
        .map(|&v| kernel.evaluate((v - u) / bandwidth))
        .collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(CureError::DegenerateNeighborhood { u, bandwidth });
    }
    for wi in &mut w {
        *wi /= total;
    }
    Ok(w)
}

/// Conditional product-limit estimator of `S(t | index = u)`.
pub fn beran_survival(
    index_values: &[f64],
    times: &[f64],
    events: &[bool],
    u: f64,
    bandwidth: f64,
    kernel: Kernel,
) -> Result<StepFunction> {
    check_lengths(index_values, times, events)?;
    let w = nadaraya_watson_weights(index_values, u, bandwidth, kernel)?;
    let sample = SortedSample::new(times, events);
    let values = sample.product_limit(&w);
    Ok(StepFunction::new(sample.event_times.clone(), values, 1.0))
}

/// Nonparametric cure probability: the Beran estimator evaluated at the
/// largest observed event time.
pub fn nonparametric_cure_prob(
    index_values: &[f64],
    times: &[f64],
    events: &[bool],
    u: f64,
    bandwidth: f64,
    kernel: Kernel,
) -> Result<f64> {
    check_lengths(index_values, times, events)?;
    let w = nadaraya_watson_weights(index_values, u, bandwidth, kernel)?;
    Ok(SortedSample::new(times, events).plateau(&w))
}

/// Cure probability at every subject's own index value. Entries are `None`
/// where the kernel window is empty.
pub fn cure_probs_at_own_index(
    index_values: &[f64],
    times: &[f64],
    events: &[bool],
    bandwidth: f64,
    kernel: Kernel,
) -> Result<Vec<Option<f64>>> {
    check_lengths(index_values, times, events)?;
    let sample = SortedSample::new(times, events);
    index_values
        .iter()
        .map(|&u| match nadaraya_watson_weights(index_values, u, bandwidth, kernel) {
            Ok(w) => Ok(Some(sample.plateau(&w))),
            Err(CureError::DegenerateNeighborhood { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}
