//! Leave-one-out least-squares cross-validation for the bandwidth of the
//! kernel-weighted conditional distribution of the follow-up time.

use rayon::prelude::*;

use crate::error::{CureError, Result};
use crate::survival_core::product_limit::SortedSample;
use crate::survival_core::Kernel;

/// Default grid: 30 log-spaced values from `0.05 * sd * n^(-1/5)` to the index range.
pub fn default_bandwidth_grid(index_values: &[f64]) -> Vec<f64> {
    const POINTS: usize = 30;
    let n = index_values.len() as f64;
    let (lo, hi) = index_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![1.0];
    }
    let mean = index_values.iter().sum::<f64>() / n;
    let sd = (index_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let start = 0.05 * sd * n.powf(-0.2);
    if !(start > 0.0) || start >= range {
        return vec![range];
    }
    let (a, b) = (start.ln(), range.ln());
    (0..POINTS)
        .map(|k| (a + (b - a) * k as f64 / (POINTS - 1) as f64).exp())
        .collect()
}

/// CV score for one bandwidth, or `None` when some subject has no neighbor.
pub fn cv_score(
    index_values: &[f64],
    times: &[f64],
    events: &[bool],
    bandwidth: f64,
    kernel: Kernel,
) -> Option<f64> {
    let sample = SortedSample::new(times, events);
    cv_score_sorted(&sample, index_values, times, bandwidth, kernel)
}

fn cv_score_sorted(
    sample: &SortedSample,
    index_values: &[f64],
    times: &[f64],
    bandwidth: f64,
    kernel: Kernel,
) -> Option<f64> {
    let order = sample.order();
    let n = order.len();
    let mut prefix = vec![0.0; n + 1];
    let mut score = 0.0;
    for i in 0..n {
        let ui = index_values[i];
        for (pos, &j) in order.iter().enumerate() {
            let kij = if j == i {
                0.0
            } else {
                kernel.evaluate((index_values[j] - ui) / bandwidth)
            };
            prefix[pos + 1] = prefix[pos] + kij;
        }
        let total = prefix[n];
        if total <= 0.0 {
            return None;
        }
        for (k, &t) in sample.event_times().iter().enumerate() {
            let h = prefix[sample.prefix_len()[k]] / total;
            let indicator = if times[i] <= t { 1.0 } else { 0.0 };
            score += (indicator - h).powi(2);
        }
    }
    Some(score)
}

/// Grid value minimizing the CV criterion; ties go to the smaller bandwidth.
pub fn cv_bandwidth(
    index_values: &[f64],
    times: &[f64],
    events: &[bool],
    grid: &[f64],
    kernel: Kernel,
) -> Result<f64> {
    if grid.is_empty() || grid.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(CureError::InvalidInput(
            "bandwidth grid must be non-empty and positive".into(),
        ));
    }
    if index_values.len() != times.len() || times.len() != events.len() {
        return Err(CureError::InvalidInput("length mismatch".into()));
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let sample = SortedSample::new(times, events);
    let scores: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&b| cv_score_sorted(&sample, index_values, times, b, kernel))
        .collect();
    grid.iter()
        .zip(&scores)
        .filter_map(|(&b, s)| s.map(|s| (b, s)))
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
        .map(|(b, _)| b)
        .ok_or(CureError::BandwidthSelectionFailed)
}
