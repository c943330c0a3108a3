use serde::{Deserialize, Serialize};

use crate::error::{CureError, Result};

/// One right-censored observation.
///
/// `x` holds the incidence covariates without the intercept; the intercept
/// column is added when a design matrix is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub time: f64,
    pub event: bool,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl Subject {
    pub fn new(time: f64, event: bool, x: Vec<f64>, z: Vec<f64>) -> Self {
        Self { time, event, x, z }
    }

    pub fn delta(&self) -> f64 {
        if self.event {
            1.0
        } else {
            0.0
        }
    }
}

/// A validated sample of censored observations sharing covariate dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    subjects: Vec<Subject>,
    p: usize,
    q: usize,
}

impl Dataset {
    pub fn new(subjects: Vec<Subject>) -> Result<Self> {
        let first = subjects
            .first()
            .ok_or_else(|| CureError::InvalidInput("dataset is empty".into()))?;
        let (p, q) = (first.x.len(), first.z.len());
        for (i, s) in subjects.iter().enumerate() {
            if !(s.time.is_finite() && s.time > 0.0) {
                return Err(CureError::InvalidInput(format!(
                    "subject {i}: time must be positive and finite, got {}",
                    s.time
                )));
            }
            if s.x.len() != p || s.z.len() != q {
                return Err(CureError::InvalidInput(format!(
                    "subject {i}: covariate dimensions ({}, {}) differ from ({p}, {q})",
                    s.x.len(),
                    s.z.len()
                )));
            }
            if s.x.iter().chain(&s.z).any(|v| !v.is_finite()) {
                return Err(CureError::InvalidInput(format!(
                    "subject {i}: non-finite covariate"
                )));
            }
        }
        if !subjects.iter().any(|s| s.event) {
            return Err(CureError::InvalidInput(
                "dataset has no observed events".into(),
            ));
        }
        Ok(Self { subjects, p, q })
    }

    /// Builds a dataset from column vectors. `x` and `z` are row-major per subject.
    pub fn from_columns(
        times: &[f64],
        events: &[bool],
        x: &[Vec<f64>],
        z: &[Vec<f64>],
    ) -> Result<Self> {
        let n = times.len();
        if events.len() != n || x.len() != n || z.len() != n {
            return Err(CureError::InvalidInput(
                "column lengths differ".into(),
            ));
        }
        let subjects = (0..n)
            .map(|i| Subject::new(times[i], events[i], x[i].clone(), z[i].clone()))
            .collect();
        Self::new(subjects)
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// Number of incidence covariates (intercept excluded).
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of latency covariates.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn times(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.time).collect()
    }

    pub fn events(&self) -> Vec<bool> {
        self.subjects.iter().map(|s| s.event).collect()
    }

    pub fn n_events(&self) -> usize {
        self.subjects.iter().filter(|s| s.event).count()
    }

    /// Largest observed event time.
    pub fn last_event_time(&self) -> f64 {
        self.subjects
            .iter()
            .filter(|s| s.event)
            .map(|s| s.time)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Incidence design row `(1, x)`.
    pub fn design_row(&self, i: usize) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.p + 1);
        row.push(1.0);
        row.extend_from_slice(&self.subjects[i].x);
        row
    }

    /// Row-major `n x (p+1)` incidence design with a leading intercept column.
    pub fn incidence_design(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.design_row(i)).collect()
    }

    /// Subset by index; indices may repeat (bootstrap resampling).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.subjects[i].clone()).collect())
    }

    /// Replaces every subject's latency covariates with its incidence covariates.
    pub fn with_latency_from_incidence(&self) -> Self {
        let subjects: Vec<Subject> = self
            .subjects
            .iter()
            .map(|s| Subject::new(s.time, s.event, s.x.clone(), s.x.clone()))
            .collect();
        Self {
            subjects,
            p: self.p,
            q: self.p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_eventless() {
        assert!(matches!(Dataset::new(vec![]), Err(CureError::InvalidInput(_))));
        let s = Subject::new(1.0, false, vec![], vec![]);
        assert!(Dataset::new(vec![s]).is_err());
    }

    #[test]
    fn rejects_nonpositive_time_and_ragged_dims() {
        let ok = Subject::new(1.0, true, vec![0.0], vec![]);
        let bad_time = Subject::new(0.0, true, vec![0.0], vec![]);
        assert!(Dataset::new(vec![ok.clone(), bad_time]).is_err());
        let ragged = Subject::new(2.0, false, vec![0.0, 1.0], vec![]);
        assert!(Dataset::new(vec![ok, ragged]).is_err());
    }

    #[test]
    fn design_row_prepends_intercept() {
        let d = Dataset::new(vec![Subject::new(1.0, true, vec![2.0, 3.0], vec![4.0])]).unwrap();
        assert_eq!(d.design_row(0), vec![1.0, 2.0, 3.0]);
        assert_eq!((d.p(), d.q()), (2, 1));
    }
}
