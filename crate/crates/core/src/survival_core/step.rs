use serde::{Deserialize, Serialize};

/// Right-continuous piecewise-constant function on `[0, inf)`.
///
/// `values[k]` holds on `[jump_times[k], jump_times[k+1])` and
/// `initial_value` on `[0, jump_times[0])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    jump_times: Vec<f64>,
    values: Vec<f64>,
    initial_value: f64,
}

impl StepFunction {
    /// Panics if the lengths differ or the jump times are not strictly increasing.
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>, initial_value: f64) -> Self {
        assert_eq!(jump_times.len(), values.len(), "jump/value length mismatch");
        assert!(
            jump_times.windows(2).all(|w| w[0] < w[1]),
            "jump times must be strictly increasing"
        );
        Self {
            jump_times,
            values,
            initial_value,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Vec::new(), Vec::new(), value)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn last_jump(&self) -> Option<f64> {
        self.jump_times.last().copied()
    }

    pub fn eval(&self, t: f64) -> f64 {
        // number of jump times <= t
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            self.initial_value
        } else {
            self.values[k - 1]
        }
    }

    /// Size of the jump exactly at `t` (zero when `t` is not a jump time).
    pub fn jump_at(&self, t: f64) -> f64 {
        match self
            .jump_times
            .binary_search_by(|s| s.partial_cmp(&t).expect("NaN jump time"))
        {
            Ok(k) => {
                let before = if k == 0 {
                    self.initial_value
                } else {
                    self.values[k - 1]
                };
                self.values[k] - before
            }
            Err(_) => 0.0,
        }
    }

    pub fn is_non_increasing(&self) -> bool {
        let mut prev = self.initial_value;
        self.values.iter().all(|&v| {
            let ok = v <= prev;
            prev = v;
            ok
        })
    }

    pub fn is_non_decreasing(&self) -> bool {
        let mut prev = self.initial_value;
        self.values.iter().all(|&v| {
            let ok = v >= prev;
            prev = v;
            ok
        })
    }

    /// Largest absolute difference between two step functions over all jump points.
    pub fn max_abs_diff(&self, other: &StepFunction) -> f64 {
        let mut diff = (self.initial_value - other.initial_value).abs();
        for &t in self.jump_times.iter().chain(&other.jump_times) {
            diff = diff.max((self.eval(t) - other.eval(t)).abs());
        }
        diff
    }
}
