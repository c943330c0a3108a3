use serde::{Deserialize, Serialize};

/// Symmetric compactly supported smoothing kernels on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `(3/4)(1 - u^2)`
    #[default]
    Epanechnikov,
    /// `(15/16)(1 - u^2)^2`
    Biweight,
    /// `(35/32)(1 - u^2)^3`
    Triweight,
}

impl Kernel {
    #[inline]
    pub fn evaluate(self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        let s = 1.0 - u * u;
        match self {
            Kernel::Epanechnikov => 0.75 * s,
            Kernel::Biweight => 0.9375 * s * s,
            Kernel::Triweight => 1.09375 * s * s * s,
        }
    }

    pub fn support_radius(self) -> f64 {
        1.0
    }

    /// Scaled kernel `k(v / b) / b`.
    #[inline]
    pub fn scaled(self, v: f64, bandwidth: f64) -> f64 {
        self.evaluate(v / bandwidth) / bandwidth
    }
}

/// Epanechnikov kernel `(3/4)(1 - u^2)` on `|u| <= 1`.
#[inline]
pub fn epanechnikov(u: f64) -> f64 {
    Kernel::Epanechnikov.evaluate(u)
}
