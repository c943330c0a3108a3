use thiserror::Error;

/// Errors raised by the estimators and their building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CureError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every kernel weight vanished at the evaluation point.
    #[error("degenerate kernel neighborhood at u = {u} (bandwidth {bandwidth})")]
    DegenerateNeighborhood { u: f64, bandwidth: f64 },

    #[error("bandwidth selection failed: every grid value leaves some subject without neighbors")]
    BandwidthSelectionFailed,

    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("inference unreliable: {failed} of {total} bootstrap resamples failed")]
    InferenceUnreliable { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, CureError>;
