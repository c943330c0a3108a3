//! Data generators for Models 1-5 and the Monte Carlo experiment runner.

mod generate;
mod monte_carlo;
mod scenario;

pub use generate::{
    censoring_bound, generate_dataset, model5_censor_bound, model5_shape, model5_truncation, weibull_ph_time,
    HiddenTruth, SimulatedData, WEIBULL_SCALE, WEIBULL_SHAPE,
};
pub use monte_carlo::{
    error_summary, read_rows_csv, run_monte_carlo, write_rows_csv, MonteCarloReport, ReplicationRecord, ReportRow,
};
pub use scenario::{catalog_entry, CatalogEntry, ScenarioConfig, CATALOG};
