use serde::{Deserialize, Serialize};

use crate::error::{CureError, Result};

/// One calibrated cell: intercept, censoring parameter and target rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub model: u8,
    pub scenario: u8,
    pub gamma0_intercept: f64,
    pub lambda_c: f64,
    pub censoring_rate: f64,
    pub cure_rate: f64,
}

const fn cell(model: u8, scenario: u8, g0: f64, lc: f64, cens: f64, cure: f64) -> CatalogEntry {
    CatalogEntry {
        model,
        scenario,
        gamma0_intercept: g0,
        lambda_c: lc,
        censoring_rate: cens,
        cure_rate: cure,
    }
}

/// Scenario catalog for Models 1-5.
pub const CATALOG: [CatalogEntry; 13] = [
    cell(1, 1, 2.0, 0.4, 0.36, 0.20),
    cell(1, 2, 0.6, 0.4, 0.50, 0.40),
    cell(1, 3, -0.5, 0.3, 0.63, 0.58),
    cell(2, 1, 1.6, 1.0 / 35.0, 0.30, 0.20),
    cell(2, 2, 0.4, 1.0 / 20.0, 0.45, 0.40),
    cell(2, 3, -0.6, 1.0, 0.75, 0.60),
    cell(3, 1, 2.0, 1.0 / 9.0, 0.35, 0.20),
    cell(3, 2, 0.9, 1.0 / 7.0, 0.50, 0.40),
    cell(3, 3, -0.1, 1.0 / 7.0, 0.65, 0.60),
    // 0.6 gives ~49% censoring here; 0.06 gives the 25% target
    cell(4, 1, 1.5, 0.06, 0.25, 0.20),
    cell(4, 2, 0.3, 0.3, 0.55, 0.40),
    cell(4, 3, -0.6, 0.4, 0.70, 0.60),
    cell(5, 1, 1.4, 1.0 / 22.0, 0.45, 0.30),
];

pub fn catalog_entry(model: u8, scenario: u8) -> Result<CatalogEntry> {
    CATALOG
        .iter()
        .find(|c| c.model == model && c.scenario == scenario)
        .copied()
        .ok_or_else(|| {
            let cells: Vec<String> = CATALOG
                .iter()
                .map(|c| format!("{}/{}", c.model, c.scenario))
                .collect();
            CureError::InvalidInput(format!(
                "unknown (model, scenario) = ({model}, {scenario}); valid cells: {}",
                cells.join(", ")
            ))
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: u8,
    pub scenario: u8,
    pub n: usize,
    pub gamma0_intercept: f64,
    pub lambda_c: f64,
    pub seed: u64,
    /// Model 4 only: fit the latency on `x_1..x_5` instead of `z_1..z_3`
    pub misspecify_latency_covariates: bool,
    /// Models 3 and 4: use `z_1 = x_1` instead of an independent draw
    pub tie_z1_to_x1: bool,
}

impl ScenarioConfig {
    pub fn from_catalog(model: u8, scenario: u8, n: usize, seed: u64) -> Result<Self> {
        let entry = catalog_entry(model, scenario)?;
        let cfg = Self {
            model,
            scenario,
            n,
            gamma0_intercept: entry.gamma0_intercept,
            lambda_c: entry.lambda_c,
            seed,
            misspecify_latency_covariates: false,
            tie_z1_to_x1: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_misspecification(mut self, on: bool) -> Result<Self> {
        self.misspecify_latency_covariates = on;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        catalog_entry(self.model, self.scenario)?;
        if self.n == 0 {
            return Err(CureError::InvalidInput("sample size must be positive".into()));
        }
        if !(self.lambda_c > 0.0 && self.lambda_c.is_finite()) {
            return Err(CureError::InvalidInput("lambda_c must be positive".into()));
        }
        if self.misspecify_latency_covariates && self.model != 4 {
            return Err(CureError::InvalidInput(
                "latency misspecification is defined for Model 4 only".into(),
            ));
        }
        Ok(())
    }

    /// True incidence coefficients, intercept first.
    pub fn true_gamma(&self) -> Vec<f64> {
        let g0 = self.gamma0_intercept;
        match self.model {
            1 => vec![g0, 1.5, 1.5],
            2 => vec![g0, -1.0, 1.0, -0.3],
            3 => vec![g0, -0.3, 0.8, 0.5, -1.0],
            4 => vec![g0, -0.8, 0.3, -0.4, 0.5, 0.6],
            _ => vec![1.4, 2.0, 1.0, -1.0],
        }
    }

    /// True latency coefficients for the covariates the estimators see.
    pub fn true_beta(&self) -> Vec<f64> {
        match self.model {
            1 => vec![0.5, 0.3],
            2 => vec![-0.8, 1.5, -0.5],
            3 => vec![0.1, 0.4, -0.2],
            4 if self.misspecify_latency_covariates => vec![0.0, 0.0, -0.5, 0.3, 0.0],
            4 => vec![0.2, -0.5, 0.3],
            _ => vec![1.0, 0.4, -0.6],
        }
    }

    pub fn parameter_names(&self) -> Vec<String> {
        let g = self.true_gamma().len();
        let b = self.true_beta().len();
        (1..=g)
            .map(|k| format!("gamma_{k}"))
            .chain((1..=b).map(|k| format!("beta_{k}")))
            .collect()
    }
}
