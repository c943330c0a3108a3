use std::io::Write;

use curemix::inference::{bootstrap_inference, pe_comparison, summarize_pe, PredictionErrorResult};
use curemix::simulation::{run_monte_carlo, write_rows_csv, MonteCarloReport, ScenarioConfig};
use curemix::{fit_em, fit_two_step, EmConfig, Estimator, TwoStepConfig};
use serde::{Deserialize, Serialize};

use crate::args::{FitArgs, PeArgs, SimulateArgs, SmoothingArgs};
use crate::error::CliError;
use crate::input::load_dataset;
use crate::output::{fmt_opt, render_table, write_atomic};
use crate::report::{EstimatorBlock, FitReport, SCHEMA_VERSION};

fn two_step_config(s: &SmoothingArgs) -> Result<TwoStepConfig, CliError> {
    if !(s.trim >= 0.0 && s.trim.is_finite()) {
        return Err(CliError::Input(format!("--trim must be a non-negative number, got {}", s.trim)));
    }
    if let Some(b) = s.bandwidth {
        if !(b > 0.0 && b.is_finite()) {
            return Err(CliError::Input(format!("--bandwidth must be positive, got {b}")));
        }
    }
    if s.max_em_iterations == 0 {
        return Err(CliError::Input("--max-em-iterations must be positive".into()));
    }
    Ok(TwoStepConfig {
        trim_threshold: s.trim,
        bandwidth_override: s.bandwidth,
        em: EmConfig {
            max_iterations: s.max_em_iterations,
            ..EmConfig::default()
        },
        ..TwoStepConfig::default()
    })
}

fn coefficient_table(block: &EstimatorBlock) -> String {
    let header: Vec<String> = ["", "Estimate", "SE", "p-value"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for (label, part) in [("Incidence", &block.incidence), ("Latency", &block.latency)] {
        rows.push(vec![label.to_string(), String::new(), String::new(), String::new()]);
        for c in part {
            rows.push(vec![
                format!("  {}", c.covariate),
                format!("{:.4}", c.estimate),
                fmt_opt(c.se, 4),
                fmt_opt(c.p_value, 4),
            ]);
        }
    }
    render_table(&header, &rows)
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitReport, CliError> {
    let cfg = two_step_config(&args.smoothing)?;
    if args.bootstrap == 1 {
        return Err(CliError::Input("--bootstrap must be 0 or at least 2".into()));
    }
    let loaded = load_dataset(&args.data.input, &args.data.columns())?;
    let data = &loaded.dataset;
    if data.n_events() == data.len() {
        return Err(CliError::Input("every subject has an event; a cure model needs censored subjects".into()));
    }

    let em = fit_em(data, &cfg.em)?;
    if !em.converged {
        eprintln!(
            "warning: EM did not converge within {} iterations",
            cfg.em.max_iterations
        );
    }
    let mut fits = Vec::new();
    for est in args.estimator.estimators() {
        let (estimates, bandwidth) = match est {
            Estimator::Em => (em.gamma.iter().chain(&em.beta).copied().collect::<Vec<_>>(), None),
            Estimator::TwoStep => {
                let ts = fit_two_step(data, &em, &cfg)?;
                let v = ts.gamma.iter().chain(&ts.beta).copied().collect();
                (v, Some(ts.bandwidth))
            }
        };
        let inference = if args.bootstrap > 0 {
            Some(bootstrap_inference(data, est, args.bootstrap, args.seed, &cfg)?)
        } else {
            None
        };
        let mut block = EstimatorBlock::from_estimates(
            est,
            &args.data.incidence,
            &args.data.latency,
            &estimates,
            em.converged,
            inference.as_ref(),
        );
        block.bandwidth = bandwidth;
        fits.push(block);
    }

    let report = FitReport {
        schema_version: SCHEMA_VERSION,
        input: args.data.input.display().to_string(),
        n: data.len(),
        n_events: data.n_events(),
        n_dropped_rows: loaded.n_dropped,
        seed: args.seed,
        bootstrap: args.bootstrap,
        fits,
    };

    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "n = {} ({} events, {} rows dropped for missing values)",
        report.n, report.n_events, report.n_dropped_rows
    );
    for block in &report.fits {
        let _ = writeln!(out, "\n[{}]", block.estimator);
        if let Some(b) = block.bandwidth {
            let _ = writeln!(out, "bandwidth = {b:.4}");
        }
        let _ = write!(out, "{}", coefficient_table(block));
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
        write_atomic(path, json.as_bytes())?;
    }
    Ok(report)
}

fn simulation_table(report: &MonteCarloReport, estimators: &[Estimator]) -> String {
    let mut header = vec!["parameter".to_string()];
    for e in estimators {
        for stat in ["bias", "var", "mse"] {
            header.push(format!("{e} {stat}"));
        }
    }
    let names = report.config.parameter_names();
    let rows: Vec<Vec<String>> = names
        .iter()
        .map(|name| {
            let mut row = vec![name.clone()];
            for &e in estimators {
                let r = report.row(e, name);
                row.push(fmt_opt(r.and_then(|r| r.bias), 3));
                row.push(fmt_opt(r.and_then(|r| r.variance), 3));
                row.push(fmt_opt(r.and_then(|r| r.mse), 3));
            }
            row
        })
        .collect();
    render_table(&header, &rows)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<MonteCarloReport, CliError> {
    let cfg = two_step_config(&args.smoothing)?;
    let mut scenario = ScenarioConfig::from_catalog(args.model, args.scenario, args.n, args.seed)?
        .with_misspecification(args.misspecify)?;
    scenario.tie_z1_to_x1 = args.tie_z1;
    let estimators = args.estimators.estimators();
    let report = run_monte_carlo(&scenario, args.reps, &estimators, args.seed, &cfg)?;

    let mut buf = Vec::new();
    write_rows_csv(&report.rows, &mut buf)?;
    write_atomic(&args.out, &buf)?;
    if let Some(path) = &args.json {
        write_atomic(path, report.to_json()?.as_bytes())?;
    }

    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "Model {} scenario {}, n = {}, {} replications",
        args.model, args.scenario, args.n, args.reps
    );
    let _ = writeln!(
        out,
        "cure rate {:.1}%, censoring rate {:.1}%, EM non-converged {}, 2-step failures {}\n",
        100.0 * report.empirical_cure_rate,
        100.0 * report.empirical_censor_rate,
        report.n_nonconverged_em,
        report.n_failed_two_step
    );
    let _ = write!(out, "{}", simulation_table(&report, &estimators));
    Ok(report)
}

/// One line of the per-split prediction-error CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeRow {
    pub split: usize,
    pub split_seed: u64,
    pub pe_two_step: Option<f64>,
    pub pe_em: Option<f64>,
    pub difference: Option<f64>,
}

impl From<&PredictionErrorResult> for PeRow {
    fn from(r: &PredictionErrorResult) -> Self {
        Self {
            split: r.split,
            split_seed: r.split_seed,
            pe_two_step: r.pe_two_step,
            pe_em: r.pe_em,
            difference: r.difference(),
        }
    }
}

pub fn cmd_pe(args: &PeArgs) -> Result<Vec<PeRow>, CliError> {
    let cfg = two_step_config(&args.smoothing)?;
    if args.splits == 0 {
        return Err(CliError::Input("--splits must be positive".into()));
    }
    let loaded = load_dataset(&args.data.input, &args.data.columns())?;
    let results = pe_comparison(&loaded.dataset, args.splits, args.seed, &cfg)?;
    let rows: Vec<PeRow> = results.iter().map(PeRow::from).collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    write_atomic(&args.out, &bytes)?;

    match summarize_pe(&results) {
        Some(s) => println!(
            "splits {} (valid {}), median PE difference (two_step - em) {:.4}, fraction negative {:.3}",
            args.splits, s.n_valid, s.median_difference, s.fraction_negative
        ),
        None => return Err(CliError::Fit("no split produced both fits".into())),
    }
    Ok(rows)
}
