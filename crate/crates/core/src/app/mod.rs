//! Configuration loading, experiment orchestration, and CSV/JSON output.

mod config;
mod experiment;
mod output;

use std::collections::HashSet;

pub use config::{
    load_config, DiagnosticsConfig, FaultConfig, FitConfig, FitQuantity, GridConfig, InitialConfig,
    ModelConfig, OutputConfig, RunConfig, SolverSection,
};
pub use experiment::{
    config_hash, run_experiment, DiagnosticsSection, Experiment, FailureInfo, FitReport, OverallVerdict,
    Report, RunStatus, StepCounts,
};
pub use output::{csv_header, emit_outputs, render_csv, render_report, write_atomic};

use crate::error::{Error, Result, ValidationIssue};

/// Run independent experiments on separate threads. Output paths must not
/// collide. Results come back in input order.
pub fn run_sweep(configs: &[RunConfig]) -> Result<Vec<Result<Experiment>>> {
    let mut seen = HashSet::new();
    let mut issues = Vec::new();
    for (k, cfg) in configs.iter().enumerate() {
        for (field, path) in [("csv", &cfg.output.csv), ("report", &cfg.output.report)] {
            if !seen.insert(path.clone()) {
                issues.push(ValidationIssue {
                    path: format!("sweep[{k}].output.{field}"),
                    message: format!("{} is written by another configuration", path.display()),
                });
            }
        }
    }
    if !issues.is_empty() {
        return Err(Error::ConfigInvalid(issues));
    }
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || run_experiment(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    }))
}
