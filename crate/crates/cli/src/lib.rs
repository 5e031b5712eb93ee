//! Configuration-driven experiment runner for `rwrs-core`.
//!
//! A run reads an [`ExperimentConfig`], validates it, writes result CSVs and
//! a `summary.json` into the output directory, and finishes with a
//! `manifest.json` that records the full configuration for an exact rerun.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;

use serde_json::json;

pub use config::{BoundSpec, ExperimentConfig, ExperimentKind, Theorem};
pub use error::CliError;
pub use output::OutputDir;
pub use plot::{emit_plot_data, PlotRow};

/// Validate and run `cfg`; returns the names of the files written.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    cfg.validate()?;
    let mut out = OutputDir::new(&cfg.output);
    experiments::run_experiment(cfg, &mut out)?;
    let files = out.files().to_vec();
    out.json(
        "manifest.json",
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "files": files,
        }),
    )?;
    Ok(out.files().to_vec())
}
