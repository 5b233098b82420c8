//! Batch front end for quantile cross-spectral analysis: CSV ingestion,
//! pipeline orchestration, simulation and flat record output.

pub mod config;
pub mod data;
pub mod output;
pub mod pipeline;
pub mod records;

pub use config::{Bandwidth, InputSource, OmegaSelection, OutputFormat, RunConfig, Simulation, SimulationModel};
pub use data::{load_csv, write_series_csv, DataError};
pub use output::{read_records_csv, read_records_json, write_outputs, Metadata};
pub use pipeline::{analyze_series, run_pipeline, simulate, PipelineOutput};
pub use records::{oracle_records, spectra_records, Quantity, SpectraRecord};

/// Runs the pipeline and writes its records and metadata; returns the written paths.
pub fn analyze(config: &RunConfig) -> anyhow::Result<Vec<std::path::PathBuf>> {
    let output = run_pipeline(config)?;
    let records = spectra_records(&output);
    let meta = Metadata::for_analysis(&output, config.alpha, config.seed(), config.format);
    write_outputs(&records, config.format, &config.out, &meta)
}
