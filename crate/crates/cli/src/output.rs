use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::pipeline::PipelineOutput;
use crate::records::{SpectraRecord, CSV_HEADER};

pub const TOOLKIT: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerEntry {
    pub k: usize,
    pub omega: f64,
    pub value: f64,
    pub degenerate: bool,
}

/// Sidecar describing how a record file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub n: usize,
    pub d: usize,
    pub columns: Vec<String>,
    pub quantiles: Vec<f64>,
    pub kernel: Option<String>,
    pub bandwidth: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub fourier_indices: Vec<usize>,
    pub normalizers: Vec<NormalizerEntry>,
    pub format: OutputFormat,
}

impl Metadata {
    pub fn for_analysis(output: &PipelineOutput, alpha: f64, seed: Option<u64>, format: OutputFormat) -> Self {
        let spec = &output.spectrum;
        Self {
            toolkit: TOOLKIT.into(),
            version: VERSION.into(),
            command: "analyze".into(),
            n: spec.n(),
            d: spec.d(),
            columns: output.series.names().to_vec(),
            quantiles: spec.levels().levels().to_vec(),
            kernel: Some(spec.kernel().kind.to_string()),
            bandwidth: Some(spec.bandwidth()),
            alpha: Some(alpha),
            seed,
            fourier_indices: output.selected.clone(),
            normalizers: spec
                .normalizers()
                .iter()
                .enumerate()
                .map(|(k, w)| NormalizerEntry {
                    k,
                    omega: spec.omegas()[k],
                    value: w.value,
                    degenerate: w.degenerate,
                })
                .collect(),
            format,
        }
    }
}

/// Shortest text that is still 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

pub fn records_file_name(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "spectra.csv",
        OutputFormat::Json => "spectra.json",
    }
}

pub const METADATA_FILE: &str = "metadata.json";

fn write_csv(records: &[SpectraRecord], path: &Path) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            fmt_real(r.omega),
            fmt_real(r.freq_cycles),
            fmt_real(r.tau1),
            fmt_real(r.tau2),
            r.j1.to_string(),
            r.j2.to_string(),
            r.quantity.to_string(),
            fmt_real(r.re),
            fmt_real(r.im),
            fmt_opt(r.ci_lo_re),
            fmt_opt(r.ci_hi_re),
            fmt_opt(r.ci_lo_im),
            fmt_opt(r.ci_hi_im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Writes the record file and its metadata sidecar into `dir`, creating it if needed.
pub fn write_outputs(
    records: &[SpectraRecord],
    format: OutputFormat,
    dir: &Path,
    metadata: &Metadata,
) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let data = dir.join(records_file_name(format));
    match format {
        OutputFormat::Csv => write_csv(records, &data)?,
        OutputFormat::Json => write_json(records, &data)?,
    }
    let meta = dir.join(METADATA_FILE);
    write_json(metadata, &meta)?;
    Ok(vec![data, meta])
}

pub fn read_records_csv(path: &Path) -> anyhow::Result<Vec<SpectraRecord>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    reader
        .deserialize()
        .map(|r| r.with_context(|| format!("bad record in {}", path.display())))
        .collect()
}

pub fn read_records_json(path: &Path) -> anyhow::Result<Vec<SpectraRecord>> {
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}
