use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use quantile_spectra::{default_bandwidth, KernelSpec, ModelSpec, QuantileGrid, ToyKind};
use serde::{Deserialize, Serialize};

/// Where the analyzed series comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Csv {
        path: PathBuf,
        columns: Option<Vec<String>>,
    },
    Simulated(Simulation),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulationModel {
    Model(ModelSpec),
    Toy(ToyKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub model: SimulationModel,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    Auto,
    #[serde(untagged)]
    Value(f64),
}

impl Bandwidth {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Bandwidth::Auto => default_bandwidth(n),
            Bandwidth::Value(b) => b,
        }
    }
}

impl FromStr for Bandwidth {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Bandwidth::Auto);
        }
        let b: f64 = s
            .parse()
            .with_context(|| format!("bandwidth '{s}' is neither 'auto' nor a number"))?;
        Ok(Bandwidth::Value(b))
    }
}

/// Evaluation frequencies: the whole half grid or the Fourier frequencies
/// nearest to the given values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaSelection {
    Fourier,
    List(Vec<f64>),
}

impl OmegaSelection {
    /// Sorted, deduplicated Fourier indices `s <= n / 2`.
    pub fn indices(&self, n: usize) -> anyhow::Result<Vec<usize>> {
        let half = n / 2;
        match self {
            OmegaSelection::Fourier => Ok((0..=half).collect()),
            OmegaSelection::List(omegas) => {
                let mut idx = Vec::with_capacity(omegas.len());
                for &w in omegas {
                    if !(0.0..=PI).contains(&w) {
                        bail!("frequency {w} must lie in [0, pi]");
                    }
                    idx.push(((w * n as f64 / (2.0 * PI)).round() as usize).min(half));
                }
                idx.sort_unstable();
                idx.dedup();
                Ok(idx)
            }
        }
    }
}

impl FromStr for OmegaSelection {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s.eq_ignore_ascii_case("fourier") {
            return Ok(OmegaSelection::Fourier);
        }
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad frequency '{v}'")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        if values.is_empty() {
            bail!("empty frequency list");
        }
        Ok(OmegaSelection::List(values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => bail!("unknown output format '{other}'"),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: InputSource,
    pub quantiles: Vec<f64>,
    pub kernel: KernelSpec,
    pub bandwidth: Bandwidth,
    pub alpha: f64,
    pub omegas: OmegaSelection,
    pub clip_coherency: bool,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(input: InputSource, out: impl Into<PathBuf>) -> Self {
        Self {
            input,
            quantiles: QuantileGrid::default().levels().to_vec(),
            kernel: KernelSpec::epanechnikov(),
            bandwidth: Bandwidth::Auto,
            alpha: 0.05,
            omegas: OmegaSelection::Fourier,
            clip_coherency: false,
            out: out.into(),
            format: OutputFormat::Csv,
        }
    }

    /// Seed of the simulated input, if any.
    pub fn seed(&self) -> Option<u64> {
        match &self.input {
            InputSource::Simulated(sim) => Some(sim.seed),
            InputSource::Csv { .. } => None,
        }
    }
}

pub fn parse_quantiles(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad quantile level '{v}'"))
        })
        .collect()
}
