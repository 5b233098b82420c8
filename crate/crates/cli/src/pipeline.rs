use anyhow::Context;
use quantile_spectra::{
    ccr_periodogram_matrix, confidence_bands, quantile_coherency, quantile_dft, simulate_qvar, simulate_toy,
    simulate_var1, smooth_periodogram, ClippedTensor, CoherencyField, ConfidenceBand, EvalFrequencies, ModelSpec,
    QuantileGrid, RankMatrix, SmoothedSpectrum, TimeSeriesMatrix,
};

use crate::config::{InputSource, RunConfig, Simulation, SimulationModel};
use crate::data::load_csv;

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub series: TimeSeriesMatrix,
    /// Normalized smoothed spectrum `G / W_n^k` on the Fourier half grid.
    pub spectrum: SmoothedSpectrum,
    pub coherency: CoherencyField,
    pub spectrum_band: ConfidenceBand,
    pub coherency_band: ConfidenceBand,
    /// Fourier indices selected for output.
    pub selected: Vec<usize>,
}

pub fn simulate(sim: &Simulation) -> quantile_spectra::Result<TimeSeriesMatrix> {
    match &sim.model {
        SimulationModel::Model(ModelSpec::Qvar(spec)) => simulate_qvar(spec, sim.n, sim.burn_in, sim.seed),
        SimulationModel::Model(ModelSpec::Var1(model)) => simulate_var1(model, sim.n, sim.burn_in, sim.seed),
        SimulationModel::Toy(kind) => simulate_toy(*kind, sim.n, sim.seed),
    }
}

pub fn load_input(input: &InputSource) -> anyhow::Result<TimeSeriesMatrix> {
    match input {
        InputSource::Csv { path, columns } => {
            load_csv(path, columns.as_deref()).with_context(|| format!("input: {}", path.display()))
        }
        InputSource::Simulated(sim) => simulate(sim).context("simulation"),
    }
}

/// Ranks, clipping, quantile DFTs, periodogram, smoothing, coherency and
/// confidence bands, in that order.
pub fn run_pipeline(config: &RunConfig) -> anyhow::Result<PipelineOutput> {
    let levels = QuantileGrid::new(config.quantiles.clone()).context("quantile grid")?;
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(quantile_spectra::Error::InvalidLevel(config.alpha)).context("configuration");
    }
    let series = load_input(&config.input)?;
    analyze_series(series, &levels, config)
}

pub fn analyze_series(
    series: TimeSeriesMatrix,
    levels: &QuantileGrid,
    config: &RunConfig,
) -> anyhow::Result<PipelineOutput> {
    let n = series.n();
    let b_n = config.bandwidth.resolve(n);
    let selected = config.omegas.indices(n).context("frequency selection")?;
    let ranks = RankMatrix::from_series(&series).context("ranks")?;
    let clipped = ClippedTensor::new(&ranks, levels);
    let dft = quantile_dft(&clipped);
    let perio = ccr_periodogram_matrix(&dft);
    let spectrum = smooth_periodogram(&perio, &config.kernel, b_n, &EvalFrequencies::FourierHalf)
        .context("smoothing")?
        .normalized()
        .context("smoothing")?;
    let coherency = quantile_coherency(&spectrum).context("coherency")?;
    let (spectrum_band, coherency_band) =
        confidence_bands(&spectrum, config.alpha, config.clip_coherency).context("confidence bands")?;
    Ok(PipelineOutput {
        series,
        spectrum,
        coherency,
        spectrum_band,
        coherency_band,
        selected,
    })
}
