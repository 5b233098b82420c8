//! Rank-based quantile cross-spectral analysis.
//!
//! The pipeline runs ranks -> clipped indicators -> quantile DFTs ->
//! CCR-periodogram -> kernel smoothing -> coherency and confidence bands.
//! Simulators and closed-form Gaussian references live in [`models`] and
//! [`oracle`].

pub mod derived;
pub mod error;
mod fft;
pub mod grid;
pub mod inference;
pub mod kernel;
pub mod models;
pub mod oracle;
pub mod periodogram;
pub mod quad;
pub mod ranks;
pub mod rng;
pub mod series;
pub mod smoother;
pub mod special;

pub use derived::{
    decompose, quantile_coherency, spectral_decompositions, CoherencyField, Decomposed, SpectralDecomposition,
};
pub use error::{Error, Result};
pub use grid::{make_fourier_grid, validate_quantile_grid, FrequencyGrid, QuantileGrid};
pub use inference::{
    ci_coherency, ci_spectrum, coherency_covariance, confidence_bands, smoothed_covariance, BandCell, BandKind,
    ConfidenceBand,
};
pub use kernel::{default_bandwidth, wrapped_kernel_weight, KernelKind, KernelSpec};
pub use models::{
    simulate_qvar, simulate_toy, simulate_var1, CoefficientFn, ModelSpec, QvarSpec, ToyKind, VarModel, DEFAULT_BURN_IN,
};
pub use oracle::{
    bias_matrix, direct_ccr_reference, frechet_bounds, gaussian_copula_cdf, gaussian_quantile_spectrum,
    iid_quantile_coherency, traditional_coherency, var1_spectrum, DirectReference, GaussianOracle, GaussianProcessSpec,
};
pub use periodogram::{ccr_periodogram_matrix, quantile_dft, CcrPeriodogram, QuantileDft};
pub use ranks::{clip_series, max_ranks, ClippedTensor, RankMatrix};
pub use rng::SeededStream;
pub use series::TimeSeriesMatrix;
pub use smoother::{
    smooth_periodogram, smoothed_quantile_spectrum, smoothing_normalizer, EvalFrequencies, Normalizer, SmoothedSpectrum,
};
