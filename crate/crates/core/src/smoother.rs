//! Frequency-domain kernel smoothing of the CCR-periodogram.
//!
//! `G(w) = (2 pi / n) sum_{s=1}^{n-1} W_n(w - 2 pi s / n) I(2 pi s / n)`.
//! On the Fourier grid the sum is a circular convolution and is evaluated
//! with FFTs; arbitrary frequencies use the direct sum in ascending `s`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::grid::{fourier_frequency, QuantileGrid};
use crate::kernel::{check_bandwidth, wrap_angle, wrapped_weight_unchecked, KernelSpec};
use crate::periodogram::{ccr_periodogram_matrix, quantile_dft, CcrPeriodogram};
use crate::ranks::ClippedTensor;
use crate::series::TimeSeriesMatrix;

/// Normalizers below this value are flagged as degenerate.
pub const DEGENERATE_NORMALIZER: f64 = 1e-6;

/// Where the smoothed estimator is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalFrequencies {
    /// Fourier frequencies `2 pi s / n` for `s = 0, ..., floor(n / 2)`.
    FourierHalf,
    /// Arbitrary angular frequencies in radians.
    Omegas(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub value: f64,
    pub degenerate: bool,
}

impl Normalizer {
    fn new(value: f64) -> Self {
        Self {
            value,
            degenerate: value < DEGENERATE_NORMALIZER,
        }
    }
}

/// `W_n^k = (2 pi / n) sum_{s=1}^{n-1} W_n(w_k - w_s)`, summed in ascending `s`.
pub fn smoothing_normalizer(kernel: &KernelSpec, b_n: f64, n: usize, k: usize) -> Result<Normalizer> {
    check_bandwidth(b_n)?;
    Ok(Normalizer::new(direct_normalizer(
        kernel,
        b_n,
        n,
        fourier_frequency(k % n.max(1), n),
    )))
}

fn direct_normalizer(kernel: &KernelSpec, b_n: f64, n: usize, omega: f64) -> f64 {
    let sum: f64 = (1..n)
        .map(|s| wrapped_weight_unchecked(kernel, b_n, omega - fourier_frequency(s, n)))
        .sum();
    2.0 * PI / n as f64 * sum
}

/// Kernel weights on index differences, `w[m] = W_n(2 pi m / n)`, made exactly
/// even by evaluating only `m <= n / 2`.
#[derive(Debug, Clone)]
pub(crate) struct FourierWeights {
    pub(crate) n: usize,
    pub(crate) w: Vec<f64>,
    /// Largest `h` with `w[h] != 0`; weights vanish for `h < min(m, n - m)`.
    pub(crate) half_width: usize,
    total: f64,
}

impl FourierWeights {
    pub(crate) fn new(kernel: &KernelSpec, b_n: f64, n: usize) -> Result<Self> {
        check_bandwidth(b_n)?;
        let mut w = vec![0.0; n];
        for m in 0..=n / 2 {
            let v = wrapped_weight_unchecked(kernel, b_n, fourier_frequency(m, n));
            w[m] = v;
            w[(n - m) % n] = v;
        }
        let half_width = (0..=n / 2).rev().find(|&m| w[m] != 0.0).unwrap_or(0);
        let total = w.iter().sum();
        Ok(Self {
            n,
            w,
            half_width,
            total,
        })
    }

    #[inline]
    pub(crate) fn at(&self, m: isize) -> f64 {
        self.w[m.rem_euclid(self.n as isize) as usize]
    }

    pub(crate) fn normalizer(&self, k: usize) -> f64 {
        2.0 * PI / self.n as f64 * (self.total - self.w[k % self.n])
    }

    /// Forward transform of `w^power`, for circular convolution.
    pub(crate) fn transform(&self, plan: &FftPair, power: i32) -> Vec<Complex64> {
        let mut hat: Vec<Complex64> = self.w.iter().map(|&v| Complex64::new(v.powi(power), 0.0)).collect();
        plan.forward(&mut hat);
        hat
    }
}

/// Smoothed CCR-periodogram matrix `G(w)` (or its normalized version
/// `G(w) / W_n(w)`) with the kernel metadata needed downstream.
#[derive(Debug, Clone)]
pub struct SmoothedSpectrum {
    n: usize,
    d: usize,
    levels: QuantileGrid,
    kernel: KernelSpec,
    bandwidth: f64,
    fourier_half: bool,
    omegas: Vec<f64>,
    normalizers: Vec<Normalizer>,
    normalized: bool,
    values: Vec<Vec<Complex64>>,
}

impl SmoothedSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn levels(&self) -> &QuantileGrid {
        &self.levels
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn series_count(&self) -> usize {
        self.d * self.levels.len()
    }

    /// Number of evaluation frequencies.
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// True when evaluation points are the Fourier frequencies `s = 0..=n/2`,
    /// in which case evaluation index `e` equals the Fourier index.
    pub fn is_fourier_half(&self) -> bool {
        self.fourier_half
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn normalizers(&self) -> &[Normalizer] {
        &self.normalizers
    }

    /// Evaluation points at frequency zero, where the excluded `s = 0`
    /// ordinate would dominate.
    pub fn is_zero_frequency(&self, e: usize) -> bool {
        wrap_angle(self.omegas[e]) == 0.0
    }

    pub fn pair(&self, a: usize, b: usize) -> &[Complex64] {
        &self.values[a * self.series_count() + b]
    }

    pub fn value(&self, a: usize, b: usize, e: usize) -> Complex64 {
        self.pair(a, b)[e]
    }

    pub fn get(&self, j1: usize, j2: usize, k1: usize, k2: usize, e: usize) -> Complex64 {
        let kk = self.levels.len();
        self.value(j1 * kk + k1, j2 * kk + k2, e)
    }

    /// Value at Fourier index `s in 0..n`, using `G(w_{n-s}) = conj G(w_s)`.
    pub fn fourier_value(&self, a: usize, b: usize, s: usize) -> Complex64 {
        assert!(self.fourier_half, "spectrum is not evaluated on the Fourier grid");
        let s = s % self.n;
        if s <= self.n / 2 {
            self.value(a, b, s)
        } else {
            self.value(a, b, self.n - s).conj()
        }
    }

    /// `G~ = G / W_n^k`. Fails at the first degenerate normalizer.
    pub fn normalized(&self) -> Result<Self> {
        if self.normalized {
            return Ok(self.clone());
        }
        if let Some(k) = self.normalizers.iter().position(|w| w.degenerate) {
            return Err(Error::DegenerateNormalizer {
                k,
                value: self.normalizers[k].value,
            });
        }
        let values = self
            .values
            .par_iter()
            .map(|v| v.iter().zip(&self.normalizers).map(|(g, w)| g / w.value).collect())
            .collect();
        Ok(Self {
            n: self.n,
            d: self.d,
            levels: self.levels.clone(),
            kernel: self.kernel,
            bandwidth: self.bandwidth,
            fourier_half: self.fourier_half,
            omegas: self.omegas.clone(),
            normalizers: self.normalizers.clone(),
            normalized: true,
            values,
        })
    }
}

pub fn smooth_periodogram(
    perio: &CcrPeriodogram,
    kernel: &KernelSpec,
    b_n: f64,
    eval: &EvalFrequencies,
) -> Result<SmoothedSpectrum> {
    check_bandwidth(b_n)?;
    match eval {
        EvalFrequencies::FourierHalf => smooth_fourier(perio, kernel, b_n),
        EvalFrequencies::Omegas(omegas) => smooth_direct(perio, kernel, b_n, omegas),
    }
}

/// Ranks, clipping, quantile DFTs, CCR-periodogram and smoothing in one call.
pub fn smoothed_quantile_spectrum(
    x: &TimeSeriesMatrix,
    levels: &QuantileGrid,
    kernel: &KernelSpec,
    b_n: f64,
    eval: &EvalFrequencies,
) -> Result<SmoothedSpectrum> {
    check_bandwidth(b_n)?;
    let clipped = ClippedTensor::from_series(x, levels)?;
    let perio = ccr_periodogram_matrix(&quantile_dft(&clipped));
    smooth_periodogram(&perio, kernel, b_n, eval)
}

/// Upper-triangle pairs `(a, b)` with `a <= b`.
pub(crate) fn upper_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect()
}

/// Fills the full pair matrix from upper-triangle results; diagonals are made real.
fn assemble(m: usize, upper: Vec<((usize, usize), Vec<Complex64>)>) -> Vec<Vec<Complex64>> {
    let mut values = vec![Vec::new(); m * m];
    for ((a, b), mut v) in upper {
        if a == b {
            for z in v.iter_mut() {
                z.im = 0.0;
            }
        } else {
            values[b * m + a] = v.iter().map(|z| z.conj()).collect();
        }
        values[a * m + b] = v;
    }
    values
}

fn smooth_fourier(perio: &CcrPeriodogram, kernel: &KernelSpec, b_n: f64) -> Result<SmoothedSpectrum> {
    let n = perio.n();
    let half = n / 2;
    let weights = FourierWeights::new(kernel, b_n, n)?;
    let plan = FftPair::new(n);
    let hat = weights.transform(&plan, 1);
    let scale = 2.0 * PI / n as f64;
    let m = perio.series_count();
    let upper = upper_pairs(m)
        .into_par_iter()
        .map(|(a, b)| {
            let mut buf = perio.pair(a, b).to_vec();
            buf[0] = Complex64::new(0.0, 0.0);
            plan.circular_convolve(&hat, &mut buf);
            buf.truncate(half + 1);
            for z in buf.iter_mut() {
                *z *= scale;
            }
            // self-conjugate frequencies carry real values
            buf[0].im = 0.0;
            if n.is_multiple_of(2) {
                buf[half].im = 0.0;
            }
            ((a, b), buf)
        })
        .collect();
    let omegas = (0..=half).map(|s| fourier_frequency(s, n)).collect();
    let normalizers = (0..=half).map(|k| Normalizer::new(weights.normalizer(k))).collect();
    Ok(SmoothedSpectrum {
        n,
        d: perio.d(),
        levels: perio.levels().clone(),
        kernel: *kernel,
        bandwidth: b_n,
        fourier_half: true,
        omegas,
        normalizers,
        normalized: false,
        values: assemble(m, upper),
    })
}

fn smooth_direct(perio: &CcrPeriodogram, kernel: &KernelSpec, b_n: f64, omegas: &[f64]) -> Result<SmoothedSpectrum> {
    let n = perio.n();
    let scale = 2.0 * PI / n as f64;
    let weights: Vec<Vec<f64>> = omegas
        .par_iter()
        .map(|&w| {
            (1..n)
                .map(|s| wrapped_weight_unchecked(kernel, b_n, w - fourier_frequency(s, n)))
                .collect()
        })
        .collect();
    let m = perio.series_count();
    let upper = upper_pairs(m)
        .into_par_iter()
        .map(|(a, b)| {
            let p = perio.pair(a, b);
            let v = weights
                .iter()
                .map(|ws| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (s, &w) in ws.iter().enumerate() {
                        acc += p[s + 1] * w;
                    }
                    acc * scale
                })
                .collect();
            ((a, b), v)
        })
        .collect();
    let normalizers = weights
        .iter()
        .map(|ws| Normalizer::new(scale * ws.iter().sum::<f64>()))
        .collect();
    Ok(SmoothedSpectrum {
        n,
        d: perio.d(),
        levels: perio.levels().clone(),
        kernel: *kernel,
        bandwidth: b_n,
        fourier_half: false,
        omegas: omegas.to_vec(),
        normalizers,
        normalized: false,
        values: assemble(m, upper),
    })
}
