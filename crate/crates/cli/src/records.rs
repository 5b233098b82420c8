//! Flat output rows: one per (quantity, j1, j2, tau1, tau2, omega).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use quantile_spectra::{decompose, BandCell, GaussianOracle, GaussianProcessSpec, QuantileGrid};
use serde::{Deserialize, Serialize};

use crate::pipeline::PipelineOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    F,
    Coherency,
    Coherence,
    Cospectrum,
    Quadrature,
    Amplitude,
    Phase,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::F,
        Quantity::Coherency,
        Quantity::Coherence,
        Quantity::Cospectrum,
        Quantity::Quadrature,
        Quantity::Amplitude,
        Quantity::Phase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::F => "f",
            Quantity::Coherency => "coherency",
            Quantity::Coherence => "coherence",
            Quantity::Cospectrum => "cospectrum",
            Quantity::Quadrature => "quadrature",
            Quantity::Amplitude => "amplitude",
            Quantity::Phase => "phase",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Component indices `j1`, `j2` are 1-based. Real-valued quantities carry
/// `im = 0`; only `f` and `coherency` have band columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraRecord {
    pub omega: f64,
    pub freq_cycles: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub j1: usize,
    pub j2: usize,
    pub quantity: Quantity,
    pub re: f64,
    pub im: f64,
    pub ci_lo_re: Option<f64>,
    pub ci_hi_re: Option<f64>,
    pub ci_lo_im: Option<f64>,
    pub ci_hi_im: Option<f64>,
}

pub const CSV_HEADER: [&str; 13] = [
    "omega",
    "freq_cycles",
    "tau1",
    "tau2",
    "j1",
    "j2",
    "quantity",
    "re",
    "im",
    "ci_lo_re",
    "ci_hi_re",
    "ci_lo_im",
    "ci_hi_im",
];

type Cell<'a, T> = Box<dyn Fn(usize, usize, usize) -> T + 'a>;

/// Spectrum and coherency values (and optional bands) on a set of
/// frequencies, indexed by series pair `(a, b)` with `a = j K + k`.
struct Tables<'a> {
    d: usize,
    levels: &'a [f64],
    omegas: Vec<f64>,
    spectrum: Cell<'a, Complex64>,
    coherency: Cell<'a, Complex64>,
    coherence: Cell<'a, f64>,
    spectrum_band: Option<Cell<'a, BandCell>>,
    coherency_band: Option<Cell<'a, BandCell>>,
}

fn band_fields(cell: Option<BandCell>) -> [Option<f64>; 4] {
    match cell {
        Some(c) => [Some(c.lo_re), Some(c.hi_re), Some(c.lo_im), Some(c.hi_im)],
        None => [None; 4],
    }
}

fn build(t: &Tables<'_>) -> Vec<SpectraRecord> {
    let kk = t.levels.len();
    let m = t.d * kk;
    let mut out = Vec::with_capacity(Quantity::ALL.len() * m * m * t.omegas.len());
    for q in Quantity::ALL {
        for j1 in 0..t.d {
            for j2 in 0..t.d {
                for k1 in 0..kk {
                    for k2 in 0..kk {
                        let (a, b) = (j1 * kk + k1, j2 * kk + k2);
                        for (e, &omega) in t.omegas.iter().enumerate() {
                            let (value, cell) = match q {
                                Quantity::F => ((t.spectrum)(a, b, e), t.spectrum_band.as_ref().map(|f| f(a, b, e))),
                                Quantity::Coherency => {
                                    ((t.coherency)(a, b, e), t.coherency_band.as_ref().map(|f| f(a, b, e)))
                                }
                                Quantity::Coherence => (Complex64::new((t.coherence)(a, b, e), 0.0), None),
                                _ => {
                                    let parts = decompose((t.spectrum)(a, b, e));
                                    let v = match q {
                                        Quantity::Cospectrum => parts.cospectrum,
                                        Quantity::Quadrature => parts.quadrature,
                                        Quantity::Amplitude => parts.amplitude,
                                        _ => parts.phase,
                                    };
                                    (Complex64::new(v, 0.0), None)
                                }
                            };
                            let [ci_lo_re, ci_hi_re, ci_lo_im, ci_hi_im] = band_fields(cell);
                            out.push(SpectraRecord {
                                omega,
                                freq_cycles: omega / (2.0 * PI),
                                tau1: t.levels[k1],
                                tau2: t.levels[k2],
                                j1: j1 + 1,
                                j2: j2 + 1,
                                quantity: q,
                                re: value.re,
                                im: value.im + 0.0,
                                ci_lo_re,
                                ci_hi_re,
                                ci_lo_im,
                                ci_hi_im,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Rows for every estimated quantity at the selected Fourier frequencies.
pub fn spectra_records(output: &PipelineOutput) -> Vec<SpectraRecord> {
    let sel = &output.selected;
    let spec = &output.spectrum;
    let tables = Tables {
        d: spec.d(),
        levels: spec.levels().levels(),
        omegas: sel.iter().map(|&s| spec.omegas()[s]).collect(),
        spectrum: Box::new(|a, b, e| spec.value(a, b, sel[e])),
        coherency: Box::new(|a, b, e| output.coherency.value(a, b, sel[e])),
        coherence: Box::new(|a, b, e| output.coherency.coherence(a, b, sel[e])),
        spectrum_band: Some(Box::new(|a, b, e| output.spectrum_band.cell(a, b, sel[e]))),
        coherency_band: Some(Box::new(|a, b, e| output.coherency_band.cell(a, b, sel[e]))),
    };
    build(&tables)
}

/// True quantile spectra and coherencies of a Gaussian process at the given frequencies.
pub fn oracle_records(
    process: &GaussianProcessSpec,
    levels: &QuantileGrid,
    omegas: &[f64],
) -> quantile_spectra::Result<Vec<SpectraRecord>> {
    let oracle = GaussianOracle::new(process)?;
    let d = oracle.d();
    let kk = levels.len();
    let m = d * kk;
    let mut values = vec![Vec::new(); m * m];
    for a in 0..m {
        for b in 0..m {
            let series = oracle.quantile_covariances(levels.get(a % kk), levels.get(b % kk), a / kk, b / kk)?;
            values[a * m + b] = omegas
                .iter()
                .map(|&w| {
                    let mut z = series.eval(w);
                    if a == b {
                        z.im = 0.0;
                    }
                    z
                })
                .collect::<Vec<_>>();
        }
    }
    let f = |a: usize, b: usize, e: usize| values[a * m + b][e];
    let f = &f;
    let r = |a: usize, b: usize, e: usize| {
        if a == b {
            Complex64::new(1.0, 0.0)
        } else {
            f(a, b, e) / (f(a, a, e).re * f(b, b, e).re).sqrt()
        }
    };
    let tables = Tables {
        d,
        levels: levels.levels(),
        omegas: omegas.to_vec(),
        spectrum: Box::new(f),
        coherency: Box::new(r),
        coherence: Box::new(move |a, b, e| r(a, b, e).norm_sqr()),
        spectrum_band: None,
        coherency_band: None,
    };
    Ok(build(&tables))
}
