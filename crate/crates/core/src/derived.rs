//! Quantile coherency, coherence and the polar/cartesian decompositions of a
//! smoothed quantile cross-spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::smoother::{upper_pairs, SmoothedSpectrum};

/// Coherence may exceed one by this much before it counts as a violation.
pub const COHERENCE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CoherencyField {
    m: usize,
    k: usize,
    omegas: Vec<f64>,
    coherency: Vec<Vec<Complex64>>,
    coherence: Vec<Vec<f64>>,
}

impl CoherencyField {
    pub fn series_count(&self) -> usize {
        self.m
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn pair(&self, a: usize, b: usize) -> &[Complex64] {
        &self.coherency[a * self.m + b]
    }

    pub fn coherence_pair(&self, a: usize, b: usize) -> &[f64] {
        &self.coherence[a * self.m + b]
    }

    pub fn value(&self, a: usize, b: usize, e: usize) -> Complex64 {
        self.pair(a, b)[e]
    }

    pub fn coherence(&self, a: usize, b: usize, e: usize) -> f64 {
        self.coherence_pair(a, b)[e]
    }

    pub fn get(&self, j1: usize, j2: usize, k1: usize, k2: usize, e: usize) -> Complex64 {
        self.value(j1 * self.k + k1, j2 * self.k + k2, e)
    }
}

/// Real diagonal `G^{jj}(w; tau, tau)` for every series and evaluation point,
/// failing on the first nonpositive entry.
pub(crate) fn positive_diagonals(spec: &SmoothedSpectrum) -> Result<Vec<Vec<f64>>> {
    let kk = spec.levels().len();
    (0..spec.series_count())
        .map(|a| {
            spec.pair(a, a)
                .iter()
                .enumerate()
                .map(|(e, z)| {
                    if z.re > 0.0 {
                        Ok(z.re)
                    } else {
                        Err(Error::DegenerateDenominator {
                            j: a / kk,
                            tau: spec.levels().get(a % kk),
                            omega: spec.omegas()[e],
                            value: z.re,
                        })
                    }
                })
                .collect()
        })
        .collect()
}

/// `R = G^{12} / sqrt(G^{11} G^{22})`; identical for `G` and `G / W_n^k`.
pub fn quantile_coherency(spec: &SmoothedSpectrum) -> Result<CoherencyField> {
    let diag = positive_diagonals(spec)?;
    let m = spec.series_count();
    let upper = upper_pairs(m)
        .into_par_iter()
        .map(|(a, b)| {
            let g = spec.pair(a, b);
            let mut r = Vec::with_capacity(g.len());
            let mut c = Vec::with_capacity(g.len());
            for e in 0..g.len() {
                if a == b {
                    r.push(Complex64::new(1.0, 0.0));
                    c.push(1.0);
                    continue;
                }
                let z = g[e] / (diag[a][e] * diag[b][e]).sqrt();
                let mut coh = z.norm_sqr();
                if coh > 1.0 {
                    if coh - 1.0 > COHERENCE_SLACK {
                        return Err(Error::Consistency(format!(
                            "coherence {coh} exceeds one for series ({a}, {b}) at omega {}",
                            spec.omegas()[e]
                        )));
                    }
                    coh = 1.0;
                }
                r.push(z);
                c.push(coh);
            }
            Ok(((a, b), r, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coherency = vec![Vec::new(); m * m];
    let mut coherence = vec![Vec::new(); m * m];
    for ((a, b), r, c) in upper {
        if a != b {
            coherency[b * m + a] = r.iter().map(|z| z.conj()).collect();
            coherence[b * m + a] = c.clone();
        }
        coherency[a * m + b] = r;
        coherence[a * m + b] = c;
    }
    Ok(CoherencyField {
        m,
        k: spec.levels().len(),
        omegas: spec.omegas().to_vec(),
        coherency,
        coherence,
    })
}

/// Cartesian and polar parts of one complex spectral value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposed {
    pub cospectrum: f64,
    pub quadrature: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// Phase is the principal argument in `(-pi, pi]`, and zero at the origin.
pub fn decompose(z: Complex64) -> Decomposed {
    let amplitude = z.norm();
    let phase = if amplitude == 0.0 {
        0.0
    } else {
        let p = z.im.atan2(z.re);
        if p <= -PI {
            PI
        } else {
            p
        }
    };
    Decomposed {
        cospectrum: z.re,
        // + 0.0 turns -0.0 into 0.0
        quadrature: -z.im + 0.0,
        amplitude,
        phase,
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    m: usize,
    parts: Vec<Vec<Decomposed>>,
}

impl SpectralDecomposition {
    pub fn pair(&self, a: usize, b: usize) -> &[Decomposed] {
        &self.parts[a * self.m + b]
    }

    pub fn value(&self, a: usize, b: usize, e: usize) -> Decomposed {
        self.pair(a, b)[e]
    }
}

pub fn spectral_decompositions(spec: &SmoothedSpectrum) -> SpectralDecomposition {
    let m = spec.series_count();
    let parts = (0..m * m)
        .into_par_iter()
        .map(|ab| spec.pair(ab / m, ab % m).iter().map(|&z| decompose(z)).collect())
        .collect();
    SpectralDecomposition { m, parts }
}
