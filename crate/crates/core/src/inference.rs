//! Pointwise confidence bands for the quantile cross-spectrum and the quantile
//! coherency.
//!
//! The covariance of `G~^{ab}` and `G~^{cd}` at `w_k` is estimated by
//!
//! ```text
//! (2 pi / n)^2 / (W_n^k)^2 * [ sum_s W_n(w_k - w_s)^2 G~^{ac}(w_s) G~^{bd}(-w_s)
//!                            + sum_s W_n(w_k - w_s) W_n(w_k + w_s) G~^{ad}(w_s) G~^{bc}(-w_s) ]
//! ```
//!
//! over `s = 1, ..., n - 1`, which is the finite-sample variance of the
//! normalized estimator. Bias is ignored; the default bandwidth undersmooths.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::derived::{positive_diagonals, quantile_coherency};
use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::kernel::wrapped_weight_unchecked;
use crate::smoother::{upper_pairs, FourierWeights, SmoothedSpectrum};
use crate::special::norm_quantile;

/// Raw variances below `-NEGATIVE_VARIANCE_TOL` are reported before clamping.
pub const NEGATIVE_VARIANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    Spectrum,
    Coherency,
}

/// One cell of a band: the centre and the real/imaginary intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCell {
    pub center: Complex64,
    pub lo_re: f64,
    pub hi_re: f64,
    pub lo_im: f64,
    pub hi_im: f64,
}

#[derive(Debug, Clone)]
pub struct ConfidenceBand {
    kind: BandKind,
    alpha: f64,
    multiplier: f64,
    clip: bool,
    m: usize,
    k: usize,
    omegas: Vec<f64>,
    center: Vec<Vec<Complex64>>,
    sigma_re: Vec<Vec<f64>>,
    sigma_im: Vec<Vec<f64>>,
    negative_variances: usize,
    min_raw_variance: f64,
}

impl ConfidenceBand {
    pub fn kind(&self) -> BandKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Phi^{-1}(1 - alpha / 2)`.
    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn series_count(&self) -> usize {
        self.m
    }

    pub fn center(&self, a: usize, b: usize, e: usize) -> Complex64 {
        self.center[a * self.m + b][e]
    }

    pub fn sigma(&self, a: usize, b: usize, e: usize) -> (f64, f64) {
        let i = a * self.m + b;
        (self.sigma_re[i][e], self.sigma_im[i][e])
    }

    pub fn cell(&self, a: usize, b: usize, e: usize) -> BandCell {
        let c = self.center(a, b, e);
        let (sr, si) = self.sigma(a, b, e);
        let (mut lo_re, mut hi_re) = (c.re - self.multiplier * sr, c.re + self.multiplier * sr);
        if self.clip {
            lo_re = lo_re.clamp(-1.0, 1.0);
            hi_re = hi_re.clamp(-1.0, 1.0);
        }
        BandCell {
            center: c,
            lo_re,
            hi_re,
            lo_im: c.im - self.multiplier * si,
            hi_im: c.im + self.multiplier * si,
        }
    }

    pub fn get(&self, j1: usize, j2: usize, k1: usize, k2: usize, e: usize) -> BandCell {
        self.cell(j1 * self.k + k1, j2 * self.k + k2, e)
    }

    /// Raw variances that fell below `-NEGATIVE_VARIANCE_TOL` before clamping.
    pub fn negative_variances(&self) -> usize {
        self.negative_variances
    }

    pub fn min_raw_variance(&self) -> f64 {
        self.min_raw_variance
    }
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(norm_quantile(1.0 - alpha / 2.0))
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

fn normalized_fourier(spec: &SmoothedSpectrum) -> Result<SmoothedSpectrum> {
    if !spec.is_fourier_half() {
        return Err(Error::InvalidArgument(
            "confidence bands need the spectrum on the Fourier grid".into(),
        ));
    }
    spec.normalized()
}

fn covariance_scale(spec: &SmoothedSpectrum, k: usize) -> Result<f64> {
    let w = spec.normalizers()[k];
    if w.degenerate {
        return Err(Error::DegenerateNormalizer { k, value: w.value });
    }
    let n = spec.n() as f64;
    Ok((2.0 * PI / n).powi(2) / (w.value * w.value))
}

/// Direct evaluation of the covariance estimator for series given as
/// `(component, level)` index pairs, at Fourier index `k <= n / 2`.
///
/// `spec` must be normalized and evaluated on the Fourier grid.
pub fn smoothed_covariance(spec: &SmoothedSpectrum, idx: [(usize, usize); 4], k: usize) -> Result<Complex64> {
    if !spec.is_normalized() || !spec.is_fourier_half() {
        return Err(Error::InvalidArgument(
            "covariance needs the normalized spectrum on the Fourier grid".into(),
        ));
    }
    let kk = spec.levels().len();
    let [a, b, c, d] = idx.map(|(j, l)| j * kk + l);
    let n = spec.n();
    let scale = covariance_scale(spec, k)?;
    let kernel = spec.kernel();
    let bw = spec.bandwidth();
    let wk = |u: f64| wrapped_weight_unchecked(kernel, bw, u);
    let omega = |s: isize| 2.0 * PI * s as f64 / n as f64;
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = Complex64::new(0.0, 0.0);
    for s in 1..n {
        let (ki, si) = (k as isize, s as isize);
        let w_minus = wk(omega(ki - si));
        let w_plus = wk(omega(ki + si));
        if w_minus == 0.0 {
            continue;
        }
        first += w_minus * w_minus * spec.fourier_value(a, c, s) * spec.fourier_value(b, d, n - s);
        if w_plus != 0.0 {
            second += w_minus * w_plus * spec.fourier_value(a, d, s) * spec.fourier_value(b, c, n - s);
        }
    }
    Ok(scale * (first + second))
}

/// `(Cov(L12, L12), Cov(L12, L21))` for series `(j1, k1)`, `(j2, k2)` at
/// Fourier index `k`, evaluated pointwise from [`smoothed_covariance`].
pub fn coherency_covariance(
    spec: &SmoothedSpectrum,
    j1: usize,
    j2: usize,
    k1: usize,
    k2: usize,
    k: usize,
) -> Result<(Complex64, Complex64)> {
    let kk = spec.levels().len();
    let (x, y) = (j1 * kk + k1, j2 * kk + k2);
    let p = (j1, k1);
    let q = (j2, k2);
    let f11 = spec.value(x, x, k).re;
    let f22 = spec.value(y, y, k).re;
    for (v, j, l) in [(f11, j1, k1), (f22, j2, k2)] {
        if v <= 0.0 {
            return Err(Error::DegenerateDenominator {
                j,
                tau: spec.levels().get(l),
                omega: spec.omegas()[k],
                value: v,
            });
        }
    }
    let f12 = spec.value(x, y, k);
    let cov = |idx| smoothed_covariance(spec, idx, k);
    let c12_12 = cov([p, q, p, q])?;
    let c12_21 = cov([p, q, q, p])?;
    let c11_12 = cov([p, p, p, q])?;
    let c22_12 = cov([q, q, p, q])?;
    let c12_22 = cov([p, q, q, q])?;
    let c12_11 = cov([p, q, p, p])?;
    let c11_11 = cov([p, p, p, p])?;
    let c11_22 = cov([p, p, q, q])?;
    let c22_22 = cov([q, q, q, q])?;
    Ok(coherency_terms(
        f11,
        f22,
        f12,
        Terms {
            c12_12,
            c12_21,
            c11_12,
            c22_12,
            c12_22,
            c12_11,
            c11_11,
            c11_22,
            c22_22,
        },
    ))
}

struct Terms {
    c12_12: Complex64,
    c12_21: Complex64,
    c11_12: Complex64,
    c22_12: Complex64,
    c12_22: Complex64,
    c12_11: Complex64,
    c11_11: Complex64,
    c11_22: Complex64,
    c22_22: Complex64,
}

fn coherency_terms(f11: f64, f22: f64, f12: Complex64, t: Terms) -> (Complex64, Complex64) {
    let bracket = t.c11_11 / (f11 * f11) + 2.0 * (t.c11_22 / (f11 * f22)).re + t.c22_22 / (f22 * f22);
    let inv = 1.0 / (f11 * f22);
    let same = t.c12_12 - (f12 * t.c11_12 / f11).re - (f12 * t.c22_12 / f22).re + 0.25 * f12.norm_sqr() * bracket;
    let conj = t.c12_21 - f12 * t.c12_22 / f22 - f12 * t.c12_11 / f11 + 0.25 * f12 * f12 * bracket;
    (inv * same, inv * conj)
}

/// Spectrum band: centre `G~`, standard errors from the covariance estimator.
pub fn ci_spectrum(spec: &SmoothedSpectrum, alpha: f64) -> Result<ConfidenceBand> {
    let (band, _) = bands(spec, alpha, false, Want::Spectrum)?;
    Ok(band.expect("spectrum band requested"))
}

/// Coherency band; `clip` limits the real interval to `[-1, 1]`.
pub fn ci_coherency(spec: &SmoothedSpectrum, alpha: f64, clip: bool) -> Result<ConfidenceBand> {
    let (_, band) = bands(spec, alpha, clip, Want::Coherency)?;
    Ok(band.expect("coherency band requested"))
}

/// Both bands, sharing the covariance sums.
pub fn confidence_bands(spec: &SmoothedSpectrum, alpha: f64, clip: bool) -> Result<(ConfidenceBand, ConfidenceBand)> {
    let (s, c) = bands(spec, alpha, clip, Want::Both)?;
    Ok((s.expect("spectrum band"), c.expect("coherency band")))
}

#[derive(Clone, Copy, PartialEq)]
enum Want {
    Spectrum,
    Coherency,
    Both,
}

struct Workspace<'a> {
    spec: &'a SmoothedSpectrum,
    weights: FourierWeights,
    plan: FftPair,
    hat2: Vec<Complex64>,
    scale: Vec<f64>,
    /// Fourier indices `k <= n / 2` whose two kernel windows around `k` and `-k` overlap.
    overlap: Vec<bool>,
    diag: Vec<Vec<f64>>,
}

impl Workspace<'_> {
    fn half(&self) -> usize {
        self.spec.n() / 2
    }

    /// `sum_{s=1}^{n-1} W(k - s)^2 p(s)` for all `k <= n / 2`.
    fn first_sum(&self, mut p: Vec<Complex64>) -> Vec<Complex64> {
        p[0] = Complex64::new(0.0, 0.0);
        self.plan.circular_convolve(&self.hat2, &mut p);
        p.truncate(self.half() + 1);
        p
    }

    /// `sum_{s=1}^{n-1} W(k - s) W(k + s) q_i(s)` for `N` product sequences,
    /// summed in ascending `s`.
    fn second_sums<const N: usize>(&self, k: usize, q: impl Fn(usize) -> [Complex64; N]) -> [Complex64; N] {
        let mut acc = [Complex64::new(0.0, 0.0); N];
        if !self.overlap[k] {
            return acc;
        }
        let n = self.spec.n() as isize;
        let h = self.weights.half_width as isize;
        let mut support: Vec<usize> = (k as isize - h..=k as isize + h)
            .map(|s| s.rem_euclid(n) as usize)
            .filter(|&s| s != 0)
            .collect();
        support.sort_unstable();
        support.dedup();
        for s in support {
            let ww = self.weights.at(k as isize - s as isize) * self.weights.at(k as isize + s as isize);
            if ww == 0.0 {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(q(s)) {
                *a += ww * v;
            }
        }
        acc
    }
}

struct PairCov {
    c12_12: Vec<Complex64>,
    c12_21: Vec<Complex64>,
    c11_12: Vec<Complex64>,
    c22_12: Vec<Complex64>,
    c11_22: Vec<Complex64>,
}

fn pair_covariances(ws: &Workspace<'_>, x: usize, y: usize, need_mixed: bool) -> PairCov {
    let n = ws.spec.n();
    let f: Vec<Complex64> = (0..n).map(|s| ws.spec.fourier_value(x, y, s)).collect();
    let (gx, gy) = (&ws.diag[x], &ws.diag[y]);
    let packed = ws.first_sum((0..n).map(|s| Complex64::new(gx[s] * gy[s], f[s].norm_sqr())).collect());
    let f2 = ws.first_sum(f.iter().map(|z| z * z).collect());
    let (xf, yf) = if need_mixed {
        (
            ws.first_sum((0..n).map(|s| gx[s] * f[s].conj()).collect()),
            ws.first_sum((0..n).map(|s| gy[s] * f[s].conj()).collect()),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let half = ws.half();
    let mut out = PairCov {
        c12_12: Vec::with_capacity(half + 1),
        c12_21: Vec::with_capacity(half + 1),
        c11_12: Vec::with_capacity(half + 1),
        c22_12: Vec::with_capacity(half + 1),
        c11_22: Vec::with_capacity(half + 1),
    };
    for k in 0..=half {
        let [s_f2, s_gg, s_xf, s_yf, s_ff] = ws.second_sums(k, |s| {
            let z = f[s];
            [
                z * z,
                Complex64::new(gx[s] * gy[s], 0.0),
                gx[s] * z,
                gy[s] * z,
                Complex64::new(z.norm_sqr(), 0.0),
            ]
        });
        let c = ws.scale[k];
        out.c12_12.push(c * (Complex64::new(packed[k].re, 0.0) + s_f2));
        out.c12_21.push(c * (f2[k] + s_gg));
        out.c11_22.push(c * (Complex64::new(packed[k].im, 0.0) + s_ff));
        if need_mixed {
            out.c11_12.push(c * (xf[k] + s_xf));
            out.c22_12.push(c * (yf[k] + s_yf));
        }
    }
    out
}

fn bands(
    spec: &SmoothedSpectrum,
    alpha: f64,
    clip: bool,
    want: Want,
) -> Result<(Option<ConfidenceBand>, Option<ConfidenceBand>)> {
    let z = check_alpha(alpha)?;
    let g = normalized_fourier(spec)?;
    let n = g.n();
    let half = n / 2;
    let m = g.series_count();
    let want_coherency = want != Want::Spectrum;
    let coherency = if want_coherency {
        Some(quantile_coherency(&g)?)
    } else {
        None
    };
    let scale = (0..=half)
        .map(|k| covariance_scale(&g, k))
        .collect::<Result<Vec<_>>>()?;
    if want_coherency {
        positive_diagonals(&g)?;
    }
    let weights = FourierWeights::new(g.kernel(), g.bandwidth(), n)?;
    let plan = FftPair::new(n);
    let hat2 = weights.transform(&plan, 2);
    let h = weights.half_width;
    let overlap = (0..=half)
        .map(|k| {
            let t = (2 * k) % n;
            t.min(n - t) <= 2 * h
        })
        .collect();
    let diag = (0..m)
        .map(|a| (0..n).map(|s| g.fourier_value(a, a, s).re).collect())
        .collect();
    let ws = Workspace {
        spec: &g,
        weights,
        plan,
        hat2,
        scale,
        overlap,
        diag,
    };

    // Cov(H11, H11) per series
    let auto: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|x| {
            let gx = &ws.diag[x];
            let first = ws.first_sum(gx.iter().map(|v| Complex64::new(v * v, 0.0)).collect());
            (0..=half)
                .map(|k| {
                    let [s2] = ws.second_sums(k, |s| [Complex64::new(gx[s] * gx[s], 0.0)]);
                    ws.scale[k] * (first[k].re + s2.re)
                })
                .collect()
        })
        .collect();

    struct PairSigmas {
        spec_re: Vec<f64>,
        spec_im: Vec<f64>,
        coh_re: Vec<f64>,
        coh_im: Vec<f64>,
        min_raw: f64,
        negatives: usize,
    }

    let upper: Vec<((usize, usize), PairSigmas)> = upper_pairs(m)
        .into_par_iter()
        .map(|(x, y)| {
            let mut min_raw = f64::INFINITY;
            let mut negatives = 0;
            let mut clamp = |v: f64| {
                min_raw = min_raw.min(v);
                if v < -NEGATIVE_VARIANCE_TOL {
                    negatives += 1;
                }
                v.max(0.0).sqrt()
            };
            let mut out = PairSigmas {
                spec_re: Vec::new(),
                spec_im: Vec::new(),
                coh_re: Vec::new(),
                coh_im: Vec::new(),
                min_raw: 0.0,
                negatives: 0,
            };
            if x == y {
                out.spec_re = auto[x].iter().map(|&v| clamp(v)).collect();
                out.spec_im = vec![0.0; half + 1];
                out.coh_re = vec![0.0; half + 1];
                out.coh_im = vec![0.0; half + 1];
            } else {
                let pc = pair_covariances(&ws, x, y, want_coherency);
                #[allow(clippy::needless_range_loop)]
                for k in 0..=half {
                    let v12 = pc.c12_12[k].re;
                    let r21 = pc.c12_21[k].re;
                    out.spec_re.push(clamp(0.5 * (v12 + r21)));
                    out.spec_im.push(clamp(0.5 * (v12 - r21)));
                    if want_coherency {
                        let (f11, f22) = (ws.diag[x][k], ws.diag[y][k]);
                        let f12 = g.value(x, y, k);
                        let c11_12 = pc.c11_12[k];
                        let c22_12 = pc.c22_12[k];
                        let (same, conj) = coherency_terms(
                            f11,
                            f22,
                            f12,
                            Terms {
                                c12_12: pc.c12_12[k],
                                c12_21: pc.c12_21[k],
                                c11_12,
                                c22_12,
                                c12_22: c22_12.conj(),
                                c12_11: c11_12.conj(),
                                c11_11: Complex64::new(auto[x][k], 0.0),
                                c11_22: pc.c11_22[k],
                                c22_22: Complex64::new(auto[y][k], 0.0),
                            },
                        );
                        out.coh_re.push(clamp(0.5 * (same.re + conj.re)));
                        out.coh_im.push(clamp(0.5 * (same.re - conj.re)));
                    }
                }
            }
            out.min_raw = min_raw;
            out.negatives = negatives;
            ((x, y), out)
        })
        .collect();

    let negatives: usize = upper.iter().map(|(_, p)| p.negatives).sum();
    let min_raw = upper.iter().map(|(_, p)| p.min_raw).fold(f64::INFINITY, f64::min);
    if negatives > 0 {
        warn!("{negatives} raw variance estimates below -{NEGATIVE_VARIANCE_TOL:e} were clamped to zero (minimum {min_raw:e})");
    }

    let mut spec_re = vec![Vec::new(); m * m];
    let mut spec_im = vec![Vec::new(); m * m];
    let mut coh_re = vec![Vec::new(); m * m];
    let mut coh_im = vec![Vec::new(); m * m];
    for ((x, y), p) in upper {
        for (dst, src) in [
            (&mut spec_re, &p.spec_re),
            (&mut spec_im, &p.spec_im),
            (&mut coh_re, &p.coh_re),
            (&mut coh_im, &p.coh_im),
        ] {
            dst[x * m + y] = src.clone();
            dst[y * m + x] = src.clone();
        }
    }

    let omegas = g.omegas().to_vec();
    let kk = g.levels().len();
    let spectrum_band = (want != Want::Coherency).then(|| ConfidenceBand {
        kind: BandKind::Spectrum,
        alpha,
        multiplier: z,
        clip: false,
        m,
        k: kk,
        omegas: omegas.clone(),
        center: (0..m * m).map(|ab| g.pair(ab / m, ab % m).to_vec()).collect(),
        sigma_re: spec_re,
        sigma_im: spec_im,
        negative_variances: negatives,
        min_raw_variance: min_raw,
    });
    let coherency_band = coherency.map(|r| ConfidenceBand {
        kind: BandKind::Coherency,
        alpha,
        multiplier: z,
        clip,
        m,
        k: kk,
        omegas,
        center: (0..m * m).map(|ab| r.pair(ab / m, ab % m).to_vec()).collect(),
        sigma_re: coh_re,
        sigma_im: coh_im,
        negative_variances: negatives,
        min_raw_variance: min_raw,
    });
    Ok((spectrum_band, coherency_band))
}
