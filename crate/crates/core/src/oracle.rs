//! Closed-form and brute-force reference values.
//!
//! Gaussian copulas, quantile coherency of Gaussian white noise and its
//! Fréchet bounds, VAR(1) spectral matrices, quantile spectra of stationary
//! Gaussian VAR(1) processes, the leading smoothing bias, and a direct
//! evaluation of the CCR-periodogram that shares no code with the FFT path.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::validate_quantile_grid;
use crate::kernel::KernelSpec;
use crate::models::{spectral_radius, to_dmatrix};
use crate::quad;
use crate::series::TimeSeriesMatrix;
use crate::special::{norm_cdf, norm_quantile};

/// `P(Phi(Z1) <= tau1, Phi(Z2) <= tau2)` for standard normals with correlation `rho`.
///
/// Uses `Phi2(h, k; rho) = Phi(h) Phi(k) + (2 pi)^{-1} int_0^{asin rho}
/// exp(-(h^2 + k^2 - 2 h k sin t) / (2 cos^2 t)) dt`, with exact values at
/// `tau in {0, 1}` and `rho in {-1, 0, 1}`; the result is clamped to the
/// Fréchet bounds.
pub fn gaussian_copula_cdf(tau1: f64, tau2: f64, rho: f64) -> f64 {
    let t1 = tau1.clamp(0.0, 1.0);
    let t2 = tau2.clamp(0.0, 1.0);
    let rho = rho.clamp(-1.0, 1.0);
    let lower = (t1 + t2 - 1.0).max(0.0);
    let upper = t1.min(t2);
    if t1 == 0.0 || t2 == 0.0 {
        return 0.0;
    }
    if t1 == 1.0 {
        return t2;
    }
    if t2 == 1.0 {
        return t1;
    }
    if rho == 0.0 {
        return t1 * t2;
    }
    if rho == 1.0 {
        return upper;
    }
    if rho == -1.0 {
        return lower;
    }
    let h = norm_quantile(t1);
    let k = norm_quantile(t2);
    let integrand = |t: f64| {
        let c = t.cos();
        (-(h * h + k * k - 2.0 * h * k * t.sin()) / (2.0 * c * c)).exp()
    };
    let integral = quad::integrate(integrand, 0.0, rho.asin(), 1e-14);
    (t1 * t2 + integral / (2.0 * PI)).clamp(lower, upper)
}

fn check_taus(tau1: f64, tau2: f64) -> Result<f64> {
    validate_quantile_grid(&[tau1])?;
    validate_quantile_grid(&[tau2])?;
    Ok((tau1 * (1.0 - tau1)).sqrt() * (tau2 * (1.0 - tau2)).sqrt())
}

/// Quantile coherency of Gaussian white noise with cross-correlation `rho`.
pub fn iid_quantile_coherency(rho: f64, tau1: f64, tau2: f64) -> Result<f64> {
    let den = check_taus(tau1, tau2)?;
    Ok((gaussian_copula_cdf(tau1, tau2, rho) - tau1 * tau2) / den)
}

/// Bounds on the quantile coherency of serially independent processes.
pub fn frechet_bounds(tau1: f64, tau2: f64) -> Result<(f64, f64)> {
    let den = check_taus(tau1, tau2)?;
    let prod = tau1 * tau2;
    Ok((
        ((tau1 + tau2 - 1.0).max(0.0) - prod) / den,
        (tau1.min(tau2) - prod) / den,
    ))
}

fn complex_matrix(a: &[Vec<f64>]) -> DMatrix<Complex64> {
    to_dmatrix(a).map(|v| Complex64::new(v, 0.0))
}

/// `f(w) = (2 pi)^{-1} H(w) H(w)^*` with `H(w) = (I - A e^{-iw})^{-1}`.
pub fn var1_spectrum(a: &[Vec<f64>], omega: f64) -> Result<Vec<Vec<Complex64>>> {
    let d = a.len();
    if d == 0 || a.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("VAR coefficient matrix must be square".into()));
    }
    let e = Complex64::from_polar(1.0, -omega);
    let m = DMatrix::<Complex64>::identity(d, d) - complex_matrix(a) * e;
    let h = m
        .try_inverse()
        .ok_or_else(|| Error::NumericalSingularity(format!("I - A exp(-i {omega}) is singular")))?;
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalSingularity(format!(
            "I - A exp(-i {omega}) is singular"
        )));
    }
    let f = &h * h.adjoint() / Complex64::new(2.0 * PI, 0.0);
    Ok((0..d).map(|i| (0..d).map(|j| f[(i, j)]).collect()).collect())
}

/// `R = f^{12} / sqrt(f^{11} f^{22})` for a 2 x 2 (or larger; components 0, 1) spectral matrix.
pub fn traditional_coherency(f: &[Vec<Complex64>]) -> Complex64 {
    f[0][1] / (f[0][0].re * f[1][1].re).sqrt()
}

/// Stationary Gaussian processes with known second-moment features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GaussianProcessSpec {
    /// Bivariate iid normal with cross-correlation `rho`.
    WhiteNoise { rho: f64 },
    /// `X_t = A X_{t-1} + e_t`, unit innovation covariance.
    Var1 {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
    },
}

/// Tail target for the lag truncation.
pub const LAG_TOLERANCE: f64 = 1e-12;
pub const MIN_LAGS: usize = 64;

/// Lag covariances `c_k = Cov(X_{t+k}, X_t)` for `k = 0..=L` of a Gaussian
/// process, with `L` chosen from a geometric tail bound.
#[derive(Debug, Clone)]
pub struct GaussianOracle {
    d: usize,
    lags: Vec<DMatrix<f64>>,
}

impl GaussianOracle {
    pub fn new(spec: &GaussianProcessSpec) -> Result<Self> {
        Self::with_tolerance(spec, LAG_TOLERANCE)
    }

    pub fn with_tolerance(spec: &GaussianProcessSpec, tol: f64) -> Result<Self> {
        match spec {
            GaussianProcessSpec::WhiteNoise { rho } => {
                if rho.is_nan() || rho.abs() >= 1.0 {
                    return Err(Error::InvalidArgument(format!("correlation {rho} must lie in (-1, 1)")));
                }
                let c0 = DMatrix::from_row_slice(2, 2, &[1.0, *rho, *rho, 1.0]);
                Ok(Self { d: 2, lags: vec![c0] })
            }
            GaussianProcessSpec::Var1 { a } => {
                let radius = spectral_radius(a);
                if radius.is_nan() || radius >= 1.0 {
                    return Err(Error::Stability(radius));
                }
                let am = to_dmatrix(a);
                let d = am.nrows();
                let c0 = lyapunov(&am);
                let lags_needed = lag_cutoff(&am, &c0, tol);
                let mut lags = Vec::with_capacity(lags_needed + 1);
                lags.push(c0);
                for k in 1..=lags_needed {
                    let next = &am * &lags[k - 1];
                    lags.push(next);
                }
                Ok(Self { d, lags })
            }
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Largest lag kept.
    pub fn max_lag(&self) -> usize {
        self.lags.len() - 1
    }

    /// `Cov(X_{t+k, j1}, X_{t, j2})` for any integer `k` (zero beyond the cutoff).
    pub fn covariance(&self, k: i64, j1: usize, j2: usize) -> f64 {
        let abs = k.unsigned_abs() as usize;
        if abs > self.max_lag() {
            return 0.0;
        }
        if k >= 0 {
            self.lags[abs][(j1, j2)]
        } else {
            self.lags[abs][(j2, j1)]
        }
    }

    pub fn correlation(&self, k: i64, j1: usize, j2: usize) -> f64 {
        let c0 = &self.lags[0];
        self.covariance(k, j1, j2) / (c0[(j1, j1)] * c0[(j2, j2)]).sqrt()
    }

    /// Quantile cross-covariances `gamma_k(tau1, tau2)` for `k = -L..=L`.
    pub fn quantile_covariances(&self, tau1: f64, tau2: f64, j1: usize, j2: usize) -> Result<QuantileSpectrumSeries> {
        validate_quantile_grid(&[tau1])?;
        validate_quantile_grid(&[tau2])?;
        if j1 >= self.d || j2 >= self.d {
            return Err(Error::InvalidArgument(format!(
                "component index out of range for d = {}",
                self.d
            )));
        }
        let l = self.max_lag() as i64;
        let gammas = (-l..=l)
            .map(|k| {
                let rho = self.correlation(k, j1, j2);
                if k != 0 && (rho.is_nan() || rho.abs() >= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "lag-{k} correlation {rho} is degenerate"
                    )));
                }
                Ok(gaussian_copula_cdf(tau1, tau2, rho) - tau1 * tau2)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantileSpectrumSeries { max_lag: l, gammas })
    }

    pub fn quantile_spectrum(&self, omega: f64, tau1: f64, tau2: f64, j1: usize, j2: usize) -> Result<Complex64> {
        Ok(self.quantile_covariances(tau1, tau2, j1, j2)?.eval(omega))
    }
}

/// `c_0 = sum_{j >= 0} A^j (A^j)^T`, summed until the added term is below 1e-14.
fn lyapunov(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    let mut power = DMatrix::<f64>::identity(d, d);
    let mut sum = DMatrix::<f64>::zeros(d, d);
    for _ in 0..100_000 {
        let term = &power * power.transpose();
        let size = term.amax();
        sum += term;
        if size < 1e-14 {
            break;
        }
        power = a * power;
    }
    sum
}

/// Smallest `L >= MIN_LAGS` with `K sum_{k > L} q^k <= tol`, where `q` bounds
/// the per-lag decay of `||A^k||` and `K` converts covariances to correlations.
fn lag_cutoff(a: &DMatrix<f64>, c0: &DMatrix<f64>, tol: f64) -> usize {
    let d = a.nrows();
    let min_var = (0..d).map(|i| c0[(i, i)]).fold(f64::INFINITY, f64::min);
    let scale = c0.norm() / min_var;
    // ||A^m||^{1/m} < 1 for some m when the spectral radius is below one
    let mut power = a.clone();
    let mut m = 1;
    let mut worst: f64 = 1.0_f64.max(a.norm());
    while power.norm() >= 1.0 && m < 10_000 {
        power = a * power;
        m += 1;
        worst = worst.max(power.norm());
    }
    let q = power.norm().powf(1.0 / m as f64);
    if q == 0.0 {
        return MIN_LAGS;
    }
    let constant = scale * worst.max(1.0) * m as f64;
    let mut l = MIN_LAGS;
    while constant * q.powi(l as i32 + 1) / (1.0 - q) > tol && l < 1_000_000 {
        l += 1;
    }
    l
}

/// `f(w) = (2 pi)^{-1} sum_{|k| <= L} gamma_k e^{-ikw}`.
#[derive(Debug, Clone)]
pub struct QuantileSpectrumSeries {
    max_lag: i64,
    gammas: Vec<f64>,
}

impl QuantileSpectrumSeries {
    pub fn gamma(&self, k: i64) -> f64 {
        if k.abs() > self.max_lag {
            0.0
        } else {
            self.gammas[(k + self.max_lag) as usize]
        }
    }

    pub fn eval(&self, omega: f64) -> Complex64 {
        self.derivative(omega, 0)
    }

    /// `l`-th derivative in `w`, `(2 pi)^{-1} sum_k gamma_k (-ik)^l e^{-ikw}`.
    pub fn derivative(&self, omega: f64, l: u32) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -self.max_lag..=self.max_lag {
            let g = self.gamma(k);
            if g == 0.0 {
                continue;
            }
            let factor = Complex64::new(0.0, -(k as f64)).powu(l);
            acc += g * factor * Complex64::from_polar(1.0, -(k as f64) * omega);
        }
        acc / (2.0 * PI)
    }
}

pub fn gaussian_quantile_spectrum(
    spec: &GaussianProcessSpec,
    omega: f64,
    tau1: f64,
    tau2: f64,
    j1: usize,
    j2: usize,
) -> Result<Complex64> {
    GaussianOracle::new(spec)?.quantile_spectrum(omega, tau1, tau2, j1, j2)
}

/// Finite-difference step for the bias derivatives.
pub const BIAS_STEP: f64 = 1e-3;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central difference of order `l` with step `h`.
fn central_difference(f: &dyn Fn(f64) -> Complex64, omega: f64, l: u32, h: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=l {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = omega + (l as f64 / 2.0 - i as f64) * h;
        acc += sign * binomial(l, i) * f(x);
    }
    acc / h.powi(l as i32)
}

/// `l`-th derivative by central differences with one Richardson step.
pub fn finite_difference_derivative(f: &dyn Fn(f64) -> Complex64, omega: f64, l: u32) -> Complex64 {
    if l == 0 {
        return f(omega);
    }
    let coarse = central_difference(f, omega, l, BIAS_STEP);
    let fine = central_difference(f, omega, l, BIAS_STEP / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Leading smoothing bias `sum_{l=2}^{k_order} b^l / l! mu_l f^{(l)}(w)`.
#[allow(clippy::too_many_arguments)]
pub fn bias_matrix(
    spec: &GaussianProcessSpec,
    omega: f64,
    tau1: f64,
    tau2: f64,
    j1: usize,
    j2: usize,
    b_n: f64,
    kernel: &KernelSpec,
    k_order: u32,
) -> Result<Complex64> {
    if k_order == 0 {
        return Err(Error::InvalidArgument("bias order must be at least 1".into()));
    }
    if k_order < 2 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let series = GaussianOracle::new(spec)?.quantile_covariances(tau1, tau2, j1, j2)?;
    let f = |w: f64| series.eval(w);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut factorial = 1.0;
    for l in 2..=k_order {
        factorial *= l as f64;
        if l == 2 {
            factorial = 2.0;
        }
        let moment = kernel.moment(l);
        acc += b_n.powi(l as i32) / factorial * moment * finite_difference_derivative(&f, omega, l);
    }
    Ok(acc)
}

/// CCR-periodogram by explicit summation: quadratic rank counting and direct
/// cosine/sine sums, sharing no code with the FFT path.
#[derive(Debug, Clone)]
pub struct DirectReference {
    n: usize,
    ranks: Vec<Vec<usize>>,
}

impl DirectReference {
    pub fn new(x: &TimeSeriesMatrix) -> Self {
        let ranks = (0..x.d())
            .map(|j| {
                let col = x.column(j);
                col.iter().map(|&v| col.iter().filter(|&&w| w <= v).count()).collect()
            })
            .collect();
        Self { n: x.n(), ranks }
    }

    /// `sum_t 1{R_t <= n tau} e^{-i w t}` for component `j`.
    pub fn dft(&self, j: usize, tau: f64, omega: f64) -> Complex64 {
        let n = self.n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, &rank) in self.ranks[j].iter().enumerate() {
            if rank as f64 <= n * tau + 1e-12 * n {
                let phase = omega * t as f64;
                acc += Complex64::new(phase.cos(), -phase.sin());
            }
        }
        acc
    }

    pub fn value(&self, omega: f64, tau1: f64, tau2: f64, j1: usize, j2: usize) -> Complex64 {
        self.dft(j1, tau1, omega) * self.dft(j2, tau2, omega).conj() / (2.0 * PI * self.n as f64)
    }
}

/// CCR-periodogram at a single frequency; see [`DirectReference`].
pub fn direct_ccr_reference(x: &TimeSeriesMatrix, omega: f64, tau1: f64, tau2: f64, j1: usize, j2: usize) -> Complex64 {
    DirectReference::new(x).value(omega, tau1, tau2, j1, j2)
}

/// Independent route to the bivariate normal CDF: `int_{-inf}^{h} phi(x)
/// Phi((k - rho x) / sqrt(1 - rho^2)) dx`, for cross-checking.
pub fn bivariate_normal_cdf_by_conditioning(h: f64, k: f64, rho: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    let lo = (-40.0_f64).min(h - 1.0);
    quad::integrate(
        |x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt() * norm_cdf((k - rho * x) / s),
        lo,
        h,
        1e-15,
    )
}
