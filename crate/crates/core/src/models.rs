//! Seeded simulators: quantile vector autoregressions, Gaussian VAR(1) and a
//! few toy processes.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededStream;
use crate::series::TimeSeriesMatrix;
use crate::special::norm_quantile;

pub const DEFAULT_BURN_IN: usize = 1024;

/// A coefficient as a function of the driving uniform `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientFn {
    Constant(f64),
    /// `alpha + beta (u - 0.5)`.
    Linear {
        alpha: f64,
        beta: f64,
    },
    /// `Phi^{-1}(u)`.
    NormalQuantile,
}

impl CoefficientFn {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            CoefficientFn::Constant(c) => c,
            CoefficientFn::Linear { alpha, beta } => alpha + beta * (u - 0.5),
            CoefficientFn::NormalQuantile => norm_quantile(u),
        }
    }

    /// `sup_u |f(u)|` over the unit interval.
    pub fn sup_abs(&self) -> f64 {
        match *self {
            CoefficientFn::Constant(c) => c.abs(),
            CoefficientFn::Linear { alpha, beta } => (alpha - 0.5 * beta).abs().max((alpha + 0.5 * beta).abs()),
            CoefficientFn::NormalQuantile => f64::INFINITY,
        }
    }

    fn from_parts(form: &str, params: &[f64]) -> Result<Self> {
        let arity = |k: usize| {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "form '{form}' takes {k} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match form {
            "constant" => {
                arity(1)?;
                Ok(Self::Constant(params[0]))
            }
            "linear" => {
                arity(2)?;
                Ok(Self::Linear {
                    alpha: params[0],
                    beta: params[1],
                })
            }
            "normal_quantile" => {
                arity(0)?;
                Ok(Self::NormalQuantile)
            }
            other => Err(Error::InvalidArgument(format!("unknown coefficient form '{other}'"))),
        }
    }

    fn to_parts(self) -> (String, Vec<f64>) {
        match self {
            CoefficientFn::Constant(c) => ("constant".into(), vec![c]),
            CoefficientFn::Linear { alpha, beta } => ("linear".into(), vec![alpha, beta]),
            CoefficientFn::NormalQuantile => ("normal_quantile".into(), vec![]),
        }
    }
}

/// QVAR(p): `X_t = theta0(U_t) + sum_j Theta_j(U_t) X_{t-j}`, where every
/// function in row `l` is evaluated at the same uniform `U_{t,l}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QvarJson", into = "QvarJson")]
pub struct QvarSpec {
    p: usize,
    d: usize,
    /// `coeff[lag][row][col]`, zero-based.
    coeff: Vec<Vec<Vec<CoefficientFn>>>,
    intercept: Vec<CoefficientFn>,
}

impl QvarSpec {
    /// All coefficients zero and all intercepts constant zero.
    pub fn zeros(p: usize, d: usize) -> Result<Self> {
        if p == 0 || d == 0 {
            return Err(Error::InvalidArgument(
                "QVAR order and dimension must be positive".into(),
            ));
        }
        Ok(Self {
            p,
            d,
            coeff: vec![vec![vec![CoefficientFn::Constant(0.0); d]; d]; p],
            intercept: vec![CoefficientFn::Constant(0.0); d],
        })
    }

    /// Zero-based setters.
    pub fn with_coeff(mut self, lag: usize, row: usize, col: usize, f: CoefficientFn) -> Self {
        self.coeff[lag][row][col] = f;
        self
    }

    pub fn with_intercept(mut self, row: usize, f: CoefficientFn) -> Self {
        self.intercept[row] = f;
        self
    }

    /// The bivariate QVAR(1) with normal-quantile intercepts, zero diagonal
    /// and off-diagonal coefficients `1.2 (u - 0.5)`.
    pub fn cross_linear_qvar1() -> Self {
        let off = CoefficientFn::Linear { alpha: 0.0, beta: 1.2 };
        Self::zeros(1, 2)
            .expect("valid order")
            .with_intercept(0, CoefficientFn::NormalQuantile)
            .with_intercept(1, CoefficientFn::NormalQuantile)
            .with_coeff(0, 0, 1, off)
            .with_coeff(0, 1, 0, off)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeff(&self, lag: usize, row: usize, col: usize) -> CoefficientFn {
        self.coeff[lag][row][col]
    }

    pub fn intercept(&self, row: usize) -> CoefficientFn {
        self.intercept[row]
    }

    /// `sum_j max_l sum_m sup_u |Theta_j(u)_{lm}|`; below one is sufficient for
    /// a stationary solution.
    pub fn stability_bound(&self) -> f64 {
        self.coeff
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| row.iter().map(|f| f.sup_abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoeffEntry {
    lag: usize,
    row: usize,
    col: usize,
    form: String,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InterceptEntry {
    row: usize,
    form: String,
    #[serde(default)]
    params: Vec<f64>,
}

/// JSON form; indices are one-based and omitted cells are constant zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct QvarJson {
    p: usize,
    d: usize,
    #[serde(default)]
    coeff: Vec<CoeffEntry>,
    #[serde(default)]
    intercept: Vec<InterceptEntry>,
}

impl TryFrom<QvarJson> for QvarSpec {
    type Error = Error;

    fn try_from(j: QvarJson) -> Result<Self> {
        let mut spec = QvarSpec::zeros(j.p, j.d)?;
        let mut seen = vec![vec![vec![false; j.d]; j.d]; j.p];
        let bad = |what: &str| Error::InvalidArgument(format!("QVAR spec: {what}"));
        for c in &j.coeff {
            if c.lag == 0 || c.lag > j.p || c.row == 0 || c.row > j.d || c.col == 0 || c.col > j.d {
                return Err(bad(&format!(
                    "index (lag {}, row {}, col {}) out of range",
                    c.lag, c.row, c.col
                )));
            }
            let (l, r, k) = (c.lag - 1, c.row - 1, c.col - 1);
            if std::mem::replace(&mut seen[l][r][k], true) {
                return Err(bad(&format!(
                    "duplicate entry (lag {}, row {}, col {})",
                    c.lag, c.row, c.col
                )));
            }
            spec.coeff[l][r][k] = CoefficientFn::from_parts(&c.form, &c.params)?;
        }
        let mut seen_row = vec![false; j.d];
        for c in &j.intercept {
            if c.row == 0 || c.row > j.d {
                return Err(bad(&format!("intercept row {} out of range", c.row)));
            }
            if std::mem::replace(&mut seen_row[c.row - 1], true) {
                return Err(bad(&format!("duplicate intercept row {}", c.row)));
            }
            spec.intercept[c.row - 1] = CoefficientFn::from_parts(&c.form, &c.params)?;
        }
        Ok(spec)
    }
}

impl From<QvarSpec> for QvarJson {
    fn from(s: QvarSpec) -> Self {
        let mut coeff = Vec::new();
        for (l, m) in s.coeff.iter().enumerate() {
            for (r, row) in m.iter().enumerate() {
                for (c, f) in row.iter().enumerate() {
                    if *f != CoefficientFn::Constant(0.0) {
                        let (form, params) = f.to_parts();
                        coeff.push(CoeffEntry {
                            lag: l + 1,
                            row: r + 1,
                            col: c + 1,
                            form,
                            params,
                        });
                    }
                }
            }
        }
        let intercept = s
            .intercept
            .iter()
            .enumerate()
            .map(|(r, f)| {
                let (form, params) = f.to_parts();
                InterceptEntry {
                    row: r + 1,
                    form,
                    params,
                }
            })
            .collect();
        QvarJson {
            p: s.p,
            d: s.d,
            coeff,
            intercept,
        }
    }
}

/// Gaussian VAR(1) `X_t = A X_{t-1} + e_t` with identity innovation covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VarJson", into = "VarJson")]
pub struct VarModel {
    a: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VarJson {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
}

impl TryFrom<VarJson> for VarModel {
    type Error = Error;

    fn try_from(j: VarJson) -> Result<Self> {
        VarModel::new(j.a)
    }
}

impl From<VarModel> for VarJson {
    fn from(m: VarModel) -> Self {
        VarJson { a: m.a }
    }
}

impl VarModel {
    pub fn new(a: Vec<Vec<f64>>) -> Result<Self> {
        let d = a.len();
        if d == 0 || a.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(
                "VAR coefficient matrix must be square and nonempty".into(),
            ));
        }
        if a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("VAR coefficients must be finite".into()));
        }
        Ok(Self { a })
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.a)
    }
}

pub(crate) fn to_dmatrix(a: &[Vec<f64>]) -> DMatrix<f64> {
    let d = a.len();
    DMatrix::from_fn(d, d, |i, j| a[i][j])
}

pub fn spectral_radius(a: &[Vec<f64>]) -> f64 {
    to_dmatrix(a)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Model specification as read from JSON, tagged by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelSpec {
    Qvar(QvarSpec),
    Var1(VarModel),
}

fn check_length(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::InvalidArgument(format!("series length {n} is below {min}")))
    } else {
        Ok(())
    }
}

fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

/// Runs the QVAR recursion from zero initial values and keeps the last `n` of
/// `burn_in + n` steps. Stability is the caller's responsibility; a warning is
/// logged when the sufficient condition fails.
pub fn simulate_qvar(spec: &QvarSpec, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeriesMatrix> {
    check_length(n, 2)?;
    let bound = spec.stability_bound();
    if bound.is_nan() || bound >= 1.0 {
        warn!("QVAR coefficient bound {bound} is not below one; stationarity is not guaranteed");
    }
    let (p, d) = (spec.p, spec.d);
    let total = burn_in + n;
    let mut rng = SeededStream::new(seed, 0);
    // history[t] for t in 0..total, with implicit zeros before t = 0
    let mut history: Vec<Vec<f64>> = Vec::with_capacity(total);
    let mut u = vec![0.0; d];
    for t in 0..total {
        for v in u.iter_mut() {
            *v = rng.uniform();
        }
        let mut x = vec![0.0; d];
        for (l, xl) in x.iter_mut().enumerate() {
            let mut acc = spec.intercept[l].eval(u[l]);
            for j in 1..=p.min(t) {
                let prev = &history[t - j];
                for (m, &pm) in prev.iter().enumerate() {
                    acc += spec.coeff[j - 1][l][m].eval(u[l]) * pm;
                }
            }
            *xl = acc;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stability(f64::INFINITY));
        }
        history.push(x);
    }
    let columns = (0..d)
        .map(|j| history[burn_in..].iter().map(|x| x[j]).collect())
        .collect();
    TimeSeriesMatrix::from_columns(columns, default_names(d))
}

pub fn simulate_var1(model: &VarModel, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeriesMatrix> {
    check_length(n, 2)?;
    let radius = model.spectral_radius();
    if radius.is_nan() || radius >= 1.0 {
        warn!("VAR(1) spectral radius {radius} is not below one");
    }
    let d = model.d();
    let mut rng = SeededStream::new(seed, 0);
    let mut x = vec![0.0; d];
    let mut columns = vec![Vec::with_capacity(n); d];
    for t in 0..burn_in + n {
        let eps = rng.normals(d);
        let next: Vec<f64> = (0..d)
            .map(|i| eps[i] + (0..d).map(|j| model.a[i][j] * x[j]).sum::<f64>())
            .collect();
        x = next;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stability(radius));
        }
        if t >= burn_in {
            for (c, v) in columns.iter_mut().zip(&x) {
                c.push(*v);
            }
        }
    }
    TimeSeriesMatrix::from_columns(columns, default_names(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyKind {
    /// `(e_t, e_t^2)`.
    EpsSquareNow,
    /// `(e_t, e_{t-1}^2)`.
    EpsSquareLag1,
    /// Two independent normal series.
    IndependentNoise,
}

impl fmt::Display for ToyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToyKind::EpsSquareNow => "eps_square_now",
            ToyKind::EpsSquareLag1 => "eps_square_lag1",
            ToyKind::IndependentNoise => "independent_noise",
        })
    }
}

impl FromStr for ToyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps_square_now" => Ok(ToyKind::EpsSquareNow),
            "eps_square_lag1" => Ok(ToyKind::EpsSquareLag1),
            "independent_noise" => Ok(ToyKind::IndependentNoise),
            other => Err(Error::InvalidArgument(format!("unknown toy process '{other}'"))),
        }
    }
}

/// Columns are named `x` and `y`.
pub fn simulate_toy(kind: ToyKind, n: usize, seed: u64) -> Result<TimeSeriesMatrix> {
    check_length(n, 2)?;
    let (x, y) = match kind {
        ToyKind::EpsSquareNow => {
            let e = SeededStream::new(seed, 0).normals(n);
            let y = e.iter().map(|v| v * v).collect();
            (e, y)
        }
        ToyKind::EpsSquareLag1 => {
            // e_0 is the extra leading draw; x_t = e_{t+1}, y_t = e_t^2
            let e = SeededStream::new(seed, 0).normals(n + 1);
            let y = e[..n].iter().map(|v| v * v).collect();
            (e[1..].to_vec(), y)
        }
        ToyKind::IndependentNoise => (
            SeededStream::new(seed, 0).normals(n),
            SeededStream::new(seed, 1).normals(n),
        ),
    };
    TimeSeriesMatrix::from_columns(vec![x, y], vec!["x".into(), "y".into()])
}
