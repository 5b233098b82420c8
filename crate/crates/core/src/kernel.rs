//! Smoothing kernels on `[-pi, pi]` and their periodized, rescaled weights.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Epanechnikov,
    Rectangular,
}

/// A real, even weight function supported on `[-pi, pi]` with unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Order `p`: the first nonvanishing moment `int v^p W(v) dv` beyond the zeroth.
    pub order: u32,
}

impl KernelSpec {
    pub const fn epanechnikov() -> Self {
        Self {
            kind: KernelKind::Epanechnikov,
            order: 2,
        }
    }

    pub const fn rectangular() -> Self {
        Self {
            kind: KernelKind::Rectangular,
            order: 2,
        }
    }

    /// `W(v)`; zero outside `[-pi, pi]`.
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        if !(-PI..=PI).contains(&v) {
            return 0.0;
        }
        match self.kind {
            KernelKind::Epanechnikov => {
                let x = v / PI;
                0.75 / PI * (1.0 - x * x)
            }
            KernelKind::Rectangular => 0.5 / PI,
        }
    }

    /// `int_{-pi}^{pi} v^l W(v) dv` by adaptive quadrature.
    pub fn moment(&self, l: u32) -> f64 {
        quad::integrate(|v| v.powi(l as i32) * self.eval(v), -PI, PI, 1e-14)
    }

    pub fn squared_integral(&self) -> f64 {
        quad::integrate(|v| self.eval(v).powi(2), -PI, PI, 1e-14)
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::epanechnikov()
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Epanechnikov => f.write_str("epanechnikov"),
            KernelKind::Rectangular => f.write_str("rectangular"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" => Ok(Self::epanechnikov()),
            "rectangular" => Ok(Self::rectangular()),
            other => Err(Error::InvalidArgument(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Default bandwidth `0.4 n^{-1/4}`.
pub fn default_bandwidth(n: usize) -> f64 {
    0.4 * (n as f64).powf(-0.25)
}

pub(crate) fn check_bandwidth(b_n: f64) -> Result<()> {
    if b_n > 0.0 && b_n <= 1.0 {
        Ok(())
    } else {
        Err(Error::Bandwidth(b_n))
    }
}

/// Reduces `u` to `[-pi, pi)`.
#[inline]
pub(crate) fn wrap_angle(u: f64) -> f64 {
    let r = (u + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Periodized weight `W_n(u) = sum_j b^{-1} W(b^{-1}(u + 2 pi j))`.
///
/// `u` is first reduced to `[-pi, pi)`; with `b <= 1` only the shifts
/// `j in {-1, 0, 1}` can reach the kernel support.
pub fn wrapped_kernel_weight(kernel: &KernelSpec, b_n: f64, u: f64) -> Result<f64> {
    check_bandwidth(b_n)?;
    Ok(wrapped_weight_unchecked(kernel, b_n, u))
}

#[inline]
pub(crate) fn wrapped_weight_unchecked(kernel: &KernelSpec, b_n: f64, u: f64) -> f64 {
    let u = wrap_angle(u);
    let inv = 1.0 / b_n;
    (-1..=1)
        .map(|j| kernel.eval(inv * (u + 2.0 * PI * j as f64)))
        .sum::<f64>()
        * inv
}
