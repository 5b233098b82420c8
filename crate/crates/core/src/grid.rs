//! Quantile and Fourier frequency grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing quantile levels, each in the open unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantileGrid {
    levels: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        validate_quantile_grid(&levels)?;
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.levels[k]
    }
}

impl TryFrom<Vec<f64>> for QuantileGrid {
    type Error = Error;

    fn try_from(levels: Vec<f64>) -> Result<Self> {
        Self::new(levels)
    }
}

impl From<QuantileGrid> for Vec<f64> {
    fn from(grid: QuantileGrid) -> Self {
        grid.levels
    }
}

impl Default for QuantileGrid {
    fn default() -> Self {
        Self {
            levels: vec![0.05, 0.25, 0.5, 0.75, 0.95],
        }
    }
}

/// Checks that `levels` is a valid quantile grid. Boundary violations are
/// reported before ordering violations.
pub fn validate_quantile_grid(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("empty quantile grid".into()));
    }
    if let Some(&tau) = levels.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::BoundaryQuantile(tau));
    }
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::QuantileOrdering { prev: w[0], next: w[1] });
        }
    }
    Ok(())
}

/// Fourier frequencies `2 pi s / n`, `s = 0, ..., n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    n: usize,
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn omega(&self, s: usize) -> f64 {
        self.omegas[s]
    }
}

/// The `s`-th Fourier frequency for sample size `n`, evaluated as `(2 pi s) / n`.
#[inline]
pub fn fourier_frequency(s: usize, n: usize) -> f64 {
    2.0 * PI * s as f64 / n as f64
}

pub fn make_fourier_grid(n: usize) -> Result<FrequencyGrid> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Fourier grid needs n >= 2, got {n}")));
    }
    let omegas = (0..n).map(|s| fourier_frequency(s, n)).collect();
    Ok(FrequencyGrid { n, omegas })
}
