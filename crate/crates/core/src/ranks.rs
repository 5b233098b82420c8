//! Rank transform and clipped indicator series.
//!
//! `R_{n;t,j}` is the maximum rank of `X_{t,j}` among the `n` observations of
//! component `j`, so that `R/n` equals the empirical distribution function at
//! that observation. Clipping at level `tau` keeps `I{R <= n tau}`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::QuantileGrid;
use crate::series::TimeSeriesMatrix;

/// Relative nudge applied to `n tau` before comparing with an integer rank.
///
/// Levels such as 0.05 are not exact binary fractions; without the nudge
/// `n * tau` can land one ulp below an integer and drop a rank.
pub const CLIP_NUDGE: f64 = 1e-12;

/// `result[t] = #{s : x_s <= x_t}`; tied values share the largest rank of the group.
pub fn max_ranks(column: &[f64]) -> Result<Vec<usize>> {
    if let Some(t) = column.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidData(format!(
            "non-finite value {} at position {t}",
            column[t]
        )));
    }
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut ranks = vec![0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && column[order[end]] == column[order[start]] {
            end += 1;
        }
        for &t in &order[start..end] {
            ranks[t] = end;
        }
        start = end;
    }
    Ok(ranks)
}

/// Largest rank admitted at level `tau`, i.e. `floor(n tau + nudge)`.
#[inline]
pub fn clip_threshold(n: usize, tau: f64) -> f64 {
    n as f64 * tau + CLIP_NUDGE * n as f64
}

/// `result[t] = I{ranks[t] <= n tau}`.
pub fn clip_series(ranks: &[usize], n: usize, tau: f64) -> Vec<u8> {
    let threshold = clip_threshold(n, tau);
    ranks.iter().map(|&r| u8::from(r as f64 <= threshold)).collect()
}

/// Ranks of every component, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    n: usize,
    ranks: Vec<Vec<usize>>,
}

impl RankMatrix {
    pub fn from_series(x: &TimeSeriesMatrix) -> Result<Self> {
        let ranks = x
            .columns()
            .par_iter()
            .map(|c| max_ranks(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: x.n(), ranks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.ranks.len()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.ranks[j]
    }
}

/// Indicator bits `I{R_{n;t,j} <= n tau_k}` for every component `j` and level `k`.
///
/// Stored as one contiguous length-`n` series per `(j, k)`, with `(j, k)`
/// flattened as `j * K + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedTensor {
    n: usize,
    d: usize,
    levels: QuantileGrid,
    bits: Vec<Vec<u8>>,
}

impl ClippedTensor {
    pub fn new(ranks: &RankMatrix, levels: &QuantileGrid) -> Self {
        let n = ranks.n();
        let k = levels.len();
        let bits = (0..ranks.d() * k)
            .into_par_iter()
            .map(|a| clip_series(ranks.column(a / k), n, levels.get(a % k)))
            .collect();
        Self {
            n,
            d: ranks.d(),
            levels: levels.clone(),
            bits,
        }
    }

    pub fn from_series(x: &TimeSeriesMatrix, levels: &QuantileGrid) -> Result<Self> {
        Ok(Self::new(&RankMatrix::from_series(x)?, levels))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn levels(&self) -> &QuantileGrid {
        &self.levels
    }

    pub fn series(&self, j: usize, k: usize) -> &[u8] {
        &self.bits[j * self.levels.len() + k]
    }

    pub(crate) fn flat_series(&self) -> &[Vec<u8>] {
        &self.bits
    }

    pub fn get(&self, t: usize, j: usize, k: usize) -> u8 {
        self.series(j, k)[t]
    }
}
