//! Multivariate observation matrix.

use crate::error::{Error, Result};

/// `n` observations of a `d`-variate series, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    n: usize,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
}

impl TimeSeriesMatrix {
    /// Builds a matrix from component columns.
    ///
    /// Every column must have the same length `n >= 2`, there must be at
    /// least one column, and every entry must be finite.
    pub fn from_columns(columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("need at least one component".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} names given for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 observations, got {n}")));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "column {j} has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(t) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value {} at row {t}, column '{}'",
                    col[t], names[j]
                )));
            }
        }
        Ok(Self { n, columns, names })
    }

    /// Same as [`from_columns`](Self::from_columns) with names `x1, x2, ...`.
    pub fn from_columns_unnamed(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("x{j}")).collect();
        Self::from_columns(columns, names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.columns[j][t]
    }

    /// Keeps only the listed components, in the listed order.
    pub fn select(&self, components: &[usize]) -> Result<Self> {
        let mut cols = Vec::with_capacity(components.len());
        let mut names = Vec::with_capacity(components.len());
        for &j in components {
            if j >= self.d() {
                return Err(Error::InvalidArgument(format!(
                    "component {j} out of range (d = {})",
                    self.d()
                )));
            }
            cols.push(self.columns[j].clone());
            names.push(self.names[j].clone());
        }
        Self::from_columns(cols, names)
    }
}
