//! The uniform periodic quadrature grid and functions sampled on it.

use ndarray::Array1;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Uniform grid on the circle `[0, 1)` with nodes `k / n` and equal weights `1 / n`.
///
/// Every integral over `[0, 1]` in this crate is replaced by the periodic
/// trapezoid rule on this grid, so an `n`-node grid turns an integral operator
/// into an `n x n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    nodes: Array1<f64>,
    weights: Array1<f64>,
}

impl Grid {
    /// Builds the grid with `n` nodes.
    ///
    /// ```
    /// let grid = ctruelle::Grid::new(4).unwrap();
    /// assert_eq!(grid.nodes().to_vec(), vec![0.0, 0.25, 0.5, 0.75]);
    /// assert!(ctruelle::Grid::new(1).is_err());
    /// ```
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(n));
        }
        let h = 1.0 / n as f64;
        Ok(Self {
            n,
            nodes: Array1::from_shape_fn(n, |k| k as f64 * h),
            weights: Array1::from_elem(n, h),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing, which is also the common quadrature weight.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn nodes(&self) -> &Array1<f64> {
        &self.nodes
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// Index of the node at `x`, if `x` is a node up to rounding.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let scaled = x * self.n as f64;
        let k = scaled.round();
        if (scaled - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < self.n {
            Some(k as usize)
        } else {
            None
        }
    }
}

/// Real values aligned with the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Array1<f64>,
}

impl GridFunction {
    pub fn new(values: Array1<f64>) -> Self {
        Self { values }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self::new(Array1::from(values))
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid.nodes().mapv(f))
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::new(Array1::from_elem(grid.n(), c))
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array1<f64> {
        self.values
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Quadrature of the function over `[0, 1]`.
    pub fn integrate(&self, grid: &Grid) -> f64 {
        self.values.dot(grid.weights())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.values.mapv(f))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise combination of two functions of equal length.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Sup-norm of the difference with `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.zip_map(other, |a, b| a - b).sup_norm()
    }

    pub(crate) fn check_len(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.n() {
            return Err(Error::GridMismatch {
                expected: grid.n(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl Serialize for GridFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.values.iter())
    }
}
