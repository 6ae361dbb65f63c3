//! Scalar functions on `[0, 1)` used as potentials and observables.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// A potential `V` or observable `f`, either in closed form or sampled on a grid.
///
/// Closed forms can be evaluated anywhere, which the continuous-state path
/// simulator and grid refinement rely on.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Constant(f64),
    /// `b + (1 − a0) x (1 − x)`, the potential paired with the polynomial kernel
    /// whose principal eigenfunction is quadratic.
    Quadratic { a0: f64, b: f64 },
    /// `constant + Σ_k cos[k] cos(2π(k+1)x) + sin[k] sin(2π(k+1)x)`.
    Trig {
        constant: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Tabulated(GridFunction),
}

impl Field {
    pub fn zero() -> Self {
        Field::Constant(0.0)
    }

    pub fn quadratic(a0: f64, b: f64) -> Self {
        Field::Quadratic { a0, b }
    }

    /// `amplitude · cos(2πx)`.
    pub fn cosine(amplitude: f64) -> Self {
        Field::Trig {
            constant: 0.0,
            cos: vec![amplitude],
            sin: vec![],
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, Field::Tabulated(_))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Field::Constant(c) => *c,
            Field::Quadratic { a0, b } => b + (1.0 - a0) * x * (1.0 - x),
            Field::Trig { constant, cos, sin } => {
                let mut v = *constant;
                for (k, c) in cos.iter().enumerate() {
                    v += c * (TAU * (k + 1) as f64 * x).cos();
                }
                for (k, s) in sin.iter().enumerate() {
                    v += s * (TAU * (k + 1) as f64 * x).sin();
                }
                v
            }
            Field::Tabulated(g) => {
                let table = Grid::new(g.len())?;
                let k = table
                    .node_index(x)
                    .ok_or(Error::InterpolationUnsupported { x, y: x })?;
                g.get(k)
            }
        })
    }

    /// Values at the grid nodes.
    pub fn on_grid(&self, grid: &Grid) -> Result<GridFunction> {
        if let Field::Tabulated(g) = self {
            g.check_len(grid)?;
            return Ok(g.clone());
        }
        let mut out = Vec::with_capacity(grid.n());
        for &x in grid.nodes() {
            out.push(self.eval(x)?);
        }
        Ok(GridFunction::from_vec(out))
    }
}
