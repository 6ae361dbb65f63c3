//! The principal eigenproblem `(L + V) r = λ r`, `(L* + V) ℓ = λ ℓ`, the
//! Ruelle operator, and the closed form for the quadratic family.

use ndarray::Array1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, GridFunction};
use crate::kernels::{KernelModel, Nystrom};
use crate::linalg::perron_iteration;
use crate::quadrature::{integrate_cells, LocalInterpolant};
use crate::semigroup::{feynman_kac_operator, generator_matrix};

/// Principal eigenvalue with its right and left eigenfunctions, normalised so
/// that `∫ ℓ dx = 1` and `∫ r ℓ dx = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralTriple {
    pub lambda: f64,
    pub right: GridFunction,
    pub left: GridFunction,
    pub iterations: usize,
}

/// Stopping rule for [`principal_eigenpair`].
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Relative width of the Collatz–Wielandt bracket at which to stop.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 1_000_000,
        }
    }
}

/// `𝕃_V^t φ = e^{t(L+V)} φ`.
pub fn ruelle_apply(disc: &Nystrom, v: &GridFunction, phi: &GridFunction, t: f64) -> Result<GridFunction> {
    phi.check_len(disc.grid())?;
    Ok(feynman_kac_operator(disc, Some(v), t)?.apply(phi))
}

/// Principal eigentriple of the discretised `L + V`.
///
/// Power iteration on `A + cI`, `c = 2 + max(0, −min V) + |max V|`, which is a
/// positive matrix for a positive kernel. The left eigenfunction is the right
/// eigenfunction of the `L²(dx)` adjoint, which for uniform weights is `Aᵀ`.
///
/// ```
/// use ctruelle::{principal_eigenpair, EigenOptions, GridFunction, Grid, KernelModel, Nystrom};
/// let grid = Grid::new(32)?;
/// let disc = Nystrom::new(&KernelModel::cosine(), &grid)?;
/// let v = GridFunction::constant(&grid, 0.25);
/// let triple = principal_eigenpair(&disc, &v, EigenOptions::default())?;
/// assert!((triple.lambda - 0.25).abs() < 1e-12);
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn principal_eigenpair(disc: &Nystrom, v: &GridFunction, opts: EigenOptions) -> Result<SpectralTriple> {
    disc.require_positive()?;
    let a = generator_matrix(disc, Some(v))?;
    let shift = 2.0 + (-v.min()).max(0.0) + v.max().abs();
    let mut b = a;
    for i in 0..disc.n() {
        b[[i, i]] += shift;
    }
    let bt = b.t().to_owned();
    let start = Array1::ones(disc.n());
    let right = perron_iteration(|x| b.dot(x), start.clone(), opts.tol, opts.max_iter, "principal eigenpair")?;
    let left = perron_iteration(|x| bt.dot(x), start, opts.tol, opts.max_iter, "left eigenfunction")?;
    let r = orient(right.vector)?;
    let l = orient(left.vector)?;
    let grid = disc.grid();
    let l = GridFunction::new(&l / (l.sum() * grid.h()));
    let r = GridFunction::new(&r / ((&r * l.values()).sum() * grid.h()));
    Ok(SpectralTriple {
        lambda: right.value - shift,
        right: r,
        left: l,
        iterations: right.iterations.max(left.iterations),
    })
}

fn orient(v: Array1<f64>) -> Result<Array1<f64>> {
    let v = if v.sum() < 0.0 { -v } else { v };
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::SpectralAnomaly { min });
    }
    Ok(v)
}

/// Max-norm residuals of the discrete right and left eigen-equations.
pub fn triple_residuals(disc: &Nystrom, v: &GridFunction, triple: &SpectralTriple) -> Result<(f64, f64)> {
    let a = generator_matrix(disc, Some(v))?;
    let r = triple.right.values();
    let l = triple.left.values();
    let right = (a.dot(r) - r * triple.lambda).iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let left = (a.t().dot(l) - l * triple.lambda).iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    Ok((right, left))
}

/// Continuum estimate of the principal eigenpair obtained by Richardson
/// extrapolation from grids with `n` and `2n` nodes.
#[derive(Clone, Debug, Serialize)]
pub struct RefinedEigenpair {
    /// `(4 λ_{2n} − λ_n) / 3`.
    pub lambda: f64,
    /// Extrapolated right eigenfunction on the `n`-node grid, scaled to unit maximum.
    pub right: GridFunction,
    /// Discrete triple on the `n`-node grid.
    pub coarse: SpectralTriple,
    /// Discrete eigenvalue on the `2n`-node grid.
    pub fine_lambda: f64,
}

/// Principal eigenpair with the leading `O(h²)` quadrature error removed.
///
/// The periodic trapezoid rule is spectrally accurate for smooth periodic
/// kernels, where this changes nothing. The polynomial kernel has kinks
/// on the diagonal `x + y ≡ 0`, which limits the discrete eigenvalue to
/// second order. The error expansion is then even in `h`, so one
/// Richardson step on nodes shared by both grids restores high accuracy.
pub fn refined_eigenpair(model: &KernelModel, v: &Field, n: usize, opts: EigenOptions) -> Result<RefinedEigenpair> {
    if model.is_tabulated() || !v.is_analytic() {
        return Err(Error::InvalidParameter(
            "grid refinement needs an analytic kernel and potential".into(),
        ));
    }
    let coarse_grid = Grid::new(n)?;
    let fine_grid = Grid::new(2 * n)?;
    let coarse_disc = Nystrom::new(model, &coarse_grid)?;
    let fine_disc = Nystrom::new(model, &fine_grid)?;
    let coarse = principal_eigenpair(&coarse_disc, &v.on_grid(&coarse_grid)?, opts)?;
    let fine = principal_eigenpair(&fine_disc, &v.on_grid(&fine_grid)?, opts)?;
    let rc = coarse.right.scaled(1.0 / coarse.right.max());
    let rf = fine.right.scaled(1.0 / fine.right.max());
    let right: Array1<f64> = (0..n)
        .map(|i| (4.0 * rf.get(2 * i) - rc.get(i)) / 3.0)
        .collect();
    let max = right.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RefinedEigenpair {
        lambda: (4.0 * fine.lambda - coarse.lambda) / 3.0,
        right: GridFunction::new(right / max),
        fine_lambda: fine.lambda,
        coarse,
    })
}

/// The quadratic `c0 + c1 x (1 − x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticProfile {
    pub c0: f64,
    pub c1: f64,
}

impl QuadraticProfile {
    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x * (1.0 - x)
    }

    pub fn on_grid(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }

    /// Minimum over `[0, 1]`.
    pub fn min_on_unit_interval(&self) -> f64 {
        self.eval(0.0).min(self.eval(0.5))
    }
}

/// Both eigen-branches of the polynomial kernel with the quadratic potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticEigenSolution {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub plus: QuadraticProfile,
    pub minus: QuadraticProfile,
}

/// Closed-form eigenpairs for `P(x, y) = g((x + y) mod 1)`,
/// `g(s) = a0 + 6(1 − a0)s(1 − s)` and `V(x) = b + (1 − a0)x(1 − x)`:
///
/// `λ± = (−15 ± √(405 − 210 a0 + 30 a0²) + 30 b) / 30`, with eigenfunction
/// `c1 ((b − 1 − λ)/(a0 − 1) + x(1 − x))`.
///
/// ```
/// let s = ctruelle::quadratic_closed_form(0.5, 0.0, 1.0)?;
/// assert!((s.lambda_plus - (-15.0 + 307.5f64.sqrt()) / 30.0).abs() < 1e-15);
/// assert!(s.plus.min_on_unit_interval() > 0.0);
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn quadratic_closed_form(a0: f64, b: f64, c1: f64) -> Result<QuadraticEigenSolution> {
    if !(a0 > 0.0) || !a0.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("need a0 > 0 and finite b, got a0 = {a0}, b = {b}")));
    }
    if a0 == 1.0 {
        return Err(Error::ExcludedParameter("a0 = 1 divides by zero".into()));
    }
    if c1 == 0.0 || !c1.is_finite() {
        return Err(Error::InvalidParameter("c1 must be nonzero".into()));
    }
    let root = (405.0 - 210.0 * a0 + 30.0 * a0 * a0).sqrt();
    let lambda_plus = (-15.0 + root + 30.0 * b) / 30.0;
    let lambda_minus = (-15.0 - root + 30.0 * b) / 30.0;
    let profile = |lambda: f64| QuadraticProfile {
        c0: c1 * (b - 1.0 - lambda) / (a0 - 1.0),
        c1,
    };
    Ok(QuadraticEigenSolution {
        lambda_plus,
        lambda_minus,
        plus: profile(lambda_plus),
        minus: profile(lambda_minus),
    })
}

/// Sup-norm over the grid of `∫ [f(y) − f(x)] P(x, y) dy + V(x) f(x) − λ f(x)`.
///
/// For analytic kernels the integral is computed in the continuum: `f` is
/// interpolated by local degree-7 polynomials and integrated by composite
/// Gauss–Legendre on the grid cells, so exact closed-form solutions give
/// residuals at rounding level. Tabulated kernels use the grid rule.
pub fn eigen_residual(disc: &Nystrom, v: &GridFunction, f: &GridFunction, lambda: f64) -> Result<f64> {
    let grid = disc.grid();
    v.check_len(grid)?;
    f.check_len(grid)?;
    let n = grid.n();
    let model = disc.model();
    let interp = LocalInterpolant::new(f.values().as_slice().expect("contiguous"));
    let raw = if model.is_tabulated() { Some(model.matrix(grid)?) } else { None };
    let mut worst = 0.0_f64;
    for i in 0..n {
        let x = grid.node(i);
        let fx = f.get(i);
        let jump = match &raw {
            Some(m) => (0..n).map(|j| (f.get(j) - fx) * m[[i, j]]).sum::<f64>() * grid.h(),
            None => integrate_cells(n, |y| (interp.eval(y) - fx) * model.eval(x, y).unwrap_or(f64::NAN)),
        };
        worst = worst.max((jump + (v.get(i) - lambda) * fx).abs());
    }
    Ok(worst)
}
