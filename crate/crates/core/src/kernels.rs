//! Jump kernels `P(x, y)` on `[0, 1)`, their Nyström discretisation, kernel
//! powers and the invariant density.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::linalg::perron_iteration;
use crate::quadrature::integrate_cells;

/// The family a [`KernelModel`] belongs to, with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelKind {
    /// `P(x, y) = cos(2π(x − y))/2 + 1`.
    Cosine,
    /// `P(x, y) = g((x + y) mod 1)` with `g(s) = a0 + 6(1 − a0)s(1 − s)`.
    PolynomialG { a0: f64 },
    /// `P(x, y) = 1 + a sin(2π(y − x))`, `|a| < 1`.
    SineAsym { amplitude: f64 },
    /// Densities at the nodes of an `N`-point grid, row-major.
    Tabulated { values: Array2<f64> },
}

/// A jump kernel: the density `P(x, ·)` of the post-jump state given a jump from `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelModel {
    kind: KernelKind,
    symmetric: bool,
}

impl KernelModel {
    /// The cosine kernel, for which the heat kernel has a closed form.
    ///
    /// ```
    /// let p = ctruelle::KernelModel::cosine();
    /// assert_eq!(p.eval(0.0, 0.0).unwrap(), 1.5);
    /// ```
    pub fn cosine() -> Self {
        Self {
            kind: KernelKind::Cosine,
            symmetric: true,
        }
    }

    /// The symmetric polynomial kernel built from `g(s) = a0 + 6(1 − a0)s(1 − s)`.
    ///
    /// Any finite `a0` is accepted here; kernels whose `g` becomes negative are
    /// rejected by [`validate_kernel`].
    pub fn polynomial_g(a0: f64) -> Result<Self> {
        if !a0.is_finite() {
            return Err(Error::InvalidParameter(format!("a0 = {a0}")));
        }
        Ok(Self {
            kind: KernelKind::PolynomialG { a0 },
            symmetric: true,
        })
    }

    /// The constant kernel `P ≡ 1`.
    pub fn uniform() -> Self {
        Self {
            kind: KernelKind::PolynomialG { a0: 1.0 },
            symmetric: true,
        }
    }

    pub fn sine_asym(amplitude: f64) -> Result<Self> {
        if !(amplitude.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sine amplitude must satisfy |a| < 1, got {amplitude}"
            )));
        }
        Ok(Self {
            kind: KernelKind::SineAsym { amplitude },
            symmetric: amplitude == 0.0,
        })
    }

    /// A kernel given by its values at the nodes of a grid with `values.nrows()` points.
    pub fn tabulated(values: Array2<f64>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "tabulated kernel must be square, got {}x{}",
                n,
                values.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(n));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite kernel entry".into()));
        }
        let symmetric = symmetry_deviation(&values) < 1e-12;
        Ok(Self {
            kind: KernelKind::Tabulated { values },
            symmetric,
        })
    }

    /// A random positive kernel, doubly stochastic on the `n`-point grid.
    ///
    /// Entries start uniform on `[floor, floor + 1)` and are balanced by
    /// `iterations` rounds of alternating row and column scaling (Sinkhorn),
    /// finishing with a row scaling so that rows integrate to one exactly.
    pub fn sinkhorn_random(n: usize, seed: u64, iterations: usize, floor: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(n));
        }
        let h = 1.0 / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Array2::from_shape_fn((n, n), |_| floor + rng.random::<f64>());
        let scale_rows = |m: &mut Array2<f64>| {
            for mut row in m.rows_mut() {
                let s = row.sum() * h;
                row /= s;
            }
        };
        for _ in 0..iterations {
            scale_rows(&mut m);
            for mut col in m.columns_mut() {
                let s = col.sum() * h;
                col /= s;
            }
        }
        scale_rows(&mut m);
        Self::tabulated(m)
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.kind, KernelKind::Tabulated { .. })
    }

    /// Short identifier of the kernel family.
    pub fn name(&self) -> &'static str {
        match self.kind {
            KernelKind::Cosine => "cosine",
            KernelKind::PolynomialG { .. } => "polynomial_g",
            KernelKind::SineAsym { .. } => "sine_asym",
            KernelKind::Tabulated { .. } => "tabulated",
        }
    }

    /// Node count of a tabulated kernel.
    pub fn table_size(&self) -> Option<usize> {
        match &self.kind {
            KernelKind::Tabulated { values } => Some(values.nrows()),
            _ => None,
        }
    }

    /// Evaluates `P(x, y)`. Tabulated kernels only accept node coordinates.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(match &self.kind {
            KernelKind::Cosine => 0.5 * (TAU * (x - y)).cos() + 1.0,
            KernelKind::PolynomialG { a0 } => {
                let mut s = x + y;
                if s >= 1.0 {
                    s -= 1.0;
                }
                a0 + 6.0 * (1.0 - a0) * s * (1.0 - s)
            }
            KernelKind::SineAsym { amplitude } => 1.0 + amplitude * (TAU * (y - x)).sin(),
            KernelKind::Tabulated { values } => {
                let n = values.nrows();
                let table = Grid::new(n)?;
                match (table.node_index(x), table.node_index(y)) {
                    (Some(i), Some(j)) => values[[i, j]],
                    _ => return Err(Error::InterpolationUnsupported { x, y }),
                }
            }
        })
    }

    /// An upper bound for `sup_y P(x, y)`, used as the rejection-sampling envelope.
    pub fn row_bound(&self, x: f64) -> Result<f64> {
        Ok(match &self.kind {
            KernelKind::Cosine => 1.5,
            KernelKind::PolynomialG { a0 } => a0.max(1.5 - 0.5 * a0),
            KernelKind::SineAsym { amplitude } => 1.0 + amplitude.abs(),
            KernelKind::Tabulated { values } => {
                let table = Grid::new(values.nrows())?;
                let i = table
                    .node_index(x)
                    .ok_or(Error::InterpolationUnsupported { x, y: x })?;
                values.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        })
    }

    /// Smallest value of the kernel over the continuum, where known in closed form.
    fn analytic_min(&self) -> Option<f64> {
        match &self.kind {
            KernelKind::Cosine => Some(0.5),
            KernelKind::PolynomialG { a0 } => Some(a0.min(1.5 - 0.5 * a0)),
            KernelKind::SineAsym { amplitude } => Some(1.0 - amplitude.abs()),
            KernelKind::Tabulated { .. } => None,
        }
    }

    /// Raw kernel values at all pairs of grid nodes.
    pub fn matrix(&self, grid: &Grid) -> Result<Array2<f64>> {
        if let KernelKind::Tabulated { values } = &self.kind {
            if values.nrows() != grid.n() {
                return Err(Error::GridMismatch {
                    expected: grid.n(),
                    found: values.nrows(),
                });
            }
            return Ok(values.clone());
        }
        let x = grid.nodes();
        let mut m = Array2::zeros((grid.n(), grid.n()));
        for i in 0..grid.n() {
            for j in 0..grid.n() {
                m[[i, j]] = self.eval(x[i], x[j])?;
            }
        }
        Ok(m)
    }
}

pub(crate) fn symmetry_deviation(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            dev = dev.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    dev
}

/// Nyström discretisation of a kernel: the matrix `P_ij` acting on grid
/// functions through `(Pf)_i = h Σ_j P_ij f_j`.
///
/// Analytic kernels are divided by their quadrature row mass `h Σ_j P(x_i, x_j)`
/// so that the discrete generator `hP − I` conserves probability exactly. For
/// the trigonometric kernels this mass is one up to rounding; for the
/// polynomial kernel it is the constant `1 − (1 − a0)/n²`. Tabulated kernels
/// are used as given.
#[derive(Clone, Debug)]
pub struct Nystrom {
    model: KernelModel,
    grid: Grid,
    p: Array2<f64>,
}

impl Nystrom {
    pub fn new(model: &KernelModel, grid: &Grid) -> Result<Self> {
        let mut p = model.matrix(grid)?;
        if !model.is_tabulated() {
            let h = grid.h();
            for (i, mut row) in p.rows_mut().into_iter().enumerate() {
                let mass = row.sum() * h;
                if !(mass > 0.0) {
                    return Err(Error::NotPositive {
                        what: "kernel row mass",
                        index: i,
                        value: mass,
                    });
                }
                row /= mass;
            }
        }
        Ok(Self {
            model: model.clone(),
            grid: grid.clone(),
            p,
        })
    }

    pub fn model(&self) -> &KernelModel {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// The discrete kernel `P_ij`.
    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    /// The one-step operator matrix `h P`.
    pub fn operator(&self) -> Array2<f64> {
        &self.p * self.h()
    }

    /// `(Pf)_i = h Σ_j P_ij f_j`.
    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        GridFunction::new(self.p.dot(f.values()) * self.h())
    }

    /// `(P*g)_j = h Σ_i g_i P_ij`, the adjoint in `L²(dx)`.
    pub fn apply_adjoint(&self, g: &GridFunction) -> GridFunction {
        GridFunction::new(self.p.t().dot(g.values()) * self.h())
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                let v = self.p[[i, j]];
                if !(v > 0.0) {
                    return Err(Error::NotPositive {
                        what: "kernel",
                        index: i * n + j,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Outcome of [`validate_kernel`].
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub kernel: String,
    pub n: usize,
    pub tol: f64,
    /// `max_x |∫ P(x, y) dy − 1|`: stochasticity of the jump kernel.
    pub row_deviation: f64,
    /// `max_y |∫ P(x, y) dx − 1|`: the first-argument normalisation.
    pub column_deviation: f64,
    pub min_value: f64,
    pub symmetry_deviation: f64,
    pub symmetric: bool,
    pub doubly_stochastic: bool,
    pub pass: bool,
}

/// Checks positivity, normalisation and symmetry of a kernel.
///
/// Analytic kernels are integrated with composite Gauss–Legendre on the grid
/// cells, which is exact up to rounding for all built-in families; tabulated
/// kernels with the trapezoid rule on their own grid. The kernel passes when
/// rows integrate to one within `tol` and no value is negative; the column
/// integrals are reported in `column_deviation` and `doubly_stochastic`.
///
/// ```
/// use ctruelle::{validate_kernel, Grid, KernelModel};
/// let report = validate_kernel(&KernelModel::sine_asym(0.5)?, &Grid::new(64)?, 1e-10)?;
/// assert!(report.pass && !report.symmetric);
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn validate_kernel(model: &KernelModel, grid: &Grid, tol: f64) -> Result<ValidationReport> {
    let values = model.matrix(grid)?;
    let n = grid.n();
    let (row_deviation, column_deviation) = if model.is_tabulated() {
        let h = grid.h();
        let rows = values
            .rows()
            .into_iter()
            .map(|r| (r.sum() * h - 1.0).abs())
            .fold(0.0, f64::max);
        let cols = values
            .columns()
            .into_iter()
            .map(|c| (c.sum() * h - 1.0).abs())
            .fold(0.0, f64::max);
        (rows, cols)
    } else {
        let mut rows = 0.0_f64;
        let mut cols = 0.0_f64;
        for &x in grid.nodes() {
            let r = integrate_cells(n, |y| model.eval(x, y).unwrap_or(f64::NAN));
            let c = integrate_cells(n, |y| model.eval(y, x).unwrap_or(f64::NAN));
            rows = rows.max((r - 1.0).abs());
            cols = cols.max((c - 1.0).abs());
        }
        (rows, cols)
    };
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let min_value = model.analytic_min().map_or(grid_min, |m| m.min(grid_min));
    let symmetry = symmetry_deviation(&values);
    Ok(ValidationReport {
        kernel: model.name().to_string(),
        n,
        tol,
        row_deviation,
        column_deviation,
        min_value,
        symmetry_deviation: symmetry,
        symmetric: symmetry < 1e-12,
        doubly_stochastic: row_deviation < tol && column_deviation < tol,
        pass: row_deviation < tol && min_value >= 0.0,
    })
}

/// Options for the power iterations used by [`invariant_density`] and the
/// tilted stationary density.
#[derive(Clone, Copy, Debug)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

/// Invariant density `θ` with `∫ θ(y) P(y, x) dy = θ(x)` and `∫ θ = 1`.
///
/// Power iteration on the discretised adjoint, started from the uniform density.
///
/// ```
/// use ctruelle::{invariant_density, Grid, KernelModel, Nystrom, PowerOptions};
/// let disc = Nystrom::new(&KernelModel::cosine(), &Grid::new(32)?)?;
/// let theta = invariant_density(&disc, PowerOptions::default())?;
/// assert!(theta.values().iter().all(|t| (t - 1.0).abs() < 1e-12));
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn invariant_density(disc: &Nystrom, opts: PowerOptions) -> Result<GridFunction> {
    disc.require_positive()?;
    let op_t = disc.operator().reversed_axes();
    let perron = perron_iteration(
        |v| op_t.dot(v),
        Array1::ones(disc.n()),
        opts.tol,
        opts.max_iter,
        "invariant density",
    )?;
    let theta = GridFunction::new(perron.vector);
    let mass = theta.integrate(disc.grid());
    Ok(theta.scaled(1.0 / mass))
}

/// Fixed-point residual `sup |∫ θ(y) P(y, ·) dy − θ|` of a candidate density.
pub fn invariance_residual(disc: &Nystrom, theta: &GridFunction) -> f64 {
    disc.apply_adjoint(theta).distance(theta)
}

/// Discrete `k`-fold kernel convolution `P^k`, with `P^{j+1} = h P^j P`.
pub fn kernel_power(disc: &Nystrom, k: usize) -> Result<Array2<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("kernel power needs k >= 1".into()));
    }
    let h = disc.h();
    let mut m = disc.p().clone();
    for _ in 1..k {
        m = m.dot(disc.p()) * h;
    }
    Ok(m)
}
