//! Heat kernels `K_t` of `e^{tL}`, Feynman–Kac kernels `K_t^V` of `e^{t(L+V)}`,
//! and residuals of the identities they satisfy.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernels::{kernel_power, Nystrom};
use crate::linalg::{expm, max_abs};

/// An operator of the form `(Af)(x) = ∫ K(x, y) f(y) dy + a(x) f(x)`: an
/// integral part plus a diagonal "no jump" atom.
#[derive(Clone, Debug, PartialEq)]
pub struct GridOperator {
    integral_part: Array2<f64>,
    atomic_diag: GridFunction,
    h: f64,
}

impl GridOperator {
    pub fn new(integral_part: Array2<f64>, atomic_diag: GridFunction, grid: &Grid) -> Result<Self> {
        atomic_diag.check_len(grid)?;
        if integral_part.nrows() != grid.n() || integral_part.ncols() != grid.n() {
            return Err(Error::GridMismatch {
                expected: grid.n(),
                found: integral_part.nrows(),
            });
        }
        Ok(Self {
            integral_part,
            atomic_diag,
            h: grid.h(),
        })
    }

    pub fn identity(grid: &Grid) -> Self {
        Self {
            integral_part: Array2::zeros((grid.n(), grid.n())),
            atomic_diag: GridFunction::constant(grid, 1.0),
            h: grid.h(),
        }
    }

    /// Splits an operator matrix `M = h K + diag(a)` given the atom `a`.
    pub(crate) fn from_matrix(m: Array2<f64>, atomic: GridFunction, h: f64) -> Self {
        let mut k = m;
        for (i, a) in atomic.values().iter().enumerate() {
            k[[i, i]] -= a;
        }
        Self {
            integral_part: k / h,
            atomic_diag: atomic,
            h,
        }
    }

    pub fn n(&self) -> usize {
        self.atomic_diag.len()
    }

    pub fn integral_part(&self) -> &Array2<f64> {
        &self.integral_part
    }

    pub fn atomic_diag(&self) -> &GridFunction {
        &self.atomic_diag
    }

    /// `integral_part · (weights ∘ f) + atomic_diag ∘ f`.
    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        let integral = self.integral_part.dot(f.values()) * self.h;
        GridFunction::new(integral + self.atomic_diag.values() * f.values())
    }

    /// Adjoint in `L²(dx)`: `(A*g)(y) = ∫ K(x, y) g(x) dx + a(y) g(y)`.
    pub fn adjoint_apply(&self, g: &GridFunction) -> GridFunction {
        let integral = self.integral_part.t().dot(g.values()) * self.h;
        GridFunction::new(integral + self.atomic_diag.values() * g.values())
    }

    /// The full operator matrix `h K + diag(a)`.
    pub fn matrix(&self) -> Array2<f64> {
        let mut m = &self.integral_part * self.h;
        for (i, a) in self.atomic_diag.values().iter().enumerate() {
            m[[i, i]] += a;
        }
        m
    }

    /// The composition `self ∘ other`, again split into integral part and atom.
    pub fn compose(&self, other: &GridOperator) -> GridOperator {
        let a = &self.integral_part;
        let b = &other.integral_part;
        let da = self.atomic_diag.values();
        let db = other.atomic_diag.values();
        let mut k = a.dot(b) * self.h;
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                k[[i, j]] += a[[i, j]] * db[j] + da[i] * b[[i, j]];
            }
        }
        GridOperator {
            integral_part: k,
            atomic_diag: GridFunction::new(da * db),
            h: self.h,
        }
    }

    /// Largest deviation between two operators, over both channels.
    pub fn distance(&self, other: &GridOperator) -> f64 {
        max_abs(&(&self.integral_part - &other.integral_part))
            .max(self.atomic_diag.distance(&other.atomic_diag))
    }
}

/// Discrete generator `h P − I + diag(V)` as an operator matrix.
pub fn generator_matrix(disc: &Nystrom, v: Option<&GridFunction>) -> Result<Array2<f64>> {
    let mut a = disc.operator();
    for i in 0..disc.n() {
        a[[i, i]] -= 1.0;
    }
    if let Some(v) = v {
        v.check_len(disc.grid())?;
        for i in 0..disc.n() {
            a[[i, i]] += v.get(i);
        }
    }
    Ok(a)
}

/// `Q_k = Σ_{j=1}^{k} (−1)^{k−j} C(k, j) P^j`, summed literally.
pub fn q_k_matrix(disc: &Nystrom, k: usize) -> Result<Array2<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("Q_k needs k >= 1".into()));
    }
    let mut q = Array2::zeros((disc.n(), disc.n()));
    let mut binom = 1.0_f64;
    for j in 1..=k {
        binom = binom * (k - j + 1) as f64 / j as f64;
        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
        q = q + kernel_power(disc, j)? * (sign * binom);
    }
    Ok(q)
}

/// Truncation control for the heat-kernel series.
#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    /// Stop once a term's max-norm falls below this.
    pub tol: f64,
    pub k_max: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            k_max: 200,
        }
    }
}

/// Times above this are handled by halving and composing.
const DIRECT_SERIES_MAX_T: f64 = 10.0;

/// Heat kernel `K_t = Σ_{k≥1} t^k/k! Q_k` with atom `e^{−t}`.
///
/// The `Q_k` are generated by `Q_{k+1} = Q_k P − Q_k + (−1)^k P` (discrete
/// convolution), which is the binomial sum reorganised. For `t > 10` the
/// operator is built from `K_{t/2}` by composition.
///
/// ```
/// use ctruelle::{heat_kernel, Grid, GridFunction, KernelModel, Nystrom, SeriesOptions};
/// let grid = Grid::new(16)?;
/// let disc = Nystrom::new(&KernelModel::cosine(), &grid)?;
/// let k = heat_kernel(&disc, 1.0, SeriesOptions::default())?;
/// let one = k.apply(&GridFunction::constant(&grid, 1.0));
/// assert!(one.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn heat_kernel(disc: &Nystrom, t: f64, opts: SeriesOptions) -> Result<GridOperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let grid = disc.grid();
    if t > DIRECT_SERIES_MAX_T {
        let half = heat_kernel(disc, 0.5 * t, opts)?;
        return Ok(half.compose(&half));
    }
    let n = disc.n();
    let h = disc.h();
    let p = disc.p();
    let mut sum = Array2::<f64>::zeros((n, n));
    if t > 0.0 {
        let mut q = p.clone();
        let mut coeff = 1.0_f64;
        let mut k = 1usize;
        loop {
            coeff *= t / k as f64;
            let term_norm = coeff * max_abs(&q);
            sum.scaled_add(coeff, &q);
            if term_norm < opts.tol && k as f64 >= t {
                break;
            }
            if k >= opts.k_max {
                return Err(Error::Truncation {
                    achieved: term_norm,
                    k_max: opts.k_max,
                });
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut next = q.dot(p) * h - &q;
            next.scaled_add(sign, p);
            q = next;
            k += 1;
        }
    }
    GridOperator::new(sum, GridFunction::constant(grid, (-t).exp()), grid)
}

/// `e^{t(L+V)}` from the matrix exponential of the discretised generator.
///
/// The atom `e^{t(V−1)}` is split off the diagonal; the rest is the kernel
/// `K_t^V`. With `V = None` this is the independent oracle for [`heat_kernel`].
pub fn feynman_kac_operator(disc: &Nystrom, v: Option<&GridFunction>, t: f64) -> Result<GridOperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let a = generator_matrix(disc, v)? * t;
    let e = expm(&a)?;
    let atomic: Array1<f64> = match v {
        Some(v) => v.values().mapv(|vi| (t * (vi - 1.0)).exp()),
        None => Array1::from_elem(disc.n(), (-t).exp()),
    };
    Ok(GridOperator::from_matrix(e, GridFunction::new(atomic), disc.h()))
}

/// Max-norm residual of `K_{s+t} = e^{−t}K_s + e^{−s}K_t + ∫ K_t(·, z) K_s(z, ·) dz`.
pub fn composition_residual(disc: &Nystrom, s: f64, t: f64, opts: SeriesOptions) -> Result<f64> {
    let ks = heat_kernel(disc, s, opts)?;
    let kt = heat_kernel(disc, t, opts)?;
    let kst = heat_kernel(disc, s + t, opts)?;
    let rhs = ks.integral_part() * (-t).exp()
        + kt.integral_part() * (-s).exp()
        + kt.integral_part().dot(ks.integral_part()) * disc.h();
    Ok(max_abs(&(kst.integral_part() - &rhs)))
}

/// Residuals of the forward and backward Kolmogorov equations
/// `∂_t K_t = L K_t + e^{−t} P` (acting on `x`) and `∂_t K_t = L* K_t + e^{−t} P`
/// (acting on `y`), with a central difference of step `h` in time.
pub fn kolmogorov_residual(
    disc: &Nystrom,
    t: f64,
    h: f64,
    opts: SeriesOptions,
) -> Result<(f64, f64)> {
    if !(t > h && h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t > h > 0, got t = {t}, h = {h}"
        )));
    }
    let plus = heat_kernel(disc, t + h, opts)?;
    let minus = heat_kernel(disc, t - h, opts)?;
    let k = heat_kernel(disc, t, opts)?;
    let k = k.integral_part();
    let dt = (plus.integral_part() - minus.integral_part()) / (2.0 * h);
    let w = disc.h();
    let source = disc.p() * (-t).exp();
    let forward = disc.p().dot(k) * w - k + &source;
    let backward = k.dot(disc.p()) * w - k + &source;
    Ok((max_abs(&(&dt - &forward)), max_abs(&(&dt - &backward))))
}

/// Low-order trigonometric probes `1, cos 2πx, sin 2πx, cos 4πx, sin 4πx`.
pub fn trig_probes(grid: &Grid) -> Vec<GridFunction> {
    vec![
        GridFunction::constant(grid, 1.0),
        GridFunction::from_fn(grid, |x| (TAU * x).cos()),
        GridFunction::from_fn(grid, |x| (TAU * x).sin()),
        GridFunction::from_fn(grid, |x| (2.0 * TAU * x).cos()),
        GridFunction::from_fn(grid, |x| (2.0 * TAU * x).sin()),
    ]
}

/// `max |⟨P_t^V f, g⟩_μ − ⟨f, P_t^V g⟩_μ|` over pairs of [`trig_probes`],
/// with `dμ = θ dx`.
pub fn selfadjoint_residual(
    disc: &Nystrom,
    v: Option<&GridFunction>,
    t: f64,
    theta: &GridFunction,
) -> Result<f64> {
    theta.check_len(disc.grid())?;
    let op = feynman_kac_operator(disc, v, t)?;
    let grid = disc.grid();
    let probes = trig_probes(grid);
    let images: Vec<GridFunction> = probes.iter().map(|f| op.apply(f)).collect();
    let inner = |a: &GridFunction, b: &GridFunction| {
        (a.values() * b.values() * theta.values()).sum() * grid.h()
    };
    let mut worst = 0.0_f64;
    for (f, pf) in probes.iter().zip(images.iter()) {
        for (g, pg) in probes.iter().zip(images.iter()) {
            worst = worst.max((inner(pf, g) - inner(f, pg)).abs());
        }
    }
    Ok(worst)
}
