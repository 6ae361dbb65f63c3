//! The normalised Gibbs process: the Doob transform of `e^{t(L+V)}` by the
//! principal eigenfunction.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernels::Nystrom;
use crate::linalg::expm;
use crate::semigroup::{feynman_kac_operator, GridOperator};
use crate::spectral::SpectralTriple;

/// Jump rate `γ_V = 1 + λ_V − V`, kernel `Q_V(x, y) = P(x, y) r(y) / (r(x) γ_V(x))`
/// and stationary density `π_V = ℓ_V r_V`.
#[derive(Clone, Debug)]
pub struct GibbsModel {
    pub gamma: GridFunction,
    pub q_kernel: Array2<f64>,
    pub pi: GridFunction,
    pub triple: SpectralTriple,
    h: f64,
}

impl GibbsModel {
    /// Builds the Gibbs model from a normalised eigentriple.
    ///
    /// ```
    /// use ctruelle::*;
    /// let grid = Grid::new(32)?;
    /// let disc = Nystrom::new(&KernelModel::polynomial_g(0.5)?, &grid)?;
    /// let v = Field::quadratic(0.5, 0.2).on_grid(&grid)?;
    /// let triple = principal_eigenpair(&disc, &v, EigenOptions::default())?;
    /// let gm = GibbsModel::new(&disc, &v, &triple)?;
    /// assert!(gm.row_sum_deviation() < 1e-9);
    /// # Ok::<(), ctruelle::Error>(())
    /// ```
    pub fn new(disc: &Nystrom, v: &GridFunction, triple: &SpectralTriple) -> Result<Self> {
        let grid = disc.grid();
        v.check_len(grid)?;
        let gamma = v.map(|vi| 1.0 + triple.lambda - vi);
        if let Some((index, &g)) = gamma.values().iter().enumerate().find(|(_, g)| !(**g > 0.0)) {
            return Err(Error::RatePositivity { index, gamma: g });
        }
        let r = triple.right.values();
        let n = grid.n();
        let q = Array2::from_shape_fn((n, n), |(i, j)| disc.p()[[i, j]] * r[j] / (r[i] * gamma.get(i)));
        let pi = triple.left.zip_map(&triple.right, |l, r| l * r);
        Ok(Self {
            gamma,
            q_kernel: q,
            pi,
            triple: triple.clone(),
            h: grid.h(),
        })
    }

    pub fn n(&self) -> usize {
        self.gamma.len()
    }

    /// `max_x |∫ Q_V(x, y) dy − 1|`.
    pub fn row_sum_deviation(&self) -> f64 {
        self.q_kernel
            .rows()
            .into_iter()
            .map(|row| (row.sum() * self.h - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `(𝓛_V f)(x) = γ_V(x) ∫ [f(y) − f(x)] Q_V(x, y) dy`.
    pub fn generator_apply(&self, f: &GridFunction) -> GridFunction {
        let n = self.n();
        GridFunction::from_vec(
            (0..n)
                .map(|i| {
                    let fi = f.get(i);
                    let s: f64 = (0..n).map(|j| (f.get(j) - fi) * self.q_kernel[[i, j]]).sum();
                    self.gamma.get(i) * s * self.h
                })
                .collect(),
        )
    }

    /// `(𝓛_V* g)(x) = ∫ γ_V(y) g(y) Q_V(y, x) dy − γ_V(x) g(x)`.
    pub fn dual_apply(&self, g: &GridFunction) -> GridFunction {
        let weighted = g.zip_map(&self.gamma, |a, b| a * b);
        let flow = self.q_kernel.t().dot(weighted.values()) * self.h;
        GridFunction::new(flow - weighted.values())
    }

    /// Generator as an operator matrix, `γ_i h Q_ij − γ_i δ_ij`.
    pub fn generator_matrix(&self) -> Array2<f64> {
        let n = self.n();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            let g = self.gamma.get(i);
            for j in 0..n {
                m[[i, j]] = g * self.q_kernel[[i, j]] * self.h;
            }
            m[[i, i]] -= g;
        }
        m
    }

    /// `𝓟_t^V f = e^{t(L+V)}(r f) / (e^{λt} r)`, split into a kernel and the
    /// atom `e^{−t γ_V}`.
    pub fn semigroup(&self, disc: &Nystrom, v: &GridFunction, t: f64) -> Result<GridOperator> {
        let fk = feynman_kac_operator(disc, Some(v), t)?;
        let r = self.triple.right.values();
        let damp = (-self.triple.lambda * t).exp();
        let n = self.n();
        let k = Array2::from_shape_fn((n, n), |(i, j)| damp * fk.integral_part()[[i, j]] * r[j] / r[i]);
        let atomic = self.gamma.map(|g| (-t * g).exp());
        GridOperator::new(k, atomic, disc.grid())
    }

    /// `e^{t 𝓛_V}` computed by exponentiating the Gibbs generator directly.
    pub fn semigroup_oracle(&self, t: f64) -> Result<GridOperator> {
        let e = expm(&(self.generator_matrix() * t))?;
        let atomic = self.gamma.map(|g| (-t * g).exp());
        Ok(GridOperator::from_matrix(e, atomic, self.h))
    }

    /// `max_x |∫ γ π Q(y, x) dy − γ(x) π(x)|`.
    pub fn balance_residual(&self) -> f64 {
        self.dual_apply(&self.pi).sup_norm()
    }
}

/// Free-function form of [`GibbsModel::new`].
pub fn gibbs_model(disc: &Nystrom, v: &GridFunction, triple: &SpectralTriple) -> Result<GibbsModel> {
    GibbsModel::new(disc, v, triple)
}
