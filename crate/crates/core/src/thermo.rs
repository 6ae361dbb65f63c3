//! Relative entropy and pressure of tilted processes, entropy production and
//! time reversal.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernels::{KernelModel, Nystrom, PowerOptions};
use crate::linalg::{perron_iteration, solve};

/// The process tilted by a positive function `φ`: rate
/// `γ̃(x) = (1/φ(x)) ∫ φ(y) P(x, y) dy`, kernel `Q̃(x, y) = φ(y) P(x, y) / (φ(x) γ̃(x))`,
/// and its stationary probability density `μ̃ = φ ℓ̃ / ∫ φ ℓ̃`.
#[derive(Clone, Debug)]
pub struct AdmissibleModel {
    pub phi: GridFunction,
    pub gamma_tilde: GridFunction,
    pub q_tilde: Array2<f64>,
    /// Positive solution of `∫ ℓ̃(y) P(y, x) dy = γ̃(x) ℓ̃(x)`, unit maximum.
    pub ell_tilde: GridFunction,
    pub mu_tilde: GridFunction,
    h: f64,
}

impl AdmissibleModel {
    /// ```
    /// use ctruelle::*;
    /// let grid = Grid::new(32)?;
    /// let disc = Nystrom::new(&KernelModel::cosine(), &grid)?;
    /// let am = AdmissibleModel::new(&disc, &GridFunction::constant(&grid, 1.0), PowerOptions::default())?;
    /// assert!(relative_entropy(&am).abs() < 1e-14);
    /// # Ok::<(), ctruelle::Error>(())
    /// ```
    pub fn new(disc: &Nystrom, phi: &GridFunction, opts: PowerOptions) -> Result<Self> {
        let grid = disc.grid();
        phi.check_len(grid)?;
        if let Some((index, &value)) = phi.values().iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
            return Err(Error::NotPositive {
                what: "tilting function",
                index,
                value,
            });
        }
        disc.require_positive()?;
        let n = grid.n();
        let h = grid.h();
        let p = disc.p();
        let f = phi.values();
        let gamma: Array1<f64> = (0..n)
            .map(|i| (0..n).map(|j| p[[i, j]] * f[j]).sum::<f64>() * h / f[i])
            .collect();
        let q = Array2::from_shape_fn((n, n), |(i, j)| p[[i, j]] * f[j] / (f[i] * gamma[i]));
        let pt = disc.operator().reversed_axes();
        let ell = perron_iteration(
            |l| pt.dot(l) / &gamma,
            Array1::ones(n),
            opts.tol,
            opts.max_iter,
            "tilted stationary density",
        )?;
        let mu = f * &ell.vector;
        let mass = mu.sum() * h;
        Ok(Self {
            phi: phi.clone(),
            gamma_tilde: GridFunction::new(gamma),
            q_tilde: q,
            ell_tilde: GridFunction::new(ell.vector),
            mu_tilde: GridFunction::new(mu / mass),
            h,
        })
    }

    /// `max_x |∫ Q̃(x, y) dy − 1|`.
    pub fn row_sum_deviation(&self) -> f64 {
        self.q_tilde
            .rows()
            .into_iter()
            .map(|r| (r.sum() * self.h - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `(𝓛̃* g)(x) = ∫ γ̃(y) g(y) Q̃(y, x) dy − γ̃(x) g(x)`.
    pub fn dual_apply(&self, g: &GridFunction) -> GridFunction {
        let weighted = g.zip_map(&self.gamma_tilde, |a, b| a * b);
        let flow = self.q_tilde.t().dot(weighted.values()) * self.h;
        GridFunction::new(flow - weighted.values())
    }
}

/// Free-function form of [`AdmissibleModel::new`].
pub fn admissible_model(disc: &Nystrom, phi: &GridFunction, opts: PowerOptions) -> Result<AdmissibleModel> {
    AdmissibleModel::new(disc, phi, opts)
}

/// `H = ∫ [γ̃(x) − 1] dμ̃(x)`, reported exactly as this signed integral.
pub fn relative_entropy(am: &AdmissibleModel) -> f64 {
    (am.gamma_tilde.values() - 1.0).dot(am.mu_tilde.values()) * am.h
}

/// The pressure functional `φ ↦ H + ∫ V dμ̃`.
pub fn objective(disc: &Nystrom, v: &GridFunction, phi: &GridFunction, opts: PowerOptions) -> Result<f64> {
    v.check_len(disc.grid())?;
    let am = AdmissibleModel::new(disc, phi, opts)?;
    Ok(relative_entropy(&am) + v.values().dot(am.mu_tilde.values()) * disc.h())
}

/// Objective and its gradient with respect to `u = log φ` at each node.
///
/// With tilted rates `R_ij = h P_ij φ_j / φ_i`, stationary probabilities
/// `π = h μ̃` and running cost `c = γ̃ − 1 + V`, the derivative follows from
/// perturbing the rates and solving the Poisson equation
/// `(G − 1 πᵀ) w = J 1 − c` for the tilted generator `G = R − diag(γ̃)`.
pub fn objective_gradient(
    disc: &Nystrom,
    v: &GridFunction,
    phi: &GridFunction,
    opts: PowerOptions,
) -> Result<(f64, Array1<f64>)> {
    let am = AdmissibleModel::new(disc, phi, opts)?;
    let n = disc.n();
    let h = disc.h();
    let f = phi.values();
    let p = disc.p();
    let gamma = am.gamma_tilde.values();
    let pi = am.mu_tilde.values() * h;
    let rates = Array2::from_shape_fn((n, n), |(i, j)| h * p[[i, j]] * f[j] / f[i]);
    let cost = gamma - 1.0 + v.values();
    let value = pi.dot(&cost);
    let mut system = rates.clone();
    for i in 0..n {
        system[[i, i]] -= gamma[i];
        for j in 0..n {
            system[[i, j]] -= pi[j];
        }
    }
    let w = solve(&system, &(Array1::from_elem(n, value) - &cost))?;
    let mut grad = Array1::zeros(n);
    for k in 0..n {
        let mut inflow = 0.0;
        let mut inflow_work = 0.0;
        for i in 0..n {
            inflow += pi[i] * rates[[i, k]];
            inflow_work += pi[i] * rates[[i, k]] * (w[k] - w[i]);
        }
        let outflow_work: f64 = (0..n).map(|j| rates[[k, j]] * (w[j] - w[k])).sum();
        grad[k] = inflow - pi[k] * gamma[k] + inflow_work - pi[k] * outflow_work;
    }
    Ok((value, grad))
}

/// Settings for [`pressure`].
#[derive(Clone, Copy, Debug)]
pub struct PressureOptions {
    /// Stop when the function-space gradient has max-norm below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub power: PowerOptions,
}

impl Default for PressureOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iter: 10_000,
            power: PowerOptions::default(),
        }
    }
}

/// Outcome of [`pressure`]. When `converged` is false, `value` and `argmax`
/// hold the best point found.
#[derive(Clone, Debug, Serialize)]
pub struct PressureResult {
    pub value: f64,
    pub argmax: GridFunction,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

/// Maximises `H + ∫ V dμ̃` over positive `φ` by gradient ascent in `log φ`,
/// starting from `φ ≡ 1`, with Armijo backtracking.
///
/// ```
/// use ctruelle::*;
/// let grid = Grid::new(16)?;
/// let disc = Nystrom::new(&KernelModel::cosine(), &grid)?;
/// let v = GridFunction::constant(&grid, 0.3);
/// let p = pressure(&disc, &v, PressureOptions::default())?;
/// assert!(p.converged && (p.value - 0.3).abs() < 1e-12);
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn pressure(disc: &Nystrom, v: &GridFunction, opts: PressureOptions) -> Result<PressureResult> {
    let h = disc.h();
    let mut u = Array1::<f64>::zeros(disc.n());
    let mut step = 1.0_f64;
    let mut iterations = 0;
    loop {
        let phi = GridFunction::new(u.mapv(f64::exp));
        let (value, grad) = objective_gradient(disc, v, &phi, opts.power)?;
        let direction = &grad / h;
        let gradient_norm = direction.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let done = |converged| PressureResult {
            value,
            argmax: phi.clone(),
            iterations,
            gradient_norm,
            converged,
        };
        if gradient_norm < opts.grad_tol {
            return Ok(done(true));
        }
        if iterations >= opts.max_iter {
            return Ok(done(false));
        }
        let slope = grad.dot(&direction);
        step = (2.0 * step).min(1e3);
        loop {
            let trial = GridFunction::new((&u + &(&direction * step)).mapv(f64::exp));
            let candidate = objective(disc, v, &trial, opts.power)?;
            if candidate >= value + 1e-4 * step * slope {
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return Ok(done(false));
            }
        }
        u = &u + &(&direction * step);
        iterations += 1;
    }
}

/// A random positive function `exp(Σ_{k=1,2} α_k cos 2πkx + β_k sin 2πkx + c x(1 − x))`
/// with standard normal coefficients.
pub fn random_smooth_positive(grid: &Grid, rng: &mut ChaCha8Rng) -> GridFunction {
    let c: Vec<f64> = (0..5).map(|_| StandardNormal.sample(rng)).collect();
    GridFunction::from_fn(grid, |x| {
        (c[0] * (TAU * x).cos()
            + c[1] * (TAU * x).sin()
            + c[2] * (2.0 * TAU * x).cos()
            + c[3] * (2.0 * TAU * x).sin()
            + c[4] * x * (1.0 - x))
            .exp()
    })
}

/// Objective values at `count` random smooth positive tilts, evaluated in
/// parallel. Probe `k` draws from the stream `k` of a generator seeded with `seed`.
pub fn pressure_probes(
    disc: &Nystrom,
    v: &GridFunction,
    count: usize,
    seed: u64,
    opts: PowerOptions,
) -> Result<Vec<f64>> {
    (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let phi = random_smooth_positive(disc.grid(), &mut rng);
            objective(disc, v, &phi, opts)
        })
        .collect()
}

fn check_ratio(disc: &Nystrom, i: usize, j: usize) -> Result<f64> {
    let p = disc.p();
    let (a, b) = (p[[i, j]], p[[j, i]]);
    if !(a > 0.0 && b > 0.0) {
        let grid = disc.grid();
        return Err(Error::LogDomain {
            x: grid.node(i),
            y: grid.node(j),
        });
    }
    Ok((a / b).ln())
}

/// `ep = ∫∫ log(P(x, y) / P(y, x)) P(x, y) dy θ(x) dx`.
///
/// ```
/// use ctruelle::*;
/// let grid = Grid::new(64)?;
/// let sym = Nystrom::new(&KernelModel::cosine(), &grid)?;
/// let theta = GridFunction::constant(&grid, 1.0);
/// assert!(entropy_production_rate(&sym, &theta)?.abs() < 1e-12);
/// let asym = Nystrom::new(&KernelModel::sine_asym(0.5)?, &grid)?;
/// assert!(entropy_production_rate(&asym, &theta)? > 0.0);
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn entropy_production_rate(disc: &Nystrom, theta: &GridFunction) -> Result<f64> {
    theta.check_len(disc.grid())?;
    let n = disc.n();
    let h = disc.h();
    let p = disc.p();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += p[[i, j]] * check_ratio(disc, i, j)?;
        }
        total += theta.get(i) * row;
    }
    Ok(total * h * h)
}

/// The reversed kernel `P*(x, y) = θ(y) P(y, x) / θ(x)`, tabulated on the grid.
pub fn time_reversal_kernel(disc: &Nystrom, theta: &GridFunction) -> Result<KernelModel> {
    theta.check_len(disc.grid())?;
    if let Some((index, &value)) = theta.values().iter().enumerate().find(|(_, t)| !(**t > 0.0)) {
        return Err(Error::NotPositive {
            what: "invariant density",
            index,
            value,
        });
    }
    let n = disc.n();
    let p = disc.p();
    let t = theta.values();
    KernelModel::tabulated(Array2::from_shape_fn((n, n), |(i, j)| t[j] * p[[j, i]] / t[i]))
}

/// Entropy production of the kernel and of its time reversal, `(ep, ep*)`.
pub fn reversal_invariance_check(disc: &Nystrom, theta: &GridFunction) -> Result<(f64, f64)> {
    let ep = entropy_production_rate(disc, theta)?;
    let reversed = Nystrom::new(&time_reversal_kernel(disc, theta)?, disc.grid())?;
    let ep_star = entropy_production_rate(&reversed, theta)?;
    Ok((ep, ep_star))
}
