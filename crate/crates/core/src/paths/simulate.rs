use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::path::CadlagPath;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::gibbs::GibbsModel;
use crate::grid::{Grid, GridFunction};
use crate::kernels::{KernelModel, Nystrom};
use crate::linalg::pairwise_sum;
use crate::thermo::AdmissibleModel;

/// Proposals allowed per jump before rejection sampling gives up.
pub const REJECTION_CAP: usize = 1_000_000;

/// Where a process lives: all of `[0, 1)` or only the nodes of an `n`-point grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSpace {
    Continuum,
    Grid { n: usize },
}

/// A pure jump process: a state-dependent rate and a jump density in `y`.
///
/// On a grid state space the density is with respect to the grid measure,
/// so the jump probabilities from `x` are `h · density(x, y)`.
pub trait JumpDynamics: Sync {
    fn state_space(&self) -> StateSpace;
    fn rate(&self, x: f64) -> Result<f64>;
    fn density(&self, x: f64, y: f64) -> Result<f64>;
    /// Upper bound for `density(x, ·)`.
    fn density_bound(&self, x: f64) -> Result<f64>;
}

/// The a-priori process: rate one, jump density `P(x, ·)`. Analytic kernels
/// move in the continuum, tabulated kernels on their grid.
#[derive(Clone, Copy, Debug)]
pub struct AprioriDynamics<'a> {
    model: &'a KernelModel,
}

impl<'a> AprioriDynamics<'a> {
    pub fn new(model: &'a KernelModel) -> Self {
        Self { model }
    }
}

impl JumpDynamics for AprioriDynamics<'_> {
    fn state_space(&self) -> StateSpace {
        match self.model.table_size() {
            Some(n) => StateSpace::Grid { n },
            None => StateSpace::Continuum,
        }
    }

    fn rate(&self, _x: f64) -> Result<f64> {
        Ok(1.0)
    }

    fn density(&self, x: f64, y: f64) -> Result<f64> {
        self.model.eval(x, y)
    }

    fn density_bound(&self, x: f64) -> Result<f64> {
        self.model.row_bound(x)
    }
}

/// A jump process on the nodes of a grid with rates `rates[i]` and kernel `kernel[i, j]`.
#[derive(Clone, Debug)]
pub struct GridDynamics {
    grid: Grid,
    rates: Array1<f64>,
    kernel: Array2<f64>,
    row_max: Array1<f64>,
}

impl GridDynamics {
    pub fn new(rates: Array1<f64>, kernel: Array2<f64>) -> Result<Self> {
        let n = rates.len();
        if kernel.nrows() != n || kernel.ncols() != n {
            return Err(Error::GridMismatch {
                expected: n,
                found: kernel.nrows(),
            });
        }
        if let Some((index, &value)) = rates.iter().enumerate().find(|(_, r)| !(**r > 0.0)) {
            return Err(Error::NotPositive {
                what: "jump rate",
                index,
                value,
            });
        }
        let row_max = kernel
            .rows()
            .into_iter()
            .map(|r| r.iter().copied().fold(0.0, f64::max))
            .collect();
        Ok(Self {
            grid: Grid::new(n)?,
            rates,
            kernel,
            row_max,
        })
    }

    /// Rate one and the discretised kernel.
    pub fn apriori(disc: &Nystrom) -> Result<Self> {
        Self::new(Array1::ones(disc.n()), disc.p().clone())
    }

    /// Rate `γ_V` and kernel `Q_V`.
    pub fn gibbs(gm: &GibbsModel) -> Result<Self> {
        Self::new(gm.gamma.values().clone(), gm.q_kernel.clone())
    }

    /// Rate `γ̃` and kernel `Q̃`.
    pub fn tilted(am: &AdmissibleModel) -> Result<Self> {
        Self::new(am.gamma_tilde.values().clone(), am.q_tilde.clone())
    }

    /// Rate one with a tabulated kernel of matching size.
    pub fn from_kernel(model: &KernelModel, grid: &Grid) -> Result<Self> {
        Self::new(Array1::ones(grid.n()), model.matrix(grid)?)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn index(&self, x: f64) -> Result<usize> {
        self.grid
            .node_index(x)
            .ok_or(Error::InterpolationUnsupported { x, y: x })
    }
}

impl JumpDynamics for GridDynamics {
    fn state_space(&self) -> StateSpace {
        StateSpace::Grid { n: self.grid.n() }
    }

    fn rate(&self, x: f64) -> Result<f64> {
        Ok(self.rates[self.index(x)?])
    }

    fn density(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.kernel[[self.index(x)?, self.index(y)?]])
    }

    fn density_bound(&self, x: f64) -> Result<f64> {
        Ok(self.row_max[self.index(x)?])
    }
}

/// Law of the initial state.
#[derive(Clone, Debug)]
pub enum InitialLaw {
    Point(f64),
    /// Lebesgue measure on `[0, 1)`, or the uniform law on the nodes of a grid.
    Uniform,
    /// Density given at grid nodes. On the continuum it is read as constant
    /// on each cell `[x_k, x_k + h)`.
    Density(GridFunction),
}

fn propose(space: StateSpace, rng: &mut ChaCha8Rng) -> f64 {
    match space {
        StateSpace::Continuum => rng.random::<f64>(),
        StateSpace::Grid { n } => rng.random_range(0..n) as f64 / n as f64,
    }
}

fn sample_initial(law: &InitialLaw, space: StateSpace, rng: &mut ChaCha8Rng) -> Result<f64> {
    match law {
        InitialLaw::Point(x) => Ok(*x),
        InitialLaw::Uniform => Ok(propose(space, rng)),
        InitialLaw::Density(d) => {
            let n = d.len();
            let total: f64 = d.values().sum();
            if !(total > 0.0) || d.min() < 0.0 {
                return Err(Error::InvalidParameter("initial density must be nonnegative with positive mass".into()));
            }
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut k = n - 1;
            for (i, v) in d.values().iter().enumerate() {
                acc += v;
                if target < acc {
                    k = i;
                    break;
                }
            }
            let node = k as f64 / n as f64;
            Ok(match space {
                StateSpace::Continuum => node + rng.random::<f64>() / n as f64,
                StateSpace::Grid { .. } => node,
            })
        }
    }
}

/// Random stream for path `index` of an ensemble with the given seed.
///
/// ChaCha is counter based, so each path's stream is fixed by `(seed, index)`
/// regardless of how the ensemble is split across threads.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulates one path on `[0, horizon]`.
///
/// Holding times are exponential with the current rate; the next state is
/// drawn from the jump density by rejection against its upper bound.
pub fn simulate(
    dynamics: &dyn JumpDynamics,
    init: &InitialLaw,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CadlagPath> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let space = dynamics.state_space();
    let x0 = sample_initial(init, space, rng)?;
    let mut x = x0;
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut states = Vec::new();
    loop {
        let rate = dynamics.rate(x)?;
        if !(rate > 0.0) {
            return Err(Error::NotPositive {
                what: "jump rate",
                index: 0,
                value: rate,
            });
        }
        let hold: f64 = Exp1.sample(rng);
        t += hold / rate;
        if t > horizon {
            break;
        }
        let bound = dynamics.density_bound(x)?;
        let mut accepted = None;
        for _ in 0..REJECTION_CAP {
            let y = propose(space, rng);
            if rng.random::<f64>() * bound < dynamics.density(x, y)? {
                accepted = Some(y);
                break;
            }
        }
        x = accepted.ok_or(Error::Sampling {
            proposals: REJECTION_CAP,
        })?;
        times.push(t);
        states.push(x);
    }
    CadlagPath::new(x0, times, states, horizon)
}

/// Simulates path `index` of the ensemble with the given seed.
pub fn simulate_indexed(
    dynamics: &dyn JumpDynamics,
    init: &InitialLaw,
    horizon: f64,
    seed: u64,
    index: u64,
) -> Result<CadlagPath> {
    simulate(dynamics, init, horizon, &mut path_rng(seed, index))
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len() as f64;
        let mean = pairwise_sum(samples) / n;
        let sq: Vec<f64> = samples.iter().map(|s| (s - mean) * (s - mean)).collect();
        let var = if samples.len() > 1 { pairwise_sum(&sq) / (n - 1.0) } else { 0.0 };
        Self {
            estimate: mean,
            std_error: (var / n).sqrt(),
            n_paths: samples.len(),
            seed,
        }
    }

    /// `|estimate − target|` in units of the standard error. With a zero
    /// standard error, gaps at rounding level count as agreement.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d <= 64.0 * f64::EPSILON * target.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Evaluates `statistic` on `n_paths` simulated paths in parallel and averages.
pub fn ensemble_estimate(
    dynamics: &dyn JumpDynamics,
    init: &InitialLaw,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    statistic: impl Fn(&CadlagPath) -> Result<f64> + Sync,
) -> Result<McEstimate> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let samples = (0..n_paths)
        .into_par_iter()
        .map(|i| statistic(&simulate_indexed(dynamics, init, horizon, seed, i as u64)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_samples(&samples, seed))
}

/// Monte Carlo estimate of `E_x[exp(∫_0^t V(X_r) dr) f(X_t)]` for the a-priori process.
///
/// The time integral along each piecewise-constant path is summed exactly.
pub fn mc_feynman_kac(
    model: &KernelModel,
    v: &Field,
    f: &Field,
    x: f64,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    if n_paths < 100 {
        return Err(Error::InvalidParameter("at least 100 paths are required".into()));
    }
    let dynamics = AprioriDynamics::new(model);
    ensemble_estimate(&dynamics, &InitialLaw::Point(x), t, n_paths, seed, |path| {
        let weight = path.time_integral(|s| v.eval(s))?.exp();
        Ok(weight * f.eval(path.final_state())?)
    })
}

fn log_ratio(x: f64, y: f64, num: f64, den: f64) -> Result<f64> {
    if !(num > 0.0 && den > 0.0) {
        return Err(Error::LogDomain { x, y });
    }
    Ok((num / den).ln())
}

/// Log Radon–Nikodym derivative on `[0, horizon]` of the path law of `num`
/// with respect to that of `den`, both started from the same initial law:
/// `∫ (rate_den − rate_num)(w_s) ds + Σ_jumps log(rate_num q_num / (rate_den q_den))`.
pub fn path_log_rn(path: &CadlagPath, num: &dyn JumpDynamics, den: &dyn JumpDynamics) -> Result<f64> {
    let mut total = path.time_integral(|s| Ok(den.rate(s)? - num.rate(s)?))?;
    for (a, b) in path.transitions() {
        let top = num.rate(a)? * num.density(a, b)?;
        let bottom = den.rate(a)? * den.density(a, b)?;
        total += log_ratio(a, b, top, bottom)?;
    }
    Ok(total)
}

/// `(1/T)` times the mean over paths started from `θ dx` of
/// `Σ_jumps log(P(X_{s−}, X_s) / P(X_s, X_{s−}))`.
pub fn mc_entropy_production(
    model: &KernelModel,
    theta: &GridFunction,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    let dynamics = AprioriDynamics::new(model);
    let init = InitialLaw::Density(theta.clone());
    ensemble_estimate(&dynamics, &init, horizon, n_paths, seed, |path| {
        let mut total = 0.0;
        for (a, b) in path.transitions() {
            total += log_ratio(a, b, model.eval(a, b)?, model.eval(b, a)?)?;
        }
        Ok(total / horizon)
    })
}
