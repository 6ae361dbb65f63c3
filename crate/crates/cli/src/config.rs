//! Experiment configuration read from a TOML file.
//!
//! Every section is optional. Missing sections and fields take the defaults
//! below, so an empty file describes the cosine kernel with zero potential on
//! a 64-node grid.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ctruelle::io::{read_grid_function_csv, read_kernel_csv};
use ctruelle::{Field, Grid, KernelModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Raised for configurations that parse but cannot describe an experiment.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Cosine,
    PolynomialG,
    SineAsym,
    Uniform,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// Parameter of the polynomial kernel.
    pub a0: f64,
    /// Amplitude of the asymmetric sine kernel.
    pub amplitude: f64,
    /// CSV table for the tabulated kernel, relative to the config file.
    pub file: Option<PathBuf>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: KernelKind::Cosine,
            a0: 0.5,
            amplitude: 0.5,
            file: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    #[default]
    Zero,
    Constant,
    /// `b + (1 − a0) x (1 − x)` with `a0` taken from the kernel section.
    Quadratic,
    Trig,
    Tabulated,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// Level of the constant potential.
    pub value: f64,
    /// Offset of the quadratic potential.
    pub b: f64,
    /// Constant term of the trigonometric potential.
    pub constant: f64,
    /// Coefficients of `cos 2πkx`, `k = 1, 2, …`.
    pub cos: Vec<f64>,
    /// Coefficients of `sin 2πkx`, `k = 1, 2, …`.
    pub sin: Vec<f64>,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Row-integral and sign checks in `validate`.
    pub kernel: f64,
    /// Relative Collatz–Wielandt bracket width for the eigenpair.
    pub eigen: f64,
    pub eigen_max_iter: usize,
    /// Last-term norm at which the heat-kernel series stops.
    pub series: f64,
    /// Power iterations for invariant and tilted densities.
    pub power: f64,
    /// Gradient norm at which the pressure ascent stops.
    pub pressure_grad: f64,
    /// Identity residuals: oracle gaps, row sums, stationarity.
    pub check: f64,
    /// Allowed gap between the computed eigenvalue and the closed form.
    pub closed_form: f64,
    /// Central-difference residual of the Kolmogorov equations.
    pub kolmogorov: f64,
    /// Allowed gap between the pressure and the eigenvalue.
    pub pressure_gap: f64,
    /// Allowed excess of a random tilt's objective over the eigenvalue.
    pub probe_margin: f64,
    /// Largest accepted Monte Carlo z-score.
    pub mc_z: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kernel: 1e-10,
            eigen: 1e-13,
            eigen_max_iter: 1_000_000,
            series: 1e-12,
            power: 1e-12,
            pressure_grad: 1e-8,
            check: 1e-9,
            closed_form: 1e-6,
            kolmogorov: 1e-5,
            pressure_gap: 1e-4,
            probe_margin: 1e-6,
            mc_z: 4.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// Rate one, jumps drawn from the kernel.
    #[default]
    Apriori,
    /// The normalised Gibbs process of the potential, on the grid.
    Gibbs,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub process: Process,
    /// Path horizon `T`.
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Number of simulated paths written as CSV.
    pub write_paths: usize,
    /// Starting points of the Feynman–Kac estimates.
    pub nodes: Vec<f64>,
    pub fk_paths: usize,
    pub fk_time: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            process: Process::Apriori,
            horizon: 10.0,
            n_paths: 2000,
            seed: 1,
            write_paths: 3,
            nodes: vec![0.0, 0.25, 0.5],
            fk_paths: 20_000,
            fk_time: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Parameter of the polynomial kernel.
    A0,
    /// Offset of the quadratic potential.
    B,
    /// Amplitude of the sine kernel.
    A,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermoConfig {
    /// Random positive tilts compared against the pressure.
    pub probes: usize,
    pub sweep: Option<Sweep>,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        Self {
            probes: 50,
            sweep: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkorokhodConfig {
    /// Number of random `(w1, w2, w2')` triples.
    pub triples: usize,
    /// Splice times `t`.
    pub times: Vec<f64>,
    /// Horizon of the future paths and length of the past path.
    pub horizon: f64,
}

impl Default for SkorokhodConfig {
    fn default() -> Self {
        Self {
            triples: 50,
            times: vec![0.5, 1.0, 2.0, 4.0],
            horizon: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelConfig,
    pub potential: PotentialConfig,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    /// Time points for heat-kernel and semigroup checks.
    pub times: Vec<f64>,
    pub mc: McConfig,
    pub thermo: ThermoConfig,
    pub skorokhod: SkorokhodConfig,
    /// Root of the run directories, relative to the config file.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::default(),
            potential: PotentialConfig::default(),
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            times: vec![0.5, 1.0, 2.0],
            mc: McConfig::default(),
            thermo: ThermoConfig::default(),
            skorokhod: SkorokhodConfig::default(),
            output: None,
        }
    }
}

/// A parsed configuration together with the directory its relative paths refer to.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base })
    }

    pub fn defaults() -> Self {
        Self {
            config: ExperimentConfig::default(),
            base: PathBuf::new(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn referenced_files(&self) -> Vec<PathBuf> {
        let c = &self.config;
        let mut out = Vec::new();
        if c.kernel.kind == KernelKind::Tabulated {
            out.extend(c.kernel.file.iter().map(|p| self.resolve(p)));
        }
        if c.potential.kind == PotentialKind::Tabulated {
            out.extend(c.potential.file.iter().map(|p| self.resolve(p)));
        }
        out
    }

    /// Checks the invariants that do not need any numerics.
    pub fn check(&self) -> Result<()> {
        let c = &self.config;
        if c.kernel.kind == KernelKind::Tabulated && c.kernel.file.is_none() {
            bail!(ConfigError("tabulated kernel needs `file`".into()));
        }
        if c.potential.kind == PotentialKind::Tabulated && c.potential.file.is_none() {
            bail!(ConfigError("tabulated potential needs `file`".into()));
        }
        for path in self.referenced_files() {
            if !path.is_file() {
                bail!(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("referenced file {} does not exist", path.display()),
                ));
            }
        }
        if c.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            bail!(ConfigError("times must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the configuration (without its output location) and of
    /// the contents of every referenced file.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.config.clone();
        canonical.output = None;
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&canonical)?);
        for path in self.referenced_files() {
            hasher.update(fs::read(&path).with_context(|| format!("reading {}", path.display()))?);
        }
        Ok(hex::encode(hasher.finalize()))
    }

    pub fn kernel(&self) -> Result<KernelModel> {
        let k = &self.config.kernel;
        Ok(match k.kind {
            KernelKind::Cosine => KernelModel::cosine(),
            KernelKind::PolynomialG => KernelModel::polynomial_g(k.a0)?,
            KernelKind::SineAsym => KernelModel::sine_asym(k.amplitude)?,
            KernelKind::Uniform => KernelModel::uniform(),
            KernelKind::Tabulated => {
                let file = k.file.as_ref().ok_or_else(|| ConfigError("tabulated kernel needs `file`".into()))?;
                read_kernel_csv(&self.resolve(file))?
            }
        })
    }

    pub fn potential(&self) -> Result<Field> {
        let p = &self.config.potential;
        Ok(match p.kind {
            PotentialKind::Zero => Field::zero(),
            PotentialKind::Constant => Field::Constant(p.value),
            PotentialKind::Quadratic => Field::quadratic(self.config.kernel.a0, p.b),
            PotentialKind::Trig => Field::Trig {
                constant: p.constant,
                cos: p.cos.clone(),
                sin: p.sin.clone(),
            },
            PotentialKind::Tabulated => {
                let file = p.file.as_ref().ok_or_else(|| ConfigError("tabulated potential needs `file`".into()))?;
                Field::Tabulated(read_grid_function_csv(&self.resolve(file))?)
            }
        })
    }

    /// The grid: the table size for tabulated data, otherwise `grid.n`.
    pub fn grid(&self, kernel: &KernelModel, potential: &Field) -> Result<Grid> {
        let mut n = self.config.grid.n;
        if let Some(m) = kernel.table_size() {
            n = m;
        }
        if let Field::Tabulated(g) = potential {
            if kernel.table_size().is_some_and(|m| m != g.len()) {
                bail!(ConfigError(format!(
                    "kernel table has {} nodes but potential table has {}",
                    n,
                    g.len()
                )));
            }
            n = g.len();
        }
        Ok(Grid::new(n)?)
    }

    /// The closed-form pair `(a0, b)` when the configuration is the polynomial
    /// kernel with its quadratic potential.
    pub fn quadratic_pair(&self) -> Option<(f64, f64)> {
        let c = &self.config;
        (c.kernel.kind == KernelKind::PolynomialG && c.potential.kind == PotentialKind::Quadratic)
            .then_some((c.kernel.a0, c.potential.b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn sections_parse() {
        let c: ExperimentConfig = toml::from_str(
            r#"
            times = [1.0]
            [kernel]
            kind = "polynomial_g"
            a0 = 0.25
            [potential]
            kind = "quadratic"
            b = 0.2
            [thermo.sweep]
            parameter = "b"
            values = [0.0, 0.1]
            "#,
        )
        .unwrap();
        assert_eq!(c.kernel.kind, KernelKind::PolynomialG);
        assert_eq!(c.thermo.sweep.unwrap().parameter, SweepParameter::B);
        assert_eq!(c.grid.n, 64);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[kernel]\nkind = \"cosine\"\nalpha = 1").is_err());
        assert!(toml::from_str::<ExperimentConfig>("[kernel]\nkind = \"gauss\"").is_err());
    }

    #[test]
    fn hash_ignores_output_and_tracks_content() {
        let a = Loaded::defaults();
        let mut b = Loaded::defaults();
        b.config.output = Some("elsewhere".into());
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        b.config.mc.seed = 2;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }
}
