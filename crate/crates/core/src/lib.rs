//! Thermodynamic formalism for continuous-time Markov jump processes on `[0, 1]`.
//!
//! A jump kernel `P(x, y)` with unit jump rate defines the generator
//! `(Lf)(x) = ∫ [f(y) − f(x)] P(x, y) dy`. This crate discretises such kernels
//! on a uniform periodic grid and provides:
//!
//! * [`kernels`]: kernel families, the Nyström matrix, kernel powers and the
//!   invariant density;
//! * [`semigroup`]: heat kernels `e^{tL}` by series and by matrix exponential,
//!   Feynman–Kac operators `e^{t(L+V)}`, and residuals of their identities;
//! * [`spectral`]: the principal eigentriple of `L + V` and closed forms;
//! * [`gibbs`]: the normalised Gibbs jump process;
//! * [`thermo`]: relative entropy, pressure, entropy production and time reversal;
//! * [`paths`]: path simulation, Monte Carlo estimators and Skorokhod bounds.
//!
//! ```
//! use ctruelle::*;
//! let grid = Grid::new(64)?;
//! let disc = Nystrom::new(&KernelModel::polynomial_g(0.5)?, &grid)?;
//! let v = Field::quadratic(0.5, 0.2).on_grid(&grid)?;
//! let triple = principal_eigenpair(&disc, &v, EigenOptions::default())?;
//! let exact = quadratic_closed_form(0.5, 0.2, 1.0)?.lambda_plus;
//! assert!((triple.lambda - exact).abs() < 1e-4);
//! # Ok::<(), ctruelle::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod gibbs;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod paths;
pub mod quadrature;
pub mod semigroup;
pub mod spectral;
pub mod thermo;

pub use error::{Error, Result};
pub use field::Field;
pub use gibbs::{gibbs_model, GibbsModel};
pub use grid::{Grid, GridFunction};
pub use kernels::{
    invariance_residual, invariant_density, kernel_power, validate_kernel, KernelKind,
    KernelModel, Nystrom, PowerOptions, ValidationReport,
};
pub use paths::{
    candidate_time_changes, expansiveness_check, mc_entropy_production, mc_feynman_kac,
    path_log_rn, simulate, skorokhod_upper, splice, AprioriDynamics, CadlagPath, GridDynamics,
    InitialLaw, JumpDynamics, McEstimate, PastPath, TimeChange,
};
pub use semigroup::{
    composition_residual, feynman_kac_operator, generator_matrix, heat_kernel,
    kolmogorov_residual, q_k_matrix, selfadjoint_residual, GridOperator, SeriesOptions,
};
pub use spectral::{
    eigen_residual, principal_eigenpair, refined_eigenpair, ruelle_apply, quadratic_closed_form,
    EigenOptions, QuadraticEigenSolution, QuadraticProfile, RefinedEigenpair, SpectralTriple,
};
pub use thermo::{
    admissible_model, entropy_production_rate, objective, pressure, relative_entropy,
    reversal_invariance_check, time_reversal_kernel, AdmissibleModel, PressureOptions,
    PressureResult,
};
