//! Càdlàg trajectories: simulation, pathwise estimators, splicing and
//! Skorokhod distance bounds.

mod path;
mod simulate;
mod skorokhod;

pub use path::{splice, CadlagPath, PastPath, TimeChange};
pub use simulate::{
    ensemble_estimate, mc_entropy_production, mc_feynman_kac, path_log_rn, path_rng, simulate,
    simulate_indexed, AprioriDynamics, GridDynamics, InitialLaw, JumpDynamics, McEstimate,
    StateSpace, REJECTION_CAP,
};
pub use skorokhod::{
    candidate_time_changes, expansiveness_check, skorokhod_integral, skorokhod_upper,
    state_metric, ExpansivenessReport, SkorokhodBound,
};
