//! Comparison algorithms: uniform elimination for Pareto set identification
//! and best-arm identification baselines for one objective.

mod bai;
mod elimination;

pub use bai::{bai_run, bai_run_with_bonus, ArmBonus, BaiAlgorithm, HoeffdingBonus};
pub use elimination::{psi_unif_elim, psi_unif_elim_with_observer, EliminationState};
