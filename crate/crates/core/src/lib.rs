//! Fixed-confidence Pareto set identification in multi-objective bandits.
//!
//! The crate provides the Pareto geometry of a mean matrix ([`pareto`]),
//! simulated bandit instances ([`model`]), confidence bonuses
//! ([`confidence`]), the Adaptive Pareto Exploration sampling rule with its
//! stopping rules ([`ape`]), comparison algorithms ([`baselines`]) and a seeded
//! replication harness ([`harness`]).

// `!(x > 0.0)` style checks are how parameters reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ape;
pub mod baselines;
pub mod confidence;
pub mod error;
pub mod harness;
pub mod model;
pub mod pareto;

pub use ape::{RunResult, StoppingRule, Trigger, DEFAULT_ROUND_CAP};
pub use confidence::{ConfidenceScheme, EmpiricalState};
pub use error::{PsiError, Result};
pub use model::{BanditInstance, Family, RngStream};
pub use pareto::{ArmSet, MeanMatrix};
