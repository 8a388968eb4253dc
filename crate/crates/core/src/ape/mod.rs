//! Adaptive Pareto Exploration: the sampling rule, the three stopping rules and
//! the single-run engine.
//!
//! Each round recomputes the empirical Pareto set `S(t)` and the set `OPT(t)` of
//! arms confidently `eps1`-optimal, checks the stopping rule, and only then
//! selects and pulls an arm. Checking first guarantees that selection is never
//! asked to choose among an all-OPT arm set.

mod snapshot;

pub use snapshot::Snapshot;

use serde::{Deserialize, Serialize};

use crate::confidence::{ConfidenceScheme, EmpiricalState};
use crate::error::{invalid, PsiError, Result};
use crate::model::{BanditInstance, RngStream};
use crate::pareto::{verify_recommendation, ArmSet};

pub const DEFAULT_ROUND_CAP: u64 = 100_000_000;

/// Identification objective together with its stopping condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Return a superset of the Pareto set inside the `eps1`-Pareto set.
    EpsPsi { eps1: f64 },
    /// Return an `eps2`-cover of the Pareto set inside the `eps1`-Pareto set.
    EpsCover { eps1: f64, eps2: f64 },
    /// Return `k` arms of the `eps1`-Pareto set, or the whole Pareto set if smaller.
    KRelaxed { eps1: f64, k: usize },
}

impl StoppingRule {
    pub fn eps1(&self) -> f64 {
        match *self {
            StoppingRule::EpsPsi { eps1 }
            | StoppingRule::EpsCover { eps1, .. }
            | StoppingRule::KRelaxed { eps1, .. } => eps1,
        }
    }

    pub fn validate(&self, arms: usize) -> Result<()> {
        let eps1 = self.eps1();
        if !(eps1 >= 0.0 && eps1.is_finite()) {
            return Err(invalid(format!("eps1 must be finite and >= 0, got {eps1}")));
        }
        match *self {
            StoppingRule::EpsCover { eps2, .. } if !(eps2 >= 0.0 && eps2.is_finite()) => {
                Err(invalid(format!("eps2 must be finite and >= 0, got {eps2}")))
            }
            StoppingRule::KRelaxed { k, .. } if k == 0 || k > arms => {
                Err(invalid(format!("k must be in [1, {arms}], got {k}")))
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable name such as `k-relaxed(eps1=0,k=3)`.
    pub fn label(&self) -> String {
        match *self {
            StoppingRule::EpsPsi { eps1 } => format!("eps-psi(eps1={eps1})"),
            StoppingRule::EpsCover { eps1, eps2 } => format!("eps-cover(eps1={eps1},eps2={eps2})"),
            StoppingRule::KRelaxed { eps1, k } => format!("k-relaxed(eps1={eps1},k={k})"),
        }
    }
}

/// Condition that ended a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    ZTest,
    KCount,
    RoundCap,
}

impl std::fmt::Display for Trigger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trigger::ZTest => "z-test",
            Trigger::KCount => "k-count",
            Trigger::RoundCap => "round-cap",
        })
    }
}

/// Arms chosen by the sampling rule in one round; `a` is the one pulled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub b: usize,
    pub c: usize,
    pub a: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    /// Objective the recommendation is judged against.
    pub rule: StoppingRule,
    pub scheme: ConfidenceScheme,
    pub seed: u64,
    pub tau: u64,
    pub trigger: Trigger,
    pub recommendation: ArmSet,
    pub pulls: Vec<u64>,
}

impl RunResult {
    /// True when the run stopped on its own and its recommendation is correct
    /// for `rule` under the instance's effective means.
    pub fn is_correct(&self, instance: &BanditInstance) -> Result<bool> {
        if self.trigger == Trigger::RoundCap {
            return Ok(false);
        }
        verify_recommendation(
            &instance.effective_means(),
            &self.recommendation,
            &self.rule,
        )
    }
}

/// What an observer sees at the end of each round's decision.
pub struct RoundView<'a> {
    pub state: &'a EmpiricalState,
    pub snapshot: &'a Snapshot,
    /// `None` on the round the run stops.
    pub selection: Option<Selection>,
}

pub fn empirical_pareto(state: &EmpiricalState, scheme: &ConfidenceScheme) -> Result<ArmSet> {
    let snap = Snapshot::build(state, &scheme.compile()?)?;
    let mask = snap.empirical_pareto_mask();
    Ok(ArmSet::filter(state.arms(), |&i| mask[i]))
}

pub fn opt_set(state: &EmpiricalState, scheme: &ConfidenceScheme, eps1: f64) -> Result<ArmSet> {
    let snap = Snapshot::build(state, &scheme.compile()?)?;
    let mask = snap.opt_mask(eps1);
    Ok(ArmSet::filter(state.arms(), |&i| mask[i]))
}

pub fn select(state: &EmpiricalState, scheme: &ConfidenceScheme, eps1: f64) -> Result<Selection> {
    Snapshot::build(state, &scheme.compile()?)?.select(state.counts(), eps1)
}

pub fn stopping_stats(
    state: &EmpiricalState,
    scheme: &ConfidenceScheme,
    rule: &StoppingRule,
) -> Result<(f64, f64)> {
    rule.validate(state.arms())?;
    Ok(Snapshot::build(state, &scheme.compile()?)?.stopping_stats(rule))
}

pub fn check_stop(
    state: &EmpiricalState,
    scheme: &ConfidenceScheme,
    rule: &StoppingRule,
) -> Result<Option<(ArmSet, Trigger)>> {
    rule.validate(state.arms())?;
    Ok(Snapshot::build(state, &scheme.compile()?)?.check_stop(rule))
}

pub fn run(
    instance: &BanditInstance,
    scheme: &ConfidenceScheme,
    rule: &StoppingRule,
    rng: &mut RngStream,
    round_cap: u64,
) -> Result<RunResult> {
    run_with_observer(instance, scheme, rule, rng, round_cap, |_| {})
}

/// [`run`] with a callback invoked once per round after the stop check
/// (and selection, when the run continues).
pub fn run_with_observer(
    instance: &BanditInstance,
    scheme: &ConfidenceScheme,
    rule: &StoppingRule,
    rng: &mut RngStream,
    round_cap: u64,
    mut observe: impl FnMut(&RoundView<'_>),
) -> Result<RunResult> {
    let k = instance.arms();
    rule.validate(k)?;
    let bonus = scheme.compile()?;
    if round_cap < k as u64 {
        return Err(invalid(format!(
            "round cap {round_cap} is below the {k} initial pulls"
        )));
    }
    let mut state = EmpiricalState::new(k, instance.dim());
    let mut obs = vec![0.0; instance.dim()];
    for a in 0..k {
        instance.sample_into(a, rng, &mut obs);
        state.record(a, &obs);
    }
    let mut snap = Snapshot::build(&state, &bonus)?;
    let eps1 = rule.eps1();
    let seed = rng.seed();
    let finish = |state: &EmpiricalState, recommendation, trigger| RunResult {
        algorithm: "ape".into(),
        rule: *rule,
        scheme: *scheme,
        seed,
        tau: state.round(),
        trigger,
        recommendation,
        pulls: state.counts().to_vec(),
    };
    loop {
        if let Some((rec, trigger)) = snap.check_stop(rule) {
            observe(&RoundView {
                state: &state,
                snapshot: &snap,
                selection: None,
            });
            return Ok(finish(&state, rec, trigger));
        }
        if state.round() >= round_cap {
            observe(&RoundView {
                state: &state,
                snapshot: &snap,
                selection: None,
            });
            let rec = snap.psi_recommendation();
            return Ok(finish(&state, rec, Trigger::RoundCap));
        }
        let sel = snap.select(state.counts(), eps1).map_err(|e| match e {
            PsiError::Contract(m) => PsiError::Contract(format!("{m} at round {}", state.round())),
            other => other,
        })?;
        observe(&RoundView {
            state: &state,
            snapshot: &snap,
            selection: Some(sel),
        });
        instance.sample_into(sel.a, rng, &mut obs);
        state.record(sel.a, &obs);
        snap.refresh(&state, &bonus, sel.a);
    }
}
