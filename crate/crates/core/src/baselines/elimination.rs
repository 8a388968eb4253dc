//! Uniform sampling with elimination: each phase pulls every active arm once,
//! discards arms confidently dominated, and accepts arms confidently optimal
//! that no remaining active arm could still dominate.
//!
//! With `k < K` the run also stops as soon as `k` arms are known to be
//! `eps1`-optimal. The pseudo-code exists in two versions that name the active
//! set differently; this follows the later one, with a single active set.

use crate::ape::{RunResult, StoppingRule, Trigger};
use crate::confidence::{ConfidenceScheme, EmpiricalState};
use crate::error::{invalid, Result};
use crate::model::{BanditInstance, RngStream};
use crate::pareto::{max_diff, ArmSet};

/// Active and accepted sets at the end of a phase.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationState {
    pub phase: u64,
    pub active: ArmSet,
    pub accepted: ArmSet,
    /// Arms confidently dominated so far.
    pub eliminated: ArmSet,
    /// Arms of the active set confidently `eps1`-optimal in this phase.
    pub p1: ArmSet,
    /// Arms of `p1` moved to the accepted set in this phase.
    pub p2: ArmSet,
}

pub fn psi_unif_elim(
    instance: &BanditInstance,
    scheme: &ConfidenceScheme,
    eps1: f64,
    k: usize,
    rng: &mut RngStream,
    round_cap: u64,
) -> Result<RunResult> {
    psi_unif_elim_with_observer(instance, scheme, eps1, k, rng, round_cap, |_| {})
}

pub fn psi_unif_elim_with_observer(
    instance: &BanditInstance,
    scheme: &ConfidenceScheme,
    eps1: f64,
    k: usize,
    rng: &mut RngStream,
    round_cap: u64,
    mut observe: impl FnMut(&EliminationState),
) -> Result<RunResult> {
    let arms = instance.arms();
    let rule = StoppingRule::KRelaxed { eps1, k };
    rule.validate(arms)?;
    let bonus = scheme.compile()?;
    if round_cap < arms as u64 {
        return Err(invalid(format!(
            "round cap {round_cap} is below the {arms} initial pulls"
        )));
    }

    let mut state = EmpiricalState::new(arms, instance.dim());
    let mut obs = vec![0.0; instance.dim()];
    let mut active: Vec<bool> = vec![true; arms];
    let mut accepted: Vec<bool> = vec![false; arms];
    let mut eliminated: Vec<bool> = vec![false; arms];
    let mut terms = vec![0.0; arms];
    let mut phase = 0;

    let seed = rng.seed();
    let finish = |state: &EmpiricalState, recommendation: ArmSet, trigger| RunResult {
        algorithm: "psi-unif-elim".into(),
        rule,
        scheme: *scheme,
        seed,
        tau: state.round(),
        trigger,
        recommendation,
        pulls: state.counts().to_vec(),
    };

    loop {
        if state.round() >= round_cap {
            let rec = ArmSet::filter(arms, |&i| accepted[i] || active[i]);
            return Ok(finish(&state, rec, Trigger::RoundCap));
        }
        phase += 1;
        let prev: Vec<usize> = (0..arms).filter(|&i| active[i]).collect();
        for &a in &prev {
            instance.sample_into(a, rng, &mut obs);
            state.record(a, &obs);
        }
        bonus.arm_terms(state.counts(), state.round(), &mut terms);
        let counts = state.counts();
        let beta = |i: usize, j: usize| bonus.pair(terms[i], terms[j], counts[i], counts[j]);
        let big = |i: usize, j: usize| max_diff(state.mean(i), state.mean(j));

        // m̂(i,j) = -M̂(i,j) <= beta for every j keeps i active
        let kept: Vec<usize> = prev
            .iter()
            .copied()
            .filter(|&i| prev.iter().all(|&j| j == i || -big(i, j) <= beta(i, j)))
            .collect();
        for &i in &prev {
            if !kept.contains(&i) {
                active[i] = false;
                eliminated[i] = true;
            }
        }
        let p1: Vec<usize> = kept
            .iter()
            .copied()
            .filter(|&i| {
                kept.iter()
                    .all(|&j| j == i || big(i, j) + eps1 >= beta(i, j))
            })
            .collect();
        let p2: Vec<usize> = p1
            .iter()
            .copied()
            .filter(|&j| {
                !kept
                    .iter()
                    .any(|&i| !p1.contains(&i) && big(i, j) + eps1 <= beta(i, j))
            })
            .collect();
        let accepted_before: Vec<usize> = (0..arms).filter(|&i| accepted[i]).collect();
        for &j in &p2 {
            active[j] = false;
            accepted[j] = true;
        }

        observe(&EliminationState {
            phase,
            active: ArmSet::filter(arms, |&i| active[i]),
            accepted: ArmSet::filter(arms, |&i| accepted[i]),
            eliminated: ArmSet::filter(arms, |&i| eliminated[i]),
            p1: ArmSet::filter(arms, |i| p1.contains(i)),
            p2: ArmSet::filter(arms, |i| p2.contains(i)),
        });

        if active.iter().all(|a| !a) {
            let rec = ArmSet::filter(arms, |&i| accepted[i]);
            return Ok(finish(&state, rec, Trigger::ZTest));
        }
        let early: Vec<usize> = {
            let mut v = accepted_before.clone();
            v.extend(p1.iter().filter(|i| !accepted_before.contains(i)));
            v
        };
        if early.len() >= k {
            // previously accepted arms first, then this phase's by confidence
            let mut extra: Vec<(usize, f64)> = early[accepted_before.len()..]
                .iter()
                .map(|&i| {
                    let score = kept
                        .iter()
                        .filter(|&&j| j != i)
                        .map(|&j| big(i, j) - beta(i, j))
                        .fold(f64::INFINITY, f64::min);
                    (i, score)
                })
                .collect();
            extra.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut keep: Vec<usize> = accepted_before.iter().copied().take(k).collect();
            keep.extend(extra.iter().map(|e| e.0).take(k - keep.len()));
            let rec = ArmSet::from_indices(keep, arms)?;
            return Ok(finish(&state, rec, Trigger::KCount));
        }
    }
}
