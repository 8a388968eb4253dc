//! Best-arm identification baselines for single-objective instances.
//!
//! * LUCB: pulls both the empirical best arm `h` and the challenger `l` with the
//!   largest upper bound; stops once `L_h > U_l`.
//! * UGapEc: `J` minimises `B_i = max_{j != i} U_j - L_i`, `u` maximises `U_j`
//!   over `j != J`; pulls the less sampled of the two; stops once `B_J < 0`.
//! * LUCB++: LUCB with asymmetric confidence levels, `delta / (2(K-1))` for the
//!   empirical best arm and `delta / 2` for the others.
//!
//! Confidence radii come from an [`ArmBonus`]; [`HoeffdingBonus`] is the default.

use serde::{Deserialize, Serialize};

use crate::ape::{RunResult, StoppingRule, Trigger};
use crate::confidence::{ConfidenceScheme, EmpiricalState};
use crate::error::{invalid, Result};
use crate::model::{BanditInstance, RngStream};
use crate::pareto::ArmSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaiAlgorithm {
    Lucb,
    UGapEc,
    LucbPp,
}

impl BaiAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            BaiAlgorithm::Lucb => "lucb",
            BaiAlgorithm::UGapEc => "ugapec",
            BaiAlgorithm::LucbPp => "lucbpp",
        }
    }
}

/// Confidence radius of a single arm's empirical mean.
pub trait ArmBonus {
    /// Radius after `pulls` observations of the arm, `round` pulls in total,
    /// at per-arm confidence level `delta`.
    fn radius(&self, pulls: u64, round: u64, delta: f64) -> f64;
}

/// `sigma * sqrt(2/T * ln(5 t^4 / (2 delta)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingBonus {
    pub sigma: f64,
}

impl ArmBonus for HoeffdingBonus {
    fn radius(&self, pulls: u64, round: u64, delta: f64) -> f64 {
        let log = (5.0 / (2.0 * delta)).ln() + 4.0 * (round.max(1) as f64).ln();
        self.sigma * (2.0 / pulls as f64 * log).sqrt()
    }
}

/// Runs `algorithm` with the default bonus. Only `delta` and `sigma` of
/// `scheme` are used.
pub fn bai_run(
    instance: &BanditInstance,
    algorithm: BaiAlgorithm,
    scheme: &ConfidenceScheme,
    rng: &mut RngStream,
    round_cap: u64,
) -> Result<RunResult> {
    scheme.compile()?;
    let bonus = HoeffdingBonus {
        sigma: scheme.sigma(),
    };
    bai_run_with_bonus(instance, algorithm, scheme, &bonus, rng, round_cap)
}

pub fn bai_run_with_bonus(
    instance: &BanditInstance,
    algorithm: BaiAlgorithm,
    scheme: &ConfidenceScheme,
    bonus: &dyn ArmBonus,
    rng: &mut RngStream,
    round_cap: u64,
) -> Result<RunResult> {
    if instance.dim() != 1 {
        return Err(invalid(format!(
            "best-arm identification needs one objective, instance has {}",
            instance.dim()
        )));
    }
    let k = instance.arms();
    if round_cap < k as u64 {
        return Err(invalid(format!(
            "round cap {round_cap} is below the {k} initial pulls"
        )));
    }
    let delta = scheme.delta();
    let mut state = EmpiricalState::new(k, 1);
    let mut obs = [0.0];
    let mut pull = |state: &mut EmpiricalState, a: usize, rng: &mut RngStream| {
        instance.sample_into(a, rng, &mut obs);
        state.record(a, &obs);
    };
    for a in 0..k {
        pull(&mut state, a, rng);
    }
    let seed = rng.seed();
    let finish = |state: &EmpiricalState, best: Option<usize>, trigger| RunResult {
        algorithm: algorithm.name().into(),
        rule: StoppingRule::KRelaxed { eps1: 0.0, k: 1 },
        scheme: *scheme,
        seed,
        tau: state.round(),
        trigger,
        recommendation: best.map_or_else(ArmSet::empty, |b| ArmSet::from_sorted_unchecked(vec![b])),
        pulls: state.counts().to_vec(),
    };

    let mut upper = vec![0.0; k];
    let mut lower = vec![0.0; k];
    loop {
        let t = state.round();
        let mean = |a: usize| state.mean(a)[0];
        let best = argmax((0..k).map(|a| (a, mean(a)))).expect("at least two arms");
        for a in 0..k {
            let level = match algorithm {
                BaiAlgorithm::Lucb | BaiAlgorithm::UGapEc => delta / k as f64,
                BaiAlgorithm::LucbPp if a == best => delta / (2.0 * (k - 1) as f64),
                BaiAlgorithm::LucbPp => delta / 2.0,
            };
            let r = bonus.radius(state.pulls(a), t, level);
            upper[a] = mean(a) + r;
            lower[a] = mean(a) - r;
        }
        let (lead, challenger) = match algorithm {
            BaiAlgorithm::Lucb | BaiAlgorithm::LucbPp => {
                let l = argmax((0..k).filter(|&j| j != best).map(|j| (j, upper[j]))).unwrap();
                (best, l)
            }
            BaiAlgorithm::UGapEc => {
                let gap = |i: usize| {
                    (0..k)
                        .filter(|&j| j != i)
                        .map(|j| upper[j])
                        .fold(f64::NEG_INFINITY, f64::max)
                        - lower[i]
                };
                let j = argmax((0..k).map(|i| (i, -gap(i)))).unwrap();
                let u = argmax((0..k).filter(|&i| i != j).map(|i| (i, upper[i]))).unwrap();
                (j, u)
            }
        };
        if lower[lead] > upper[challenger] {
            return Ok(finish(&state, Some(lead), Trigger::ZTest));
        }
        if t >= round_cap {
            return Ok(finish(&state, Some(best), Trigger::RoundCap));
        }
        match algorithm {
            BaiAlgorithm::Lucb | BaiAlgorithm::LucbPp => {
                pull(&mut state, lead, rng);
                pull(&mut state, challenger, rng);
            }
            BaiAlgorithm::UGapEc => {
                let a = match state.pulls(lead).cmp(&state.pulls(challenger)) {
                    std::cmp::Ordering::Less => lead,
                    std::cmp::Ordering::Greater => challenger,
                    std::cmp::Ordering::Equal => lead.min(challenger),
                };
                pull(&mut state, a, rng);
            }
        }
    }
}

/// First index attaining the maximum value.
fn argmax(items: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in items {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|b| b.0)
}
