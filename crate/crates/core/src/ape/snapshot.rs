use crate::confidence::{Bonus, EmpiricalState};
use crate::pareto::{max_diff, ArmSet};

use super::{Selection, StoppingRule, Trigger};
use crate::error::{PsiError, Result};

/// Per-round tables of empirical margins `M̂(i,j)` and bonuses `beta_ij`.
///
/// Built once after initialization and refreshed after each pull: the margin
/// row and column of the pulled arm change, and bonuses are recomputed from the
/// current counts (all pairs for the per-arm calibration, which depends on the
/// global round, only the pulled arm's pairs otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    arms: usize,
    big: Vec<f64>,
    beta: Vec<f64>,
    terms: Vec<f64>,
}

impl Snapshot {
    pub fn build(state: &EmpiricalState, bonus: &Bonus) -> Result<Self> {
        state.require_all_pulled()?;
        let k = state.arms();
        let mut snap = Self {
            arms: k,
            big: vec![0.0; k * k],
            beta: vec![0.0; k * k],
            terms: vec![0.0; k],
        };
        for i in 0..k {
            for j in 0..k {
                snap.big[i * k + j] = max_diff(state.mean(i), state.mean(j));
            }
        }
        snap.refresh_all_bonuses(state, bonus);
        Ok(snap)
    }

    /// Snapshot from explicit row-major `K x K` tables, for evaluating the
    /// rules on hand-built statistics.
    pub fn from_tables(arms: usize, big: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if big.len() != arms * arms || beta.len() != arms * arms || arms < 2 {
            return Err(PsiError::InvalidArgument(format!(
                "tables must be {arms}x{arms} with at least two arms"
            )));
        }
        Ok(Self {
            arms,
            big,
            beta,
            terms: vec![0.0; arms],
        })
    }

    /// Updates the tables after `arm` received one more observation.
    pub fn refresh(&mut self, state: &EmpiricalState, bonus: &Bonus, arm: usize) {
        let k = self.arms;
        for j in 0..k {
            self.big[arm * k + j] = max_diff(state.mean(arm), state.mean(j));
            self.big[j * k + arm] = max_diff(state.mean(j), state.mean(arm));
        }
        match bonus {
            Bonus::PerArm { .. } => self.refresh_all_bonuses(state, bonus),
            Bonus::Pairwise { .. } => {
                let counts = state.counts();
                bonus.arm_terms(
                    &counts[arm..=arm],
                    state.round(),
                    &mut self.terms[arm..=arm],
                );
                for j in 0..k {
                    let b = bonus.pair(self.terms[arm], self.terms[j], counts[arm], counts[j]);
                    self.beta[arm * k + j] = b;
                    self.beta[j * k + arm] = b;
                }
            }
        }
    }

    fn refresh_all_bonuses(&mut self, state: &EmpiricalState, bonus: &Bonus) {
        let k = self.arms;
        let counts = state.counts();
        bonus.arm_terms(counts, state.round(), &mut self.terms);
        for i in 0..k {
            for j in 0..k {
                self.beta[i * k + j] =
                    bonus.pair(self.terms[i], self.terms[j], counts[i], counts[j]);
            }
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    /// `M̂(i,j)`
    #[inline]
    pub fn big(&self, i: usize, j: usize) -> f64 {
        self.big[i * self.arms + j]
    }

    #[inline]
    pub fn beta(&self, i: usize, j: usize) -> f64 {
        self.beta[i * self.arms + j]
    }

    /// `M̂⁻(i,j) = M̂(i,j) - beta_ij`
    #[inline]
    pub fn big_lower(&self, i: usize, j: usize) -> f64 {
        self.big(i, j) - self.beta(i, j)
    }

    /// `M̂⁺(i,j) = M̂(i,j) + beta_ij`
    #[inline]
    pub fn big_upper(&self, i: usize, j: usize) -> f64 {
        self.big(i, j) + self.beta(i, j)
    }

    /// `m̂⁻(i,j) = -M̂⁺(i,j)`
    #[inline]
    pub fn small_lower(&self, i: usize, j: usize) -> f64 {
        -self.big_upper(i, j)
    }

    fn others(&self, i: usize) -> impl Iterator<Item = usize> {
        (0..self.arms).filter(move |&j| j != i)
    }

    /// Arms whose empirical mean no other arm strictly dominates.
    pub fn empirical_pareto_mask(&self) -> Vec<bool> {
        (0..self.arms)
            .map(|i| self.others(i).all(|j| self.big(i, j) >= 0.0))
            .collect()
    }

    pub fn opt_mask(&self, eps1: f64) -> Vec<bool> {
        (0..self.arms)
            .map(|i| self.others(i).all(|j| self.big_lower(i, j) + eps1 > 0.0))
            .collect()
    }

    /// `h_i = min_{j != i} M̂⁻(i,j) + eps1`
    pub fn h(&self, i: usize, eps1: f64) -> f64 {
        self.others(i)
            .map(|j| self.big_lower(i, j))
            .fold(f64::INFINITY, f64::min)
            + eps1
    }

    /// `g_i = max_{j != i} m̂⁻(i,j) + eps2 * [j in OPT]`
    pub fn g(&self, i: usize, eps2: f64, opt: &[bool]) -> f64 {
        self.others(i)
            .map(|j| self.small_lower(i, j) + if opt[j] { eps2 } else { 0.0 })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(Z1, Z2)` of the rule's Z-test; `KRelaxed` uses the plain PSI test.
    pub fn stopping_stats(&self, rule: &StoppingRule) -> (f64, f64) {
        let s = self.empirical_pareto_mask();
        let (mut z1, mut z2) = (f64::INFINITY, f64::INFINITY);
        match *rule {
            StoppingRule::EpsPsi { eps1 } | StoppingRule::KRelaxed { eps1, .. } => {
                let none = vec![false; self.arms];
                for (i, &in_s) in s.iter().enumerate() {
                    if in_s {
                        z1 = z1.min(self.h(i, eps1));
                    } else {
                        z2 = z2.min(self.g(i, 0.0, &none).max(self.h(i, eps1)));
                    }
                }
            }
            StoppingRule::EpsCover { eps1, eps2 } => {
                let opt = self.opt_mask(eps1);
                for (i, &in_s) in s.iter().enumerate() {
                    let v = self.g(i, eps2, &opt).max(self.h(i, eps1));
                    if in_s {
                        z1 = z1.min(v);
                    } else {
                        z2 = z2.min(v);
                    }
                }
            }
        }
        (z1, z2)
    }

    /// `O(t)`: the empirical Pareto set plus arms no other arm confidently dominates.
    pub fn psi_recommendation(&self) -> ArmSet {
        let s = self.empirical_pareto_mask();
        ArmSet::filter(self.arms, |&i| {
            s[i] || self.others(i).all(|j| !(self.small_lower(i, j) > 0.0))
        })
    }

    /// Stop decision for the current round: k-count check first, then the Z-test.
    pub fn check_stop(&self, rule: &StoppingRule) -> Option<(ArmSet, Trigger)> {
        match *rule {
            StoppingRule::KRelaxed { eps1, k } => {
                let opt = self.opt_mask(eps1);
                if opt.iter().filter(|&&o| o).count() >= k {
                    let set = ArmSet::filter(self.arms, |&i| opt[i]);
                    return Some((self.truncate(set, k, eps1), Trigger::KCount));
                }
                let (z1, z2) = self.stopping_stats(rule);
                (z1 > 0.0 && z2 > 0.0).then(|| {
                    (
                        self.truncate(self.psi_recommendation(), k, eps1),
                        Trigger::ZTest,
                    )
                })
            }
            StoppingRule::EpsPsi { .. } => {
                let (z1, z2) = self.stopping_stats(rule);
                (z1 > 0.0 && z2 > 0.0).then(|| (self.psi_recommendation(), Trigger::ZTest))
            }
            StoppingRule::EpsCover { eps1, .. } => {
                let (z1, z2) = self.stopping_stats(rule);
                (z1 > 0.0 && z2 > 0.0).then(|| {
                    let opt = self.opt_mask(eps1);
                    (ArmSet::filter(self.arms, |&i| opt[i]), Trigger::ZTest)
                })
            }
        }
    }

    /// Keeps the `k` arms with the largest `h_i`, lowest index first on ties.
    fn truncate(&self, set: ArmSet, k: usize, eps1: f64) -> ArmSet {
        if set.len() <= k {
            return set;
        }
        let mut ranked: Vec<(usize, f64)> = set.iter().map(|i| (i, self.h(i, eps1))).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut keep: Vec<usize> = ranked[..k].iter().map(|r| r.0).collect();
        keep.sort_unstable();
        ArmSet::from_sorted_unchecked(keep)
    }

    /// Sampling rule: `b` maximises `min_j M̂⁺(b,j)` outside OPT, `c` minimises
    /// `M̂⁻(b,c)`, and the less pulled of the two is sampled.
    pub fn select(&self, counts: &[u64], eps1: f64) -> Result<Selection> {
        let opt = self.opt_mask(eps1);
        let mut best: Option<(usize, f64)> = None;
        for i in (0..self.arms).filter(|&i| !opt[i]) {
            let score = self
                .others(i)
                .map(|j| self.big_upper(i, j))
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let (b, _) =
            best.ok_or_else(|| PsiError::Contract("every arm is already in OPT".into()))?;
        let mut c = usize::MAX;
        let mut low = f64::INFINITY;
        for j in self.others(b) {
            let v = self.big_lower(b, j);
            if c == usize::MAX || v < low {
                c = j;
                low = v;
            }
        }
        let a = match counts[b].cmp(&counts[c]) {
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Greater => c,
            std::cmp::Ordering::Equal => b.min(c),
        };
        Ok(Selection { b, c, a })
    }
}
