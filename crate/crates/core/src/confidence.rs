//! Empirical statistics and confidence bonuses on pairwise mean differences.
//!
//! Two calibrations are provided:
//!
//! * [`ConfidenceScheme::Pairwise`]: a time-uniform bonus on the difference of
//!   two arms,
//!   `beta_ij = 2 sigma sqrt((Cg(ln(K1/delta)/2) + sum_a ln(4 + ln T_a)) * sum_a 1/T_a)`
//!   with `Cg(x) = x + ln x` and `a` ranging over `{i, j}`.
//! * [`ConfidenceScheme::PerArm`]: a union-bound Hoeffding bonus on each arm,
//!   `beta_i = sigma sqrt(2/T_i * ln(5 K D t^4 / (2 delta)))`, combined as
//!   `beta_ij = beta_i + beta_j`.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{check_index, PsiError, Result};

/// Pull counts and running means of every arm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalState {
    arms: usize,
    dim: usize,
    round: u64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    means: Vec<f64>,
}

impl EmpiricalState {
    pub fn new(arms: usize, dim: usize) -> Self {
        Self {
            arms,
            dim,
            round: 0,
            counts: vec![0; arms],
            sums: vec![0.0; arms * dim],
            means: vec![0.0; arms * dim],
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of observations recorded so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Empirical mean vector of `arm`; all zeros before the first pull.
    pub fn mean(&self, arm: usize) -> &[f64] {
        &self.means[arm * self.dim..(arm + 1) * self.dim]
    }

    pub fn all_pulled(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }

    pub fn update(&mut self, arm: usize, obs: &[f64]) -> Result<()> {
        check_index(arm, self.arms)?;
        if obs.len() != self.dim {
            return Err(PsiError::InvalidArgument(format!(
                "observation has {} coordinates, expected {}",
                obs.len(),
                self.dim
            )));
        }
        self.record(arm, obs);
        Ok(())
    }

    pub(crate) fn record(&mut self, arm: usize, obs: &[f64]) {
        self.counts[arm] += 1;
        self.round += 1;
        let n = self.counts[arm] as f64;
        let base = arm * self.dim;
        for (d, x) in obs.iter().enumerate() {
            self.sums[base + d] += x;
            self.means[base + d] = self.sums[base + d] / n;
        }
    }

    pub(crate) fn require_pulled(&self, arm: usize) -> Result<()> {
        check_index(arm, self.arms)?;
        if self.counts[arm] == 0 {
            Err(PsiError::State(format!("arm {arm} has not been pulled")))
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_all_pulled(&self) -> Result<()> {
        (0..self.arms).try_for_each(|a| self.require_pulled(a))
    }
}

/// Calibration of the confidence bonus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfidenceScheme {
    Pairwise {
        delta: f64,
        k1: f64,
        sigma: f64,
    },
    PerArm {
        delta: f64,
        sigma: f64,
        arms: usize,
        dim: usize,
    },
}

/// Union-bound constant `K(K-1)D/2` over arm pairs and objectives.
pub fn theoretical_k1(arms: usize, dim: usize) -> f64 {
    (arms * arms.saturating_sub(1) * dim) as f64 / 2.0
}

/// `Cg(x) = x + ln x`.
pub fn calibration_cg(x: f64) -> f64 {
    x + x.ln()
}

impl ConfidenceScheme {
    pub fn pairwise(delta: f64, k1: f64, sigma: f64) -> Result<Self> {
        let s = ConfidenceScheme::Pairwise { delta, k1, sigma };
        s.compile()?;
        Ok(s)
    }

    pub fn per_arm(delta: f64, sigma: f64, arms: usize, dim: usize) -> Result<Self> {
        let s = ConfidenceScheme::PerArm {
            delta,
            sigma,
            arms,
            dim,
        };
        s.compile()?;
        Ok(s)
    }

    pub fn delta(&self) -> f64 {
        match *self {
            ConfidenceScheme::Pairwise { delta, .. } | ConfidenceScheme::PerArm { delta, .. } => {
                delta
            }
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            ConfidenceScheme::Pairwise { sigma, .. } | ConfidenceScheme::PerArm { sigma, .. } => {
                sigma
            }
        }
    }

    /// Validates parameters and precomputes the constant part of the bonus.
    pub fn compile(&self) -> Result<Bonus> {
        let delta = self.delta();
        if !(delta > 0.0 && delta < 1.0) {
            return Err(PsiError::Calibration(format!(
                "delta must be in (0,1), got {delta}"
            )));
        }
        let sigma = self.sigma();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(PsiError::Calibration(format!(
                "sigma must be > 0, got {sigma}"
            )));
        }
        match *self {
            ConfidenceScheme::Pairwise { k1, .. } => {
                if !(k1 > 0.0) {
                    return Err(PsiError::Calibration(format!("K1 must be > 0, got {k1}")));
                }
                let x = (k1 / delta).ln() / 2.0;
                if !(x > 0.0) {
                    return Err(PsiError::Calibration(format!(
                        "K1/delta = {} must exceed 1 for the calibration function",
                        k1 / delta
                    )));
                }
                let base = calibration_cg(x);
                // smallest radicand factor, reached at T_i = T_j = 1
                if !(base + 2.0 * 4f64.ln() > 0.0) {
                    return Err(PsiError::Calibration(format!(
                        "calibration constant {base} makes the bonus undefined"
                    )));
                }
                Ok(Bonus::Pairwise { base, sigma })
            }
            ConfidenceScheme::PerArm { arms, dim, .. } => {
                if arms == 0 || dim == 0 {
                    return Err(PsiError::Calibration(
                        "per-arm bonus needs K, D >= 1".into(),
                    ));
                }
                let log_const = (5.0 * arms as f64 * dim as f64 / (2.0 * delta)).ln();
                Ok(Bonus::PerArm { log_const, sigma })
            }
        }
    }
}

/// A compiled [`ConfidenceScheme`] ready for repeated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bonus {
    Pairwise { base: f64, sigma: f64 },
    PerArm { log_const: f64, sigma: f64 },
}

impl Bonus {
    /// Fills `per_arm` with the arm-only factors for the current counts and round.
    /// Pairwise: `ln(4 + ln T_a)`; per-arm: `beta_a` itself.
    pub(crate) fn arm_terms(&self, counts: &[u64], round: u64, per_arm: &mut [f64]) {
        match *self {
            Bonus::Pairwise { .. } => {
                for (out, &n) in per_arm.iter_mut().zip(counts) {
                    *out = (4.0 + (n as f64).ln()).ln();
                }
            }
            Bonus::PerArm { log_const, sigma } => {
                let log_t = log_const + 4.0 * (round.max(1) as f64).ln();
                for (out, &n) in per_arm.iter_mut().zip(counts) {
                    *out = sigma * (2.0 / n as f64 * log_t).sqrt();
                }
            }
        }
    }

    /// Pairwise bonus from arm terms produced by [`Bonus::arm_terms`].
    /// The expression is symmetric in `(i, j)` bit for bit.
    #[inline]
    pub(crate) fn pair(&self, term_i: f64, term_j: f64, n_i: u64, n_j: u64) -> f64 {
        match *self {
            Bonus::Pairwise { base, sigma } => {
                let inv = 1.0 / n_i as f64 + 1.0 / n_j as f64;
                2.0 * sigma * ((base + (term_i + term_j)) * inv).sqrt()
            }
            Bonus::PerArm { .. } => term_i + term_j,
        }
    }

    pub fn beta(&self, state: &EmpiricalState, i: usize, j: usize) -> Result<f64> {
        state.require_pulled(i)?;
        state.require_pulled(j)?;
        let counts = [state.pulls(i), state.pulls(j)];
        let mut terms = [0.0; 2];
        self.arm_terms(&counts, state.round(), &mut terms);
        Ok(self.pair(terms[0], terms[1], counts[0], counts[1]))
    }
}

pub fn beta(scheme: &ConfidenceScheme, state: &EmpiricalState, i: usize, j: usize) -> Result<f64> {
    scheme.compile()?.beta(state, i, j)
}

/// Empirical margins of a pair with their confidence envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMargins {
    /// `m̂(i,j) = -M̂(i,j)`
    pub small: f64,
    /// `M̂(i,j) = max_d (mean_i^d - mean_j^d)`
    pub big: f64,
    pub small_lower: f64,
    pub small_upper: f64,
    pub big_lower: f64,
    pub big_upper: f64,
    pub beta: f64,
}

pub fn mhat_margins(
    state: &EmpiricalState,
    scheme: &ConfidenceScheme,
    i: usize,
    j: usize,
) -> Result<PairMargins> {
    let beta = beta(scheme, state, i, j)?;
    let big = crate::pareto::max_diff(state.mean(i), state.mean(j));
    Ok(PairMargins::from_parts(big, beta))
}

impl PairMargins {
    pub fn from_parts(big: f64, beta: f64) -> Self {
        let big_lower = big - beta;
        let big_upper = big + beta;
        Self {
            small: -big,
            big,
            small_lower: -big_upper,
            small_upper: -big_lower,
            big_lower,
            big_upper,
            beta,
        }
    }
}
