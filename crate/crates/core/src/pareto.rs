//! Exact Pareto geometry on known mean matrices.
//!
//! Everything here is deterministic and works on the true means of an
//! instance: dominance margins, (ε-)Pareto sets, the per-arm gaps that drive
//! sample complexity, the closed-form high-probability bound on the stopping
//! time, and the ground-truth check applied to a recommended set.
//!
//! Set membership uses exact `>` comparisons. Tolerances belong to tests.

use serde::{Deserialize, Serialize};

use crate::ape::StoppingRule;
use crate::error::{check_index, invalid, PsiError, Result};

/// Row-major `K x D` matrix of mean vectors, one row per arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct MeanMatrix {
    arms: usize,
    dim: usize,
    values: Vec<f64>,
}

impl MeanMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let arms = rows.len();
        if arms == 0 {
            return Err(invalid("mean matrix needs at least one arm"));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(invalid("mean matrix needs at least one objective"));
        }
        let mut values = Vec::with_capacity(arms * dim);
        for (a, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(invalid(format!(
                    "arm {a} has {} objectives, expected {dim}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::from_flat(arms, dim, values)
    }

    pub fn from_flat(arms: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if arms == 0 || dim == 0 {
            return Err(invalid("mean matrix needs K >= 1 and D >= 1"));
        }
        if values.len() != arms * dim {
            return Err(invalid(format!(
                "expected {} values for a {arms}x{dim} matrix, got {}",
                arms * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite mean for arm {} objective {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { arms, dim, values })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, arm: usize) -> &[f64] {
        &self.values[arm * self.dim..(arm + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// `M(i,j) = max_d (mu_i^d - mu_j^d)`, unchecked.
    #[inline]
    pub(crate) fn big_m(&self, i: usize, j: usize) -> f64 {
        max_diff(self.row(i), self.row(j))
    }

    /// `m(i,j) = min_d (mu_j^d - mu_i^d)`, unchecked.
    #[inline]
    pub(crate) fn small_m(&self, i: usize, j: usize) -> f64 {
        -self.big_m(i, j)
    }
}

impl TryFrom<Vec<Vec<f64>>> for MeanMatrix {
    type Error = PsiError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<MeanMatrix> for Vec<Vec<f64>> {
    fn from(m: MeanMatrix) -> Self {
        m.rows().map(<[f64]>::to_vec).collect()
    }
}

#[inline]
pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Sorted, duplicate-free set of arm indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmSet(Vec<usize>);

impl ArmSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from arbitrary indices, rejecting duplicates and indices `>= arms`.
    pub fn from_indices(mut indices: Vec<usize>, arms: usize) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(invalid(format!("duplicate arm index {}", w[0])));
            }
        }
        if let Some(&last) = indices.last() {
            check_index(last, arms)?;
        }
        Ok(Self(indices))
    }

    /// Collects the indices `i < arms` for which `keep(i)` holds.
    pub fn filter(arms: usize, keep: impl FnMut(&usize) -> bool) -> Self {
        Self((0..arms).filter(keep).collect())
    }

    pub fn all(arms: usize) -> Self {
        Self((0..arms).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }

    pub fn is_subset(&self, other: &ArmSet) -> bool {
        self.0.iter().all(|&a| other.contains(a))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn union(&self, other: &ArmSet) -> ArmSet {
        let mut v: Vec<usize> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        ArmSet(v)
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        ArmSet(v)
    }
}

impl std::fmt::Display for ArmSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (n, a) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// The pair of dominance margins between two arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    /// `m(i,j) = min_d (mu_j^d - mu_i^d)`; positive iff `i` is strictly dominated by `j`.
    pub small: f64,
    /// `M(i,j) = max_d (mu_i^d - mu_j^d)`; negative iff `i` is strictly dominated by `j`.
    pub big: f64,
}

pub fn margins(means: &MeanMatrix, i: usize, j: usize) -> Result<Margins> {
    check_index(i, means.arms())?;
    check_index(j, means.arms())?;
    if i == j {
        return Err(invalid("margins need two distinct arms"));
    }
    let big = means.big_m(i, j);
    Ok(Margins { small: -big, big })
}

/// Arms `i` such that no arm `j` has `mu_i + eps < mu_j` in every objective,
/// i.e. `M(i,j) + eps >= 0` for all `j`. Ties therefore keep both arms.
pub fn pareto_set(means: &MeanMatrix, eps: f64) -> Result<ArmSet> {
    if !(eps >= 0.0) {
        return Err(invalid(format!("eps must be >= 0, got {eps}")));
    }
    Ok(pareto_set_unchecked(means, eps))
}

pub(crate) fn pareto_set_unchecked(means: &MeanMatrix, eps: f64) -> ArmSet {
    let k = means.arms();
    ArmSet::filter(k, |&i| {
        (0..k).all(|j| j == i || means.big_m(i, j) + eps >= 0.0)
    })
}

/// Per-arm hardness quantities of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub pareto: ArmSet,
    /// Gap of every arm.
    pub delta: Vec<f64>,
    /// `omega_i = min_{j != i} M(i,j)`.
    pub omega: Vec<f64>,
    /// `omega` sorted in non-increasing order: `omega_sorted[k-1]` is the k-th largest.
    pub omega_sorted: Vec<f64>,
    /// Defined for Pareto-optimal arms when the Pareto set has at least two arms.
    pub delta_plus: Vec<Option<f64>>,
    pub delta_minus: Vec<Option<f64>>,
}

impl GapReport {
    pub fn arms(&self) -> usize {
        self.delta.len()
    }

    /// k-th largest omega, `1 <= k <= K`.
    pub fn omega_k(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.arms() {
            return Err(invalid(format!(
                "k must be in [1, {}], got {k}",
                self.arms()
            )));
        }
        Ok(self.omega_sorted[k - 1])
    }

    /// The first `k` arms by decreasing omega; ties go to the lower index.
    pub fn top_k_by_omega(&self, k: usize) -> Result<ArmSet> {
        self.omega_k(k)?;
        let mut order: Vec<usize> = (0..self.arms()).collect();
        order.sort_by(|&a, &b| self.omega[b].total_cmp(&self.omega[a]).then(a.cmp(&b)));
        order.truncate(k);
        order.sort_unstable();
        Ok(ArmSet::from_sorted_unchecked(order))
    }

    /// `max(Delta_a, eps1, omega^k)`, or `max(Delta_a, eps1)` when `k` is `None`.
    pub fn delta_tilde(&self, arm: usize, eps1: f64, k: Option<usize>) -> Result<f64> {
        check_index(arm, self.arms())?;
        if !(eps1 >= 0.0) {
            return Err(invalid(format!("eps1 must be >= 0, got {eps1}")));
        }
        let relax = match k {
            Some(k) => self.omega_k(k)?,
            None => f64::NEG_INFINITY,
        };
        Ok(self.delta[arm].max(eps1).max(relax))
    }
}

pub fn gaps(means: &MeanMatrix) -> Result<GapReport> {
    let k = means.arms();
    if k < 2 {
        return Err(invalid("gaps need at least two arms"));
    }
    let pareto = pareto_set_unchecked(means, 0.0);
    let mut delta = vec![f64::NAN; k];

    for a in (0..k).filter(|&a| !pareto.contains(a)) {
        delta[a] = pareto
            .iter()
            .map(|j| means.small_m(a, j))
            .fold(f64::NEG_INFINITY, f64::max);
    }

    let mut delta_plus = vec![None; k];
    let mut delta_minus = vec![None; k];
    if pareto.len() == 1 {
        let i = pareto.as_slice()[0];
        delta[i] = (0..k)
            .filter(|&j| j != i)
            .map(|j| delta[j])
            .fold(f64::INFINITY, f64::min);
    } else {
        for i in pareto.iter() {
            let plus = pareto
                .iter()
                .filter(|&j| j != i)
                .map(|j| means.big_m(i, j).min(means.big_m(j, i)))
                .fold(f64::INFINITY, f64::min);
            // min over an empty set of sub-optimal arms is +inf
            let minus = (0..k)
                .filter(|&j| !pareto.contains(j))
                .map(|j| means.big_m(j, i).max(0.0) + delta[j])
                .fold(f64::INFINITY, f64::min);
            delta_plus[i] = Some(plus);
            delta_minus[i] = Some(minus);
            delta[i] = plus.min(minus);
        }
    }

    let omega: Vec<f64> = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| means.big_m(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut omega_sorted = omega.clone();
    omega_sorted.sort_by(|a, b| b.total_cmp(a));

    Ok(GapReport {
        pareto,
        delta,
        omega,
        omega_sorted,
        delta_plus,
        delta_minus,
    })
}

pub fn delta_tilde(means: &MeanMatrix, arm: usize, eps1: f64, k: usize) -> Result<f64> {
    gaps(means)?.delta_tilde(arm, eps1, Some(k))
}

/// High-probability upper bound on the number of pulls of APE:
/// `sum_a 88 / dt_a^2 * ln( 2K(K-1)D/delta * ln(12e / dt_a) )`
/// with `dt_a = max(Delta_a, eps1, omega^k)`. With `k = None` the omega term is
/// dropped, which is the bound for the cover stopping rule.
pub fn sample_complexity_bound(
    means: &MeanMatrix,
    delta: f64,
    eps1: f64,
    k: Option<usize>,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must be in (0,1), got {delta}")));
    }
    let report = gaps(means)?;
    let arms = means.arms() as f64;
    let union = 2.0 * arms * (arms - 1.0) * means.dim() as f64 / delta;
    let mut total = 0.0;
    for a in 0..means.arms() {
        let dt = report.delta_tilde(a, eps1, k)?;
        if !(dt > 0.0) {
            return Err(PsiError::DegenerateInstance(format!(
                "arm {a} has effective gap {dt}; the bound diverges"
            )));
        }
        let inner = (12.0 * std::f64::consts::E / dt).ln();
        if !(inner > 0.0) {
            return Err(invalid(format!(
                "arm {a} has effective gap {dt} >= 12e, outside the closed form's range"
            )));
        }
        total += 88.0 / (dt * dt) * (union * inner).ln();
    }
    Ok(total)
}

/// Ground-truth correctness of a recommended set for the objective of `rule`.
pub fn verify_recommendation(
    means: &MeanMatrix,
    rec: &ArmSet,
    rule: &StoppingRule,
) -> Result<bool> {
    if let Some(&last) = rec.as_slice().last() {
        check_index(last, means.arms())?;
    }
    rule.validate(means.arms())?;
    let exact = pareto_set_unchecked(means, 0.0);
    let relaxed = pareto_set_unchecked(means, rule.eps1());
    let ok = match *rule {
        StoppingRule::EpsPsi { .. } => exact.is_subset(rec) && rec.is_subset(&relaxed),
        StoppingRule::EpsCover { eps2, .. } => {
            rec.is_subset(&relaxed)
                && (0..means.arms())
                    .filter(|&i| !rec.contains(i) && exact.contains(i))
                    .all(|i| rec.iter().any(|j| means.small_m(i, j) + eps2 > 0.0))
        }
        StoppingRule::KRelaxed { k, .. } => {
            (rec.len() == k && rec.is_subset(&relaxed))
                || (rec.len() < k && exact.is_subset(rec) && rec.is_subset(&relaxed))
        }
    };
    Ok(ok)
}
