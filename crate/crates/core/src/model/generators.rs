use super::{BanditInstance, Family, RngStream};
use crate::error::{invalid, Result};
use crate::pareto::MeanMatrix;

/// Bernoulli instance with every mean drawn uniformly on `[0,1]`.
pub fn gen_random_bernoulli(
    arms: usize,
    dim: usize,
    rng: &mut RngStream,
) -> Result<BanditInstance> {
    if arms < 2 || dim < 1 {
        return Err(invalid(format!(
            "need K >= 2 and D >= 1, got K={arms}, D={dim}"
        )));
    }
    let values = (0..arms * dim).map(|_| rng.uniform()).collect();
    BanditInstance::new(
        MeanMatrix::from_flat(arms, dim, values)?,
        Family::BernoulliIndependent,
    )
}

/// Worst-case family with `p` Pareto-optimal arms on the anti-diagonal of the
/// first two objectives. With 1-based index `i`:
/// - `i >= p-2`: first coordinate `2^(p-i) * omega`,
/// - `i <= p-3`: first coordinate `(4 + 2i) * omega`,
///
/// the second coordinate is the negated first and the remaining ones copy `mu0`.
/// Arms are unit-variance Gaussians.
pub fn gen_lower_bound_instance(
    p: usize,
    omega: f64,
    mu0: &[f64],
    dim: usize,
) -> Result<BanditInstance> {
    gen_lower_bound_instance_with_dominated(p, omega, mu0, dim, &[])
}

/// Same as [`gen_lower_bound_instance`] with extra arms `mu0 - alpha` appended,
/// one per entry of `alphas`.
pub fn gen_lower_bound_instance_with_dominated(
    p: usize,
    omega: f64,
    mu0: &[f64],
    dim: usize,
    alphas: &[f64],
) -> Result<BanditInstance> {
    if p < 3 {
        return Err(invalid(format!("p must be >= 3, got {p}")));
    }
    if dim < 2 {
        return Err(invalid(format!("D must be >= 2, got {dim}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid(format!("omega must be > 0, got {omega}")));
    }
    if mu0.len() != dim {
        return Err(invalid(format!(
            "mu0 has {} entries, expected {dim}",
            mu0.len()
        )));
    }
    let mut rows = Vec::with_capacity(p + alphas.len());
    for i in 1..=p {
        let level = if i + 2 >= p {
            2f64.powi((p - i) as i32) * omega
        } else {
            (4.0 + 2.0 * i as f64) * omega
        };
        let mut row = mu0.to_vec();
        row[0] = level;
        row[1] = -level;
        rows.push(row);
    }
    for &alpha in alphas {
        rows.push(mu0.iter().map(|m| m - alpha).collect());
    }
    BanditInstance::gaussian_unit(MeanMatrix::new(rows)?)
}
