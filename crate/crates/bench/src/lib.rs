//! Shared fixtures for the benchmarks.

use psi_core::model::{covboost_instance, gen_random_bernoulli};
use psi_core::{BanditInstance, ConfidenceScheme, EmpiricalState, RngStream};

/// Random Bernoulli instance drawn from `seed`.
pub fn bernoulli(arms: usize, dim: usize, seed: u64) -> BanditInstance {
    gen_random_bernoulli(arms, dim, &mut RngStream::derive(seed, 1)).expect("valid shape")
}

pub fn covboost() -> BanditInstance {
    covboost_instance()
}

/// Empirical state after `per_arm` pulls of every arm.
pub fn warm_state(instance: &BanditInstance, per_arm: u64, seed: u64) -> EmpiricalState {
    let mut rng = RngStream::new(seed);
    let mut state = EmpiricalState::new(instance.arms(), instance.dim());
    let mut obs = vec![0.0; instance.dim()];
    for _ in 0..per_arm {
        for a in 0..instance.arms() {
            instance.sample_into(a, &mut rng, &mut obs);
            state.update(a, &obs).expect("matching dimension");
        }
    }
    state
}

pub fn pairwise(delta: f64) -> ConfidenceScheme {
    ConfidenceScheme::pairwise(delta, 1.0, 0.5).expect("valid calibration")
}
