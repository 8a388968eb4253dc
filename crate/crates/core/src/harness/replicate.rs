use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AlgorithmSpec, ExperimentConfig, InstanceSource};
use crate::ape::{self, RunResult, StoppingRule, Trigger};
use crate::baselines::{bai_run, psi_unif_elim};
use crate::confidence::ConfidenceScheme;
use crate::error::{invalid, Result};
use crate::model::{BanditInstance, RngStream};
use crate::pareto::ArmSet;

/// Environment variable holding the number of worker threads.
pub const THREADS_ENV: &str = "PSI_THREADS";

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Groups runs sharing algorithm, rule and bonus parameters.
    pub config: String,
    pub instance: String,
    /// Seed the instance was drawn from, for random sources.
    pub instance_seed: Option<u64>,
    pub instance_id: String,
    pub seed: u64,
    pub algorithm: String,
    pub rule: StoppingRule,
    pub delta: f64,
    pub k1: Option<f64>,
    pub sigma: f64,
    pub tau: u64,
    pub trigger: Trigger,
    pub recommendation: ArmSet,
    pub correct: bool,
    pub pulls: Vec<u64>,
}

pub fn config_key(
    algo: AlgorithmSpec,
    rule: &StoppingRule,
    scheme: &ConfidenceScheme,
    source: &InstanceSource,
) -> String {
    let bonus = match *scheme {
        ConfidenceScheme::Pairwise { delta, k1, sigma } => {
            format!("delta={delta} k1={k1} sigma={sigma}")
        }
        ConfidenceScheme::PerArm { delta, sigma, .. } => {
            format!("delta={delta} per-arm sigma={sigma}")
        }
    };
    format!("{algo} {} {bonus} instance={source}", rule.label())
}

/// Runs `algo` once on `instance` with observation stream `seed`.
pub fn run_algorithm(
    config: &ExperimentConfig,
    algo: AlgorithmSpec,
    instance: &BanditInstance,
    seed: u64,
) -> Result<RunResult> {
    let rule = config.rule_for(algo, instance.arms())?;
    let scheme = config.scheme_for(algo, instance)?;
    let mut rng = RngStream::new(seed);
    match algo {
        AlgorithmSpec::Ape => ape::run(instance, &scheme, &rule, &mut rng, config.round_cap),
        AlgorithmSpec::PsiUnifElim => {
            let StoppingRule::KRelaxed { eps1, k } = rule else {
                return Err(invalid("elimination runs with a k-relaxed objective"));
            };
            psi_unif_elim(instance, &scheme, eps1, k, &mut rng, config.round_cap)
        }
        AlgorithmSpec::Bai(b) => bai_run(instance, b, &scheme, &mut rng, config.round_cap),
    }
}

pub fn record_run(
    config: &ExperimentConfig,
    algo: AlgorithmSpec,
    instance: &BanditInstance,
    instance_seed: Option<u64>,
    seed: u64,
) -> Result<RunRecord> {
    let res = run_algorithm(config, algo, instance, seed)?;
    let correct = res.is_correct(instance)?;
    let k1 = match res.scheme {
        ConfidenceScheme::Pairwise { k1, .. } => Some(k1),
        ConfidenceScheme::PerArm { .. } => None,
    };
    Ok(RunRecord {
        config: config_key(algo, &res.rule, &res.scheme, &config.instance),
        instance: config.instance.to_string(),
        instance_seed,
        instance_id: instance.fingerprint(),
        seed: res.seed,
        algorithm: res.algorithm,
        rule: res.rule,
        delta: res.scheme.delta(),
        k1,
        sigma: res.scheme.sigma(),
        tau: res.tau,
        trigger: res.trigger,
        recommendation: res.recommendation,
        correct,
        pulls: res.pulls,
    })
}

/// Runs every algorithm on replications `r = 0..reps` with seed `seed + r`.
///
/// With fresh instances, replication `r` draws its instance from the same seed
/// and all algorithms run once on it. Records come back in seed order, then
/// algorithm order, whatever order the workers finish in.
pub fn replicate(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let fixed = if config.fresh_instance_per_rep {
        None
    } else {
        Some(config.instance.materialize(config.seed)?)
    };
    let fixed_seed = config.instance.is_random().then_some(config.seed);
    let per_rep: Vec<Result<Vec<RunRecord>>> = with_thread_pool(|| {
        (0..config.reps)
            .into_par_iter()
            .map(|r| {
                let seed = config.seed.wrapping_add(r);
                let (instance, instance_seed) = match &fixed {
                    Some(inst) => (Cow::Borrowed(inst), fixed_seed),
                    None => (Cow::Owned(config.instance.materialize(seed)?), Some(seed)),
                };
                config
                    .algorithms
                    .iter()
                    .map(|&a| record_run(config, a, &instance, instance_seed, seed))
                    .collect()
            })
            .collect()
    })?;
    let mut out = Vec::with_capacity(per_rep.len() * config.algorithms.len());
    for recs in per_rep {
        out.extend(recs?);
    }
    Ok(out)
}

/// Runs `f` on a pool sized by [`THREADS_ENV`], or on the global pool when unset.
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{THREADS_ENV} must be a thread count, got '{v}'")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}
