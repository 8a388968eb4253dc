use proptest::prelude::*;

use psi_core::ape::{self, run, run_with_observer, Snapshot};
use psi_core::confidence::beta;
use psi_core::model::{gen_lower_bound_instance, gen_random_bernoulli};
use psi_core::{
    BanditInstance, ConfidenceScheme, EmpiricalState, MeanMatrix, RngStream, StoppingRule, Trigger,
};

const CAP: u64 = 200_000;

fn bernoulli(arms: usize, dim: usize, seed: u64) -> BanditInstance {
    gen_random_bernoulli(arms, dim, &mut RngStream::derive(seed, 1)).unwrap()
}

fn schemes(inst: &BanditInstance) -> [ConfidenceScheme; 2] {
    [
        ConfidenceScheme::pairwise(0.1, 1.0, 0.5).unwrap(),
        ConfidenceScheme::per_arm(0.1, 0.5, inst.arms(), inst.dim()).unwrap(),
    ]
}

/// Sampling rule written directly from the single-objective form: `b`
/// maximises `min_j (mu_b - mu_j + beta)`, `c` minimises `mu_b - mu_c - beta`.
fn best_arm_selection(state: &EmpiricalState, scheme: &ConfidenceScheme) -> (usize, usize, usize) {
    let k = state.arms();
    let mu = |i: usize| state.mean(i)[0];
    let upper = |i: usize, j: usize| mu(i) - mu(j) + beta(scheme, state, i, j).unwrap();
    let lower = |i: usize, j: usize| mu(i) - mu(j) - beta(scheme, state, i, j).unwrap();
    let mut b = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..k {
        let v = (0..k)
            .filter(|&j| j != i)
            .map(|j| upper(i, j))
            .fold(f64::INFINITY, f64::min);
        if v > best {
            best = v;
            b = i;
        }
    }
    let mut c = usize::MAX;
    let mut low = f64::INFINITY;
    for j in (0..k).filter(|&j| j != b) {
        if lower(b, j) < low {
            low = lower(b, j);
            c = j;
        }
    }
    let n = state.counts();
    let a = if n[b] < n[c] || (n[b] == n[c] && b < c) {
        b
    } else {
        c
    };
    (b, c, a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn incremental_snapshot_matches_rebuild(arms in 2usize..6, dim in 1usize..4, seed in 0u64..1000, eps1 in 0.0f64..0.2) {
        let inst = bernoulli(arms, dim, seed);
        for scheme in schemes(&inst) {
            let bonus = scheme.compile().unwrap();
            let mut checked = 0u64;
            run_with_observer(&inst, &scheme, &StoppingRule::EpsPsi { eps1 }, &mut RngStream::new(seed), 3000, |view| {
                let fresh = Snapshot::build(view.state, &bonus).unwrap();
                for i in 0..arms {
                    for j in (0..arms).filter(|&j| j != i) {
                        assert_eq!(view.snapshot.big(i, j).to_bits(), fresh.big(i, j).to_bits());
                        assert_eq!(view.snapshot.beta(i, j).to_bits(), fresh.beta(i, j).to_bits());
                    }
                }
                checked += 1;
            }).unwrap();
            prop_assert!(checked > 0);
        }
    }

    #[test]
    fn selection_invariants(arms in 2usize..7, dim in 1usize..4, seed in 0u64..1000, eps1 in 0.0f64..0.2) {
        let inst = bernoulli(arms, dim, seed);
        let scheme = ConfidenceScheme::pairwise(0.1, 1.0, 0.5).unwrap();
        let res = run_with_observer(&inst, &scheme, &StoppingRule::EpsPsi { eps1 }, &mut RngStream::new(seed), 20_000, |view| {
            if let Some(sel) = view.selection {
                let opt = view.snapshot.opt_mask(eps1);
                assert!(!opt[sel.b], "b in OPT");
                assert_ne!(sel.b, sel.c);
                assert!(sel.a == sel.b || sel.a == sel.c);
                let n = view.state.counts();
                assert!(n[sel.a] <= n[sel.b].min(n[sel.c]));
            }
        }).unwrap();
        prop_assert_eq!(res.pulls.iter().sum::<u64>(), res.tau);
        prop_assert!(res.trigger == Trigger::RoundCap || !res.recommendation.is_empty());
    }

    #[test]
    fn single_objective_selection_is_best_arm_rule(arms in 2usize..7, seed in 0u64..1000) {
        let inst = bernoulli(arms, 1, seed);
        for scheme in schemes(&inst) {
            let mut seen = 0;
            run_with_observer(&inst, &scheme, &StoppingRule::EpsPsi { eps1: 0.0 }, &mut RngStream::new(seed), 5000, |view| {
                if let Some(sel) = view.selection {
                    assert_eq!((sel.b, sel.c, sel.a), best_arm_selection(view.state, &scheme));
                    seen += 1;
                }
            }).unwrap();
            prop_assert!(seen > 0);
        }
    }

    #[test]
    fn single_objective_stop_needs_only_first_statistic(arms in 2usize..7, seed in 0u64..1000) {
        let inst = bernoulli(arms, 1, seed);
        let rule = StoppingRule::EpsPsi { eps1: 0.0 };
        for scheme in schemes(&inst) {
            run_with_observer(&inst, &scheme, &rule, &mut RngStream::new(seed), CAP, |view| {
                let (z1, z2) = view.snapshot.stopping_stats(&rule);
                assert_eq!(z1 > 0.0 && z2 > 0.0, z1 > 0.0, "z1={z1} z2={z2}");
            }).unwrap();
        }
    }

    #[test]
    fn relaxed_rules_never_stop_later(arms in 2usize..6, dim in 1usize..4, seed in 0u64..1000,
                                     eps1 in 0.01f64..0.1, eps2 in 0.0f64..0.3) {
        let inst = bernoulli(arms, dim, seed);
        let scheme = ConfidenceScheme::pairwise(0.1, 1.0, 0.5).unwrap();
        let go = |rule: StoppingRule| run(&inst, &scheme, &rule, &mut RngStream::new(seed), CAP).unwrap();
        let psi = go(StoppingRule::EpsPsi { eps1 });
        let cover = go(StoppingRule::EpsCover { eps1, eps2 });
        prop_assert!(cover.tau <= psi.tau, "cover {} psi {}", cover.tau, psi.tau);
        for k in 1..=arms {
            let relaxed = go(StoppingRule::KRelaxed { eps1, k });
            prop_assert!(relaxed.tau <= psi.tau, "k={} {} psi {}", k, relaxed.tau, psi.tau);
        }
    }
}

#[test]
fn functional_api_agrees_with_snapshot() {
    let inst = bernoulli(5, 3, 7);
    let scheme = ConfidenceScheme::pairwise(0.1, 1.0, 0.5).unwrap();
    let rule = StoppingRule::EpsCover {
        eps1: 0.05,
        eps2: 0.1,
    };
    run_with_observer(
        &inst,
        &scheme,
        &rule,
        &mut RngStream::new(7),
        2000,
        |view| {
            let stats = ape::stopping_stats(view.state, &scheme, &rule).unwrap();
            assert_eq!(stats, view.snapshot.stopping_stats(&rule));
            if let Some(sel) = view.selection {
                assert_eq!(ape::select(view.state, &scheme, 0.05).unwrap(), sel);
            }
        },
    )
    .unwrap();
}

#[test]
fn one_arm_stops_before_four_on_lower_bound_family() {
    let inst = gen_lower_bound_instance(4, 0.1, &[0.0, 0.0], 2).unwrap();
    let scheme = ConfidenceScheme::pairwise(0.1, 1.0, 1.0).unwrap();
    let mut smaller = 0;
    for seed in 0..100 {
        let go = |k| {
            run(
                &inst,
                &scheme,
                &StoppingRule::KRelaxed { eps1: 0.0, k },
                &mut RngStream::new(seed),
                10_000_000,
            )
            .unwrap()
        };
        let (one, four) = (go(1), go(4));
        assert_eq!(one.trigger, Trigger::KCount);
        if one.tau < four.tau {
            smaller += 1;
        }
    }
    assert!(
        smaller >= 95,
        "k=1 stopped strictly earlier on {smaller}/100 seeds"
    );
}

#[test]
fn noiseless_instance_is_identified_by_every_rule() {
    let means = MeanMatrix::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.4, 0.4],
        vec![0.2, 0.1],
    ])
    .unwrap();
    let inst = BanditInstance::new(
        means,
        psi_core::Family::GaussianDiagonal {
            variances: vec![0.0; 2],
        },
    )
    .unwrap();
    let scheme = ConfidenceScheme::pairwise(0.1, 1.0, 1.0).unwrap();
    for rule in [
        StoppingRule::EpsPsi { eps1: 0.0 },
        StoppingRule::EpsCover {
            eps1: 0.0,
            eps2: 0.5,
        },
        StoppingRule::KRelaxed { eps1: 0.0, k: 2 },
    ] {
        let res = run(&inst, &scheme, &rule, &mut RngStream::new(0), CAP).unwrap();
        assert!(
            res.is_correct(&inst).unwrap(),
            "{rule:?} -> {:?}",
            res.recommendation
        );
    }
}
