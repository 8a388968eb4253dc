use psi_core::ape::run;
use psi_core::baselines::{bai_run, psi_unif_elim, psi_unif_elim_with_observer, BaiAlgorithm};
use psi_core::confidence::theoretical_k1;
use psi_core::model::gen_random_bernoulli;
use psi_core::pareto::{gaps, pareto_set, verify_recommendation};
use psi_core::{
    BanditInstance, ConfidenceScheme, Family, MeanMatrix, RngStream, StoppingRule, Trigger,
};

const CAP: u64 = 2_000_000;

fn instance(seed: u64) -> BanditInstance {
    gen_random_bernoulli(4, 2, &mut RngStream::derive(seed, 1)).unwrap()
}

#[test]
fn elimination_decisions_are_sound() {
    let eps1 = 0.05;
    let runs = 60;
    let mut unsound = 0;
    for seed in 0..runs {
        let inst = instance(seed);
        let means = inst.effective_means();
        let exact = pareto_set(&means, 0.0).unwrap();
        let relaxed = pareto_set(&means, eps1).unwrap();
        let scheme = ConfidenceScheme::pairwise(0.1, theoretical_k1(4, 2), 0.5).unwrap();
        let mut ok = true;
        let mut prev_active = None;
        psi_unif_elim_with_observer(
            &inst,
            &scheme,
            eps1,
            4,
            &mut RngStream::new(seed),
            CAP,
            |st| {
                ok &= st.eliminated.iter().all(|i| !exact.contains(i));
                ok &= st.accepted.is_subset(&relaxed);
                assert!(st.accepted.iter().all(|i| !st.active.contains(i)));
                if let Some(prev) = prev_active.replace(st.active.clone()) {
                    assert!(st.active.is_subset(&prev), "active set grew");
                }
            },
        )
        .unwrap();
        if !ok {
            unsound += 1;
        }
    }
    assert!(
        unsound as f64 <= 0.1 * runs as f64,
        "{unsound} unsound runs"
    );
}

#[test]
fn full_k_objective_equals_exact_identification() {
    let eps1 = 0.05;
    let scheme = ConfidenceScheme::pairwise(0.1, 1.0, 0.5).unwrap();
    let relaxed = StoppingRule::KRelaxed { eps1, k: 4 };
    let psi = StoppingRule::EpsPsi { eps1 };
    for seed in 0..40 {
        let inst = instance(seed);
        let means = inst.effective_means();
        let elim = psi_unif_elim(&inst, &scheme, eps1, 4, &mut RngStream::new(seed), CAP).unwrap();
        let ape = run(&inst, &scheme, &relaxed, &mut RngStream::new(seed), CAP).unwrap();
        for res in [elim, ape] {
            assert_ne!(res.trigger, Trigger::RoundCap);
            assert_eq!(
                verify_recommendation(&means, &res.recommendation, &relaxed).unwrap(),
                verify_recommendation(&means, &res.recommendation, &psi).unwrap()
            );
        }
    }
}

#[test]
fn best_arm_instance_gaps_match_classical_gaps() {
    let mu = [0.25, 0.16, 0.87, 0.22, 0.98];
    let rows = mu.iter().map(|&v| vec![v]).collect();
    let rep = gaps(&MeanMatrix::new(rows).unwrap()).unwrap();
    let expect = [0.73, 0.82, 0.11, 0.76, 0.11];
    for (got, want) in rep.delta.iter().zip(expect) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn bai_algorithms_find_the_best_arm() {
    let mu = [0.25, 0.16, 0.87, 0.22, 0.98];
    let inst = BanditInstance::new(
        MeanMatrix::new(mu.iter().map(|&v| vec![v]).collect()).unwrap(),
        Family::BernoulliIndependent,
    )
    .unwrap();
    let scheme = ConfidenceScheme::per_arm(0.05, 0.5, 5, 1).unwrap();
    for algo in [
        BaiAlgorithm::Lucb,
        BaiAlgorithm::UGapEc,
        BaiAlgorithm::LucbPp,
    ] {
        for seed in 0..10 {
            let res = bai_run(&inst, algo, &scheme, &mut RngStream::new(seed), CAP).unwrap();
            assert_eq!(res.recommendation.as_slice(), &[4], "{algo:?} seed {seed}");
            assert_eq!(res.pulls.iter().sum::<u64>(), res.tau);
        }
    }
}
