//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use psi_core::ape::run;
use psi_core::baselines::{bai_run, BaiAlgorithm};
use psi_core::confidence::{beta, theoretical_k1};
use psi_core::harness::{
    aggregate, replicate, AggregateRow, AlgorithmSpec, ExperimentConfig, InstanceSource, K1Choice,
};
use psi_core::model::gen_lower_bound_instance;
use psi_core::pareto::{gaps, pareto_set, sample_complexity_bound, verify_recommendation};
use psi_core::{
    ArmSet, BanditInstance, ConfidenceScheme, EmpiricalState, Family, MeanMatrix, RngStream,
    StoppingRule, Trigger,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn se(row: &AggregateRow) -> f64 {
    row.std_tau / (row.reps as f64).sqrt()
}

fn rows(m: &MeanMatrix) -> Vec<Vec<f64>> {
    m.rows().map(<[f64]>::to_vec).collect()
}

// ---- independent brute-force oracles ----

fn small_m(r: &[Vec<f64>], i: usize, j: usize) -> f64 {
    (0..r[i].len())
        .map(|d| r[j][d] - r[i][d])
        .fold(f64::INFINITY, f64::min)
}

fn big_m(r: &[Vec<f64>], i: usize, j: usize) -> f64 {
    (0..r[i].len())
        .map(|d| r[i][d] - r[j][d])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn brute_pareto(r: &[Vec<f64>], eps: f64) -> Vec<usize> {
    let k = r.len();
    (0..k)
        .filter(|&i| {
            !(0..k).any(|j| j != i && (0..r[i].len()).all(|d| (r[i][d] - r[j][d]) + eps < 0.0))
        })
        .collect()
}

fn brute_gaps(r: &[Vec<f64>]) -> Vec<f64> {
    let k = r.len();
    let star = brute_pareto(r, 0.0);
    let mut gap = vec![0.0; k];
    for a in (0..k).filter(|a| !star.contains(a)) {
        gap[a] = star
            .iter()
            .map(|&j| small_m(r, a, j))
            .fold(f64::NEG_INFINITY, f64::max);
    }
    if star.len() == 1 {
        let i = star[0];
        gap[i] = (0..k)
            .filter(|&j| j != i)
            .map(|j| gap[j])
            .fold(f64::INFINITY, f64::min);
    } else {
        let base = gap.clone();
        for &i in &star {
            let mut plus = f64::INFINITY;
            for &j in star.iter().filter(|&&j| j != i) {
                plus = plus.min(big_m(r, i, j).min(big_m(r, j, i)));
            }
            let mut minus = f64::INFINITY;
            for j in (0..k).filter(|j| !star.contains(j)) {
                minus = minus.min(big_m(r, j, i).max(0.0) + base[j]);
            }
            gap[i] = plus.min(minus);
        }
    }
    gap
}

fn brute_verify(r: &[Vec<f64>], rec: &[usize], rule: &StoppingRule) -> bool {
    let exact = brute_pareto(r, 0.0);
    let relaxed = brute_pareto(r, rule.eps1());
    let inside = |s: &[usize], t: &[usize]| s.iter().all(|x| t.contains(x));
    let psi = inside(&exact, rec) && inside(rec, &relaxed);
    match *rule {
        StoppingRule::EpsPsi { .. } => psi,
        StoppingRule::EpsCover { eps2, .. } => {
            inside(rec, &relaxed)
                && exact
                    .iter()
                    .filter(|i| !rec.contains(i))
                    .all(|&i| rec.iter().any(|&j| small_m(r, i, j) + eps2 > 0.0))
        }
        StoppingRule::KRelaxed { k, .. } => {
            if rec.len() == k {
                inside(rec, &relaxed)
            } else {
                rec.len() < k && psi
            }
        }
    }
}

// ---- criteria ----

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(2024);
    let mut mismatches = Vec::new();
    for n in 0..1000 {
        let k = 2 + (rng.uniform() * 11.0) as usize;
        let d = 1 + (rng.uniform() * 5.0) as usize;
        // half the instances on a coarse grid so ties and duplicate rows occur
        let coarse = n % 2 == 0;
        let r: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if coarse {
                            (rng.uniform() * 6.0).floor() / 5.0
                        } else {
                            rng.uniform()
                        }
                    })
                    .collect()
            })
            .collect();
        let m = MeanMatrix::new(r.clone()).unwrap();
        for eps in [0.0, 0.1] {
            if pareto_set(&m, eps).unwrap().as_slice() != brute_pareto(&r, eps) {
                mismatches.push(format!("instance {n}: pareto set eps={eps}"));
            }
        }
        let rep = gaps(&m).unwrap();
        let want = brute_gaps(&r);
        if rep.delta.iter().zip(&want).any(|(a, b)| a != b) {
            mismatches.push(format!("instance {n}: gaps"));
        }
        let star = brute_pareto(&r, 0.0);
        for i in 0..k {
            let omega = (0..k)
                .filter(|&j| j != i)
                .map(|j| big_m(&r, i, j))
                .fold(f64::INFINITY, f64::min);
            if star.contains(&i) {
                if rep.delta[i].is_nan() || rep.delta[i] > omega {
                    mismatches.push(format!("instance {n}: optimal arm {i} gap exceeds omega"));
                }
            } else {
                let over_all = (0..k)
                    .filter(|&j| j != i)
                    .map(|j| small_m(&r, i, j))
                    .fold(f64::NEG_INFINITY, f64::max);
                if !(rep.delta[i] == over_all && over_all > 0.0) {
                    mismatches.push(format!(
                        "instance {n}: dominated arm {i} has no dominating optimal arm"
                    ));
                }
            }
        }
        for _ in 0..4 {
            let rec: Vec<usize> = (0..k).filter(|_| rng.uniform() < 0.5).collect();
            let set = ArmSet::from_indices(rec.clone(), k).unwrap();
            let kk = 1 + (rng.uniform() * k as f64) as usize;
            for rule in [
                StoppingRule::EpsPsi { eps1: 0.1 },
                StoppingRule::EpsCover {
                    eps1: 0.0,
                    eps2: 0.2,
                },
                StoppingRule::KRelaxed { eps1: 0.05, k: kk },
            ] {
                if verify_recommendation(&m, &set, &rule).unwrap() != brute_verify(&r, &rec, &rule)
                {
                    mismatches.push(format!("instance {n}: verify {rule:?} on {rec:?}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        mismatches.is_empty() && secs < 60.0,
        match mismatches.first() {
            Some(first) => format!(
                "1000 instances, {} mismatches (first: {first}), {secs:.2}s",
                mismatches.len()
            ),
            None => format!("1000 instances, 0 mismatches, {secs:.2}s"),
        },
    )
}

fn lower_bound_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for p in 3..=6usize {
        for omega in [0.05, 0.1, 0.5] {
            let inst = gen_lower_bound_instance(p, omega, &[0.0, 0.0], 2).unwrap();
            let m = inst.means();
            let r = rows(m);
            let rel = |got: f64, want: f64| (got - want).abs() / want.abs();
            for i in 1..=p.saturating_sub(3) {
                for j in (1..=p - 3).filter(|&j| j != i) {
                    worst = worst.max(rel(
                        big_m(&r, i - 1, j - 1),
                        2.0 * omega * i.abs_diff(j) as f64,
                    ));
                    cases += 1;
                }
            }
            let rep = gaps(m).unwrap();
            worst = worst.max(rel(rep.omega_k(p).unwrap(), omega));
            worst = worst.max(rel(rep.omega_k(p - 1).unwrap(), omega));
            worst = worst.max(rel(rep.omega_k(p - 2).unwrap(), 2.0 * omega));
            cases += 3;
        }
    }
    check(
        worst <= 1e-12,
        format!("{cases} identities, worst relative error {worst:.2e}"),
    )
}

fn covboost_correctness() -> Outcome {
    let cfg = ExperimentConfig {
        instance: InstanceSource::CovBoost,
        k: Some(20),
        k1: K1Choice::Theoretical,
        delta: 0.1,
        reps: 50,
        round_cap: 10_000_000,
        ..ExperimentConfig::default()
    };
    let recs = replicate(&cfg).map_err(|e| e.to_string())?;
    let row = &aggregate(&recs).rows[0];
    check(
        row.err_rate <= 0.1,
        format!(
            "error rate {} over {} runs ({} capped), mean tau {:.0}",
            row.err_rate, row.reps, row.capped, row.mean_tau
        ),
    )
}

fn random_bernoulli_rows() -> Result<(Vec<AggregateRow>, AggregateRow), String> {
    let mut cfg = ExperimentConfig {
        instance: "gen:bernoulli:K=5,D=8".parse().unwrap(),
        algorithms: vec![AlgorithmSpec::Ape],
        eps1: 0.005,
        delta: 0.1,
        k1: K1Choice::Value(1.0),
        reps: 200,
        fresh_instance_per_rep: true,
        ..ExperimentConfig::default()
    };
    let mut ape = Vec::new();
    for k in 1..=5 {
        cfg.k = Some(k);
        ape.push(aggregate(&replicate(&cfg).map_err(|e| e.to_string())?).rows[0].clone());
    }
    cfg.algorithms = vec![AlgorithmSpec::PsiUnifElim];
    cfg.k = Some(5);
    let elim = aggregate(&replicate(&cfg).map_err(|e| e.to_string())?).rows[0].clone();
    Ok((ape, elim))
}

fn ape_beats_elimination(ape: &[AggregateRow], elim: &AggregateRow) -> Outcome {
    let ratio = ape[4].mean_tau / elim.mean_tau;
    check(
        ratio <= 0.95,
        format!(
            "mean tau APE {:.0} vs PSI-Unif-Elim {:.0}, ratio {ratio:.3} (bar 0.95)",
            ape[4].mean_tau, elim.mean_tau
        ),
    )
}

fn k_monotonicity(ape: &[AggregateRow]) -> Outcome {
    let means: Vec<String> = ape.iter().map(|r| format!("{:.0}", r.mean_tau)).collect();
    let monotone = ape.windows(2).all(|w| {
        let slack = 2.0 * (se(&w[0]).powi(2) + se(&w[1]).powi(2)).sqrt();
        w[1].mean_tau + slack >= w[0].mean_tau
    });
    let ratio = ape[0].mean_tau / ape[4].mean_tau;
    check(
        monotone && ratio < 0.1,
        format!(
            "mean tau k=1..5 [{}], tau(1)/tau(5) {ratio:.4}",
            means.join(", ")
        ),
    )
}

fn cover_monotonicity() -> Outcome {
    let means = MeanMatrix::new(vec![
        vec![0.5, 0.85],
        vec![0.55, 0.75],
        vec![0.6, 0.65],
        vec![0.3, 0.5],
        vec![0.45, 0.25],
    ])
    .unwrap();
    let inst = BanditInstance::new(means.clone(), Family::BernoulliIndependent).unwrap();
    let scheme = ConfidenceScheme::pairwise(0.01, 1.0, 0.5).unwrap();
    let mut stats = Vec::new();
    let mut failures = 0;
    for eps2 in [0.0, 0.06, 0.12, 0.18, 0.24, 0.3] {
        let rule = StoppingRule::EpsCover { eps1: 0.0, eps2 };
        let mut taus = Vec::new();
        for seed in 0..200 {
            let res = run(&inst, &scheme, &rule, &mut RngStream::new(seed), 10_000_000)
                .map_err(|e| e.to_string())?;
            if res.trigger == Trigger::RoundCap
                || !verify_recommendation(&means, &res.recommendation, &rule).unwrap()
            {
                failures += 1;
            }
            taus.push(res.tau as f64);
        }
        let (mean, _, std) = psi_core::harness::summarize(&taus);
        stats.push((mean, std / (taus.len() as f64).sqrt()));
    }
    let monotone = stats
        .windows(2)
        .all(|w| w[1].0 <= w[0].0 + 2.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt());
    let shown: Vec<String> = stats.iter().map(|s| format!("{:.0}", s.0)).collect();
    check(
        monotone && failures == 0,
        format!(
            "mean tau over eps2 grid [{}], {failures} cover-oracle failures",
            shown.join(", ")
        ),
    )
}

fn bound_holds() -> Outcome {
    let means = MeanMatrix::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.6, 0.6],
        vec![0.0, 0.0],
    ])
    .unwrap();
    let inst = BanditInstance::gaussian_unit(means.clone()).unwrap();
    let scheme = ConfidenceScheme::pairwise(0.1, theoretical_k1(4, 2), 1.0).unwrap();
    let rule = StoppingRule::KRelaxed { eps1: 0.0, k: 4 };
    let bound = sample_complexity_bound(&means, 0.1, 0.0, Some(4)).map_err(|e| e.to_string())?;
    let mut within = 0;
    let mut worst = 0;
    for seed in 0..500 {
        let res = run(&inst, &scheme, &rule, &mut RngStream::new(seed), 10_000_000)
            .map_err(|e| e.to_string())?;
        worst = worst.max(res.tau);
        if res.trigger != Trigger::RoundCap && res.tau as f64 <= bound {
            within += 1;
        }
    }
    let frac = within as f64 / 500.0;
    check(
        frac >= 0.9,
        format!("{within}/500 runs within bound {bound:.0} (max tau {worst})"),
    )
}

fn best_arm_error_rates() -> Outcome {
    let mu = [0.25, 0.16, 0.87, 0.22, 0.98];
    let means = MeanMatrix::new(mu.iter().map(|&v| vec![v]).collect()).unwrap();
    let inst = BanditInstance::new(means, Family::BernoulliIndependent).unwrap();
    let delta = 0.01;
    let pairwise = ConfidenceScheme::pairwise(delta, theoretical_k1(5, 1), 0.5).unwrap();
    let per_arm = ConfidenceScheme::per_arm(delta, 0.5, 5, 1).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["ape", "lucb", "ugapec", "lucbpp"] {
        let mut wrong = 0;
        for seed in 0..200 {
            let mut rng = RngStream::new(seed);
            let res = match name {
                "ape" => run(
                    &inst,
                    &pairwise,
                    &StoppingRule::KRelaxed { eps1: 0.0, k: 1 },
                    &mut rng,
                    10_000_000,
                ),
                "lucb" => bai_run(&inst, BaiAlgorithm::Lucb, &per_arm, &mut rng, 10_000_000),
                "ugapec" => bai_run(&inst, BaiAlgorithm::UGapEc, &per_arm, &mut rng, 10_000_000),
                _ => bai_run(&inst, BaiAlgorithm::LucbPp, &per_arm, &mut rng, 10_000_000),
            }
            .map_err(|e| e.to_string())?;
            if !res.is_correct(&inst).unwrap() || res.recommendation.as_slice() != [4] {
                wrong += 1;
            }
        }
        let rate = wrong as f64 / 200.0;
        ok &= rate <= delta;
        lines.push(format!("{name} {rate}"));
    }
    check(
        ok,
        format!("error rates over 200 seeds: {}", lines.join(", ")),
    )
}

fn coverage() -> Outcome {
    let mu = [[0.0, 0.3], [0.5, -0.2]];
    let inst = BanditInstance::gaussian_unit(
        MeanMatrix::new(mu.iter().map(|r| r.to_vec()).collect()).unwrap(),
    )
    .unwrap();
    let delta = 0.1;
    let scheme = ConfidenceScheme::pairwise(delta, theoretical_k1(2, 2), 1.0).unwrap();
    let runs = 1000;
    let horizon = 10_000u64;
    let mut violated = 0;
    let mut obs = [0.0; 2];
    for seed in 0..runs {
        let mut rng = RngStream::new(seed);
        let mut state = EmpiricalState::new(2, 2);
        let mut hit = false;
        for t in 0..horizon {
            let arm = (t % 2) as usize;
            inst.sample_into(arm, &mut rng, &mut obs);
            state.update(arm, &obs).unwrap();
            if t == 0 {
                continue;
            }
            let b = beta(&scheme, &state, 0, 1).unwrap();
            let (m0, m1) = (state.mean(0), state.mean(1));
            if (0..2).any(|d| ((m0[d] - m1[d]) - (mu[0][d] - mu[1][d])).abs() > b) {
                hit = true;
                break;
            }
        }
        violated += hit as u32;
    }
    let rate = violated as f64 / runs as f64;
    let se = (rate * (1.0 - rate) / runs as f64).sqrt();
    check(
        rate <= delta + 3.0 * se,
        format!("violation rate {rate} over {runs} runs to horizon {horizon} (delta {delta})"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{n}] {name}: {detail}");
    };

    report(1, "oracle equivalence", oracle_equivalence());
    report(
        2,
        "lower-bound family closed forms",
        lower_bound_closed_forms(),
    );
    report(3, "delta-correctness on COV-BOOST", covboost_correctness());
    match random_bernoulli_rows() {
        Ok((ape, elim)) => {
            report(
                4,
                "APE vs PSI-Unif-Elim on random Bernoulli",
                ape_beats_elimination(&ape, &elim),
            );
            report(5, "k-monotonicity", k_monotonicity(&ape));
        }
        Err(e) => {
            report(
                4,
                "APE vs PSI-Unif-Elim on random Bernoulli",
                Err(e.clone()),
            );
            report(5, "k-monotonicity", Err(e));
        }
    }
    report(6, "eps2-monotonicity", cover_monotonicity());
    report(7, "sample complexity bound", bound_holds());
    report(8, "best-arm error rates", best_arm_error_rates());
    report(9, "confidence bonus coverage", coverage());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
