//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured evidence (run with `-- --nocapture` to see them).
//!
//! Criteria:
//!  1. ratio bound of the feasibility search against the exact optimum
//!  2. per-guess success at the smallest candidate at or above the optimum
//!  3. matching baseline bound (and exactness on all-small instances)
//!  4. combined bound 17/9 + zeta, plus the analytic grid check
//!  5. limit constant 1 + r at tiny epsilon
//!  6. parameter positivity across the epsilon/zeta grid
//!  7. flow engine versus the exhaustive oracle on random networks
//!  8. instrumented invariant monitors report zero violations
//!  9. termination and wall-time budget at scale
//! 10. byte-identical reports across repeated runs

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use oneps_core::flow::{max_flow, min_cut, Capacity, FlowArc, FlowNetwork};
use oneps_core::generator::{generate, Family, GeneratorConfig};
use oneps_core::instance::{makespan, tau_candidates, Instance};
use oneps_core::numerics::{int, make_params, rat, verify_params, Rational};
use oneps_core::oracle::{brute_force_max_flow, brute_force_opt};
use oneps_core::search::SearchCtx;
use oneps_core::solvers::{
    binary_search_solve, combined_solve, initial_big_assignment, matching_solve, solve_with_tau,
    BigPlacement, TauOutcome,
};

const ZETA_NUM: i64 = 1;
const ZETA_DEN: i64 = 10;

fn zeta() -> Rational {
    rat(ZETA_NUM, ZETA_DEN)
}

/// Deterministic desk-scale corpus: at least 500 instances with
/// |M| <= 4, |J| <= 10, epsilon in {1/4, 1/3, 1/2, 2/3}, all with
/// matchable big jobs (the baseline cannot represent a big job stack).
fn corpus() -> Vec<Arc<Instance>> {
    let eps_grid = [rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3)];
    let shapes: [(usize, usize, usize); 6] = [
        (2, 1, 5),
        (3, 0, 6),
        (3, 2, 6),
        (4, 2, 8),
        (4, 3, 7),
        (4, 1, 9),
    ];
    let families = [
        Family::Uniform { density: 0.5 },
        Family::Uniform { density: 0.9 },
        Family::Clustered { clusters: 2 },
        Family::Tight,
    ];
    let mut out = Vec::new();
    let mut seed = 0u64;
    for round in 0..7u64 {
        for (machines, bigs, smalls) in shapes {
            for eps in &eps_grid {
                for family in &families {
                    seed += 1;
                    let config = GeneratorConfig {
                        machines,
                        big_jobs: bigs,
                        small_jobs: smalls,
                        epsilon: eps.clone(),
                        family: family.clone(),
                        seed: seed * 1000 + round,
                    };
                    let Ok(instance) = generate(&config) else {
                        continue;
                    };
                    let instance = Arc::new(instance);
                    if big_jobs_matchable(&instance) {
                        out.push(instance);
                    }
                }
            }
        }
    }
    assert!(out.len() >= 500, "corpus too small: {}", out.len());
    out
}

fn big_jobs_matchable(instance: &Arc<Instance>) -> bool {
    let params = Arc::new(make_params(instance.epsilon(), &zeta()).unwrap());
    let mut ctx = SearchCtx::default();
    matches!(
        initial_big_assignment(instance, &int(1), &params, &mut ctx),
        Ok(BigPlacement::Placed(_))
    )
}

#[test]
fn criterion_1_ratio_bound() {
    let started = Instant::now();
    // The ratio bound presumes the size normalization (a unit-size job
    // exists, hence OPT >= 1); the guess grid starts at 1 by construction,
    // so all-small instances with tiny optima are out of its scope.
    let corpus: Vec<Arc<Instance>> = corpus()
        .into_iter()
        .filter(|i| !i.big_jobs().is_empty())
        .collect();
    assert!(corpus.len() >= 500, "normalized corpus too small: {}", corpus.len());
    let mut solved = 0usize;
    for (k, instance) in corpus.iter().enumerate() {
        let params = Arc::new(make_params(instance.epsilon(), &zeta()).unwrap());
        let mut ctx = SearchCtx::default();
        let found = binary_search_solve(instance, &params, &mut ctx).unwrap();
        let Some((_tau, schedule)) = found else {
            continue;
        };
        let span = makespan(instance, &schedule).unwrap();
        let opt = brute_force_opt(instance).unwrap().opt_makespan;
        let bound = (int(1) + &params.r) * &opt;
        assert!(
            span <= bound,
            "instance {k}: makespan {span} above (1 + r) * OPT = {bound}"
        );
        solved += 1;
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "ratio-bound sweep took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE criterion 1 (ratio bound): PASS — {solved}/{} schedules within (1 + r) * OPT in {elapsed:.2?}",
        corpus.len()
    );
}

#[test]
fn criterion_2_per_tau_success() {
    let corpus = corpus();
    let mut tested = 0usize;
    for (k, instance) in corpus.iter().enumerate() {
        let opt = brute_force_opt(instance).unwrap().opt_makespan;
        if opt >= int(2) {
            continue;
        }
        let Some(tau) = tau_candidates(instance).into_iter().find(|t| *t >= opt) else {
            continue;
        };
        let params = Arc::new(make_params(instance.epsilon(), &zeta()).unwrap());
        let mut ctx = SearchCtx::default();
        match solve_with_tau(instance, &tau, &params, &mut ctx).unwrap() {
            TauOutcome::Schedule(s) => {
                let span = makespan(instance, &s).unwrap();
                assert!(
                    span <= &tau + &params.r,
                    "instance {k}: makespan {span} above tau + r"
                );
            }
            TauOutcome::TauTooSmall(sig) => {
                panic!("instance {k}: failed at tau {tau} >= OPT {opt}: {sig}");
            }
        }
        tested += 1;
    }
    println!(
        "ACCEPTANCE criterion 2 (per-tau success): PASS — {tested} instances with OPT < 2 all solved at the smallest candidate"
    );
}

#[test]
fn criterion_3_matching_bound() {
    let corpus = corpus();
    let mut with_bigs = 0usize;
    let mut all_small = 0usize;
    for (k, instance) in corpus.iter().enumerate() {
        let report = matching_solve(instance).unwrap();
        let opt = brute_force_opt(instance).unwrap().opt_makespan;
        if instance.big_jobs().is_empty() {
            assert_eq!(
                report.makespan, opt,
                "instance {k}: all-small matching must equal OPT"
            );
            all_small += 1;
        } else {
            let bound = (int(2) - instance.epsilon()) * &opt;
            assert!(
                report.makespan <= bound,
                "instance {k}: matching {} above (2 - eps) * OPT = {bound}",
                report.makespan
            );
            with_bigs += 1;
        }
    }
    println!(
        "ACCEPTANCE criterion 3 (matching bound): PASS — {with_bigs} big-job instances within (2 - eps) * OPT, {all_small} all-small instances exactly optimal"
    );
}

#[test]
fn criterion_4_combined_bound() {
    let corpus = corpus();
    let z = zeta();
    let bound_factor = rat(17, 9) + &z;
    for (k, instance) in corpus.iter().enumerate() {
        let (report, _) = combined_solve(instance, &z, false).unwrap();
        let opt = brute_force_opt(instance).unwrap().opt_makespan;
        if opt == int(0) {
            assert_eq!(report.makespan, int(0));
            continue;
        }
        let bound = &bound_factor * &opt;
        assert!(
            report.makespan <= bound,
            "instance {k}: combined {} above (17/9 + zeta) * OPT = {bound}",
            report.makespan
        );
    }
    // Analytic check: the largest of min{1 + r(eps), 2 - eps} over the
    // percent grid sits within zeta/2 of 17/9 + zeta.
    let mut max_of_min = int(0);
    for k in 1..100 {
        let eps = rat(k, 100);
        let params = make_params(&eps, &z).unwrap();
        let value = (int(1) + &params.r).min(int(2) - &eps);
        if value > max_of_min {
            max_of_min = value;
        }
    }
    let target = rat(17, 9) + &z;
    let gap = if max_of_min > target {
        &max_of_min - &target
    } else {
        &target - &max_of_min
    };
    assert!(
        gap <= &z / int(2),
        "guarantee profile peak {max_of_min} strays from {target}"
    );
    println!(
        "ACCEPTANCE criterion 4 (combined bound): PASS — {} instances within (17/9 + zeta) * OPT; profile peak {} within zeta/2 of 17/9 + zeta",
        corpus.len(),
        max_of_min
    );
}

#[test]
fn criterion_5_limit_constant() {
    let params = make_params(&rat(1, 1_000_000), &rat(1, 10_000)).unwrap();
    let one_plus_r = int(1) + &params.r;
    let low = rat(18_660_254, 10_000_000);
    let high = &low + rat(2, 10_000);
    assert!(one_plus_r >= low && one_plus_r <= high);
    println!(
        "ACCEPTANCE criterion 5 (limit constant): PASS — 1 + r(1e-6, 1e-4) = {one_plus_r} in [1.8660254, 1.8660254 + 2e-4]"
    );
}

#[test]
fn criterion_6_parameter_positivity() {
    let started = Instant::now();
    let mut checked = 0usize;
    for k in 1..=99 {
        for z in [rat(1, 100), rat(1, 10), int(1)] {
            let p = make_params(&rat(k, 100), &z).unwrap();
            assert!(verify_params(&p), "positivity failed at eps {k}/100, zeta {z}");
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "grid took {elapsed:?}");
    println!(
        "ACCEPTANCE criterion 6 (parameter positivity): PASS — {checked} grid points verified in {elapsed:.2?}"
    );
}

/// Small deterministic generator (SplitMix64) so the 1000 networks are
/// reproducible without extra dependencies.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

#[test]
fn criterion_7_flow_oracle_equivalence() {
    let mut rng = SplitMix64(0x5eed);
    let mut checked = 0usize;
    while checked < 1000 {
        let nodes = 3 + rng.below(6) as usize; // 3..=8
        let arc_count = 2 + rng.below(9) as usize; // 2..=10
        let arcs: Vec<FlowArc> = (0..arc_count)
            .map(|_| {
                let from = rng.below(nodes as u64) as usize;
                let mut to = rng.below(nodes as u64) as usize;
                if to == from {
                    to = (to + 1) % nodes;
                }
                let cap = rng.below(5);
                FlowArc {
                    from,
                    to,
                    capacity: if cap == 4 {
                        Capacity::Unbounded
                    } else {
                        Capacity::Finite(cap)
                    },
                }
            })
            .collect();
        // At least one source and one sink, never overlapping.
        let source = rng.below(nodes as u64) as usize;
        let mut sinks = vec![(source + 1 + rng.below(nodes as u64 - 1) as usize) % nodes];
        if rng.below(2) == 1 {
            let extra = rng.below(nodes as u64) as usize;
            if extra != source && !sinks.contains(&extra) {
                sinks.push(extra);
            }
        }
        let caps: BTreeMap<usize, u64> = sinks.iter().map(|t| (*t, rng.below(4))).collect();
        let net = FlowNetwork::new(nodes, arcs, vec![source], sinks, caps).unwrap();
        let f = max_flow(&net).unwrap();
        let oracle = brute_force_max_flow(&net).unwrap();
        assert_eq!(f.value, oracle, "network {checked}: flow/oracle mismatch");
        // min_cut verifies the crossing capacity equals the value.
        min_cut(&net, &f).unwrap();
        checked += 1;
    }
    println!(
        "ACCEPTANCE criterion 7 (flow oracle equivalence): PASS — {checked} random networks, zero mismatches"
    );
}

#[test]
fn criterion_8_invariant_monitors() {
    let corpus = corpus();
    let mut runs = 0usize;
    for (k, instance) in corpus.iter().enumerate() {
        let opt = brute_force_opt(instance).unwrap().opt_makespan;
        if opt >= int(2) {
            continue;
        }
        let Some(tau) = tau_candidates(instance).into_iter().find(|t| *t >= opt) else {
            continue;
        };
        let params = Arc::new(make_params(instance.epsilon(), &zeta()).unwrap());
        let mut ctx = SearchCtx::instrumented();
        let outcome = solve_with_tau(instance, &tau, &params, &mut ctx).unwrap();
        assert!(
            ctx.violations.is_empty(),
            "instance {k}: monitor violations at tau >= OPT: {:?}",
            ctx.violations
        );
        assert!(
            matches!(outcome, TauOutcome::Schedule(_)),
            "instance {k}: instrumented run failed at tau >= OPT"
        );
        runs += 1;
    }
    println!(
        "ACCEPTANCE criterion 8 (invariant monitors): PASS — {runs} instrumented runs, zero violations"
    );
}

#[test]
fn criterion_9_scale_termination() {
    let mut worst = Duration::ZERO;
    for seed in 0..20u64 {
        let family = match seed % 3 {
            0 => Family::Uniform { density: 0.2 },
            1 => Family::Clustered { clusters: 5 },
            _ => Family::Tight,
        };
        let instance = Arc::new(
            generate(&GeneratorConfig {
                machines: 50,
                big_jobs: 25,
                small_jobs: 475,
                epsilon: rat(1, 3),
                family,
                seed: 9_000 + seed,
            })
            .unwrap(),
        );
        let started = Instant::now();
        let (report, _) = combined_solve(&instance, &zeta(), false).unwrap();
        let elapsed = started.elapsed();
        assert!(
            elapsed < Duration::from_secs(30),
            "seed {seed}: took {elapsed:?}"
        );
        worst = worst.max(elapsed);
        // The produced schedule must validate.
        let span = makespan(&instance, &report.schedule).unwrap();
        assert_eq!(span, report.makespan);
    }
    println!(
        "ACCEPTANCE criterion 9 (scale/termination): PASS — 20 instances at 50x500, worst run {worst:.2?}"
    );
}

#[test]
fn criterion_10_determinism() {
    use std::process::Command;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("det.json");
    let gen = Command::new(env!("CARGO_BIN_EXE_oneps"))
        .args([
            "gen", "--machines", "4", "--big", "2", "--small", "8", "--epsilon", "1/3",
            "--family", "clustered", "--clusters", "2", "--seed", "77", "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(gen.status.success());
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_oneps"))
            .args([
                "solve",
                "--instance",
                path.to_str().unwrap(),
                "--method",
                "combined",
                "--zeta",
                "1/10",
                "--seed",
                "7",
                "--json",
            ])
            .env_remove("ONEPS_ZETA")
            .output()
            .unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first.status.code(), second.status.code());
    assert_eq!(first.stdout, second.stdout, "reports must be byte-identical");
    println!(
        "ACCEPTANCE criterion 10 (determinism): PASS — two runs produced byte-identical {}-byte reports",
        first.stdout.len()
    );
}
