//! Development-time stress sweep at larger bounds than the acceptance
//! suite; slow, so ignored by default.

use mefe::instance::Instance;
use mefe::oracle::solve_bruteforce;
use mefe::outcome::{SolveOpts, SolverOutcome};
use mefe::paramsolvers::{solve_approx, solve_fpt_n};
use mefe::polycases::{solve_capacity1, solve_degcap_le1, solve_two_valuation};
use mefe::rational::Rational;
use mefe::reductions::{random_instance, RandomProfile, Structure, TiePolicy};
use mefe::verify::verify;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn sweep(
    name: &str,
    count: usize,
    master: u64,
    structure: Structure,
    tie: TiePolicy,
    run: impl Fn(&Instance, &SolveOpts) -> Result<SolverOutcome, mefe::SolverError>,
) {
    let mut rng = StdRng::seed_from_u64(master);
    let opts = SolveOpts::default();
    let mut yes = 0usize;
    let mut na = 0usize;
    for i in 0..count {
        let n = 1 + (i % 4);
        let m = n + rng.gen_range(0..=(7 - n));
        let inst = random_instance(
            rng.gen(),
            &RandomProfile {
                n,
                m,
                cap_max: 3,
                val_max: 5,
                tie_policy: tie,
                structure,
            },
        )
        .expect("profile satisfiable");
        let outcome = run(&inst, &opts).unwrap();
        if outcome.is_not_applicable() {
            na += 1;
            continue;
        }
        let oracle = solve_bruteforce(&inst).unwrap();
        assert_eq!(
            outcome.is_yes(),
            oracle.is_yes(),
            "{name} mismatch on instance {i}:\n{}",
            inst.to_json()
        );
        if let SolverOutcome::Yes { matching, .. } = &outcome {
            assert!(verify(&inst, matching).is_mefe);
            yes += 1;
        }
    }
    println!("{name}: {count} instances, {yes} yes, {na} skipped (preconditions)");
}

#[test]
#[ignore]
fn stress_seat_solvers() {
    sweep(
        "twoval",
        30_000,
        0xD1,
        Structure::Twoval,
        TiePolicy::Free,
        solve_two_valuation,
    );
    sweep(
        "fptn",
        30_000,
        0xD2,
        Structure::None,
        TiePolicy::DistinctGradesUtils,
        solve_fpt_n,
    );
    sweep(
        "cap1",
        30_000,
        0xD3,
        Structure::Cap1,
        TiePolicy::Free,
        solve_capacity1,
    );
    sweep(
        "degcap",
        30_000,
        0xD4,
        Structure::Degcap1,
        TiePolicy::Free,
        solve_degcap_le1,
    );
}

#[test]
#[ignore]
fn stress_approx_on_yes_instances() {
    let eps = Rational::new(1, 3).unwrap();
    let mut rng = StdRng::seed_from_u64(0xD5);
    let mut done = 0usize;
    while done < 5_000 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(n..=7);
        let inst = random_instance(
            rng.gen(),
            &RandomProfile {
                n,
                m,
                cap_max: 3,
                val_max: 16,
                tie_policy: TiePolicy::DistinctGradesUtils,
                structure: Structure::None,
            },
        )
        .unwrap();
        if !solve_bruteforce(&inst).unwrap().is_yes() {
            continue;
        }
        let outcome = solve_approx(&inst, eps, &SolveOpts::default()).unwrap();
        let SolverOutcome::Yes { matching, .. } = outcome else {
            panic!(
                "approx returned {outcome:?} on yes-instance:\n{}",
                inst.to_json()
            );
        };
        let relaxed = (Rational::one() - eps) * inst.k();
        let report = verify(&inst, &matching);
        assert!(report.feasible && report.envy_pairs.is_empty());
        assert!(report.avg_utils.values().all(|a| *a >= relaxed));
        done += 1;
    }
    println!("approx: 5000 yes-instances, all guarantees met");
}

/// Builds a connected bipartite structure with unit degree-capacity slack:
/// a random tree over (courses + TAs) plus optionally one extra edge to
/// close a single cycle, then random values. Exercises the tree and
/// unique-cycle case splits far more often than uniform sampling does.
fn structured_slack1_instance(rng: &mut StdRng) -> Option<Instance> {
    let n = rng.gen_range(1..=3usize);
    let m = rng.gen_range(n + 1..=7usize);
    // Random bipartite tree: attach each vertex after the first to a random
    // earlier vertex of the other side.
    let mut course_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let order: Vec<bool> = {
        // Interleave course and TA insertions, course 0 first.
        let mut kinds = vec![true]; // true = course
        kinds.extend(std::iter::repeat(true).take(n - 1));
        kinds.extend(std::iter::repeat(false).take(m));
        kinds
    };
    let mut placed_courses = 0usize;
    let mut placed_tas = 0usize;
    for &is_course in &order {
        if is_course {
            if placed_courses > 0 && placed_tas > 0 {
                let t = rng.gen_range(0..placed_tas);
                course_adj[placed_courses].push(t);
            }
            placed_courses += 1;
        } else {
            if placed_courses > 0 {
                let c = rng.gen_range(0..placed_courses);
                course_adj[c].push(placed_tas);
            }
            placed_tas += 1;
        }
    }
    // Close one cycle half the time.
    if rng.gen_bool(0.5) {
        let c = rng.gen_range(0..n);
        let candidates: Vec<usize> =
            (0..m).filter(|t| !course_adj[c].contains(t)).collect();
        if let Some(&t) = candidates.get(rng.gen_range(0..candidates.len().max(1)).min(candidates.len().saturating_sub(1))) {
            course_adj[c].push(t);
        }
    }
    // Capacity = degree - 1 (tree/cycle case) or degree (forced case),
    // mixed per course.
    let caps: Vec<u32> = (0..n)
        .map(|c| {
            let d = course_adj[c].len() as u32;
            if d == 0 {
                return 0;
            }
            if d > 1 && rng.gen_bool(0.7) {
                d - 1
            } else {
                d
            }
        })
        .collect();
    if caps.iter().any(|&c| c == 0) {
        return None;
    }
    if caps.iter().map(|&c| c as u64).sum::<u64>() > m as u64 {
        return None;
    }

    let courses: Vec<mefe::CourseSpec> = (0..n)
        .map(|c| mefe::CourseSpec {
            id: format!("c{c}"),
            capacity: caps[c],
            valuations: course_adj[c]
                .iter()
                .map(|&t| (format!("t{t}"), rng.gen_range(1..=4u64)))
                .collect(),
        })
        .collect();
    let tas: Vec<mefe::TaSpec> = (0..m)
        .map(|t| {
            let mine: Vec<usize> = (0..n)
                .filter(|&c| course_adj[c].contains(&t))
                .collect();
            mefe::TaSpec {
                id: format!("t{t}"),
                utilities: mine
                    .iter()
                    .map(|&c| (format!("c{c}"), rng.gen_range(1..=4)))
                    .collect(),
                grades: mine
                    .iter()
                    .map(|&c| {
                        (
                            format!("c{c}"),
                            Rational::new(rng.gen_range(0..=8), 2).unwrap(),
                        )
                    })
                    .collect(),
            }
        })
        .collect();
    let k = Rational::new(rng.gen_range(0..=8), 2).unwrap();
    Instance::new(k, courses, tas).ok()
}

#[test]
#[ignore]
fn stress_degcap_structured_components() {
    let mut rng = StdRng::seed_from_u64(0xD6);
    let opts = SolveOpts::default();
    let mut done = 0usize;
    let mut yes = 0usize;
    while done < 30_000 {
        let Some(inst) = structured_slack1_instance(&mut rng) else {
            continue;
        };
        let outcome = solve_degcap_le1(&inst, &opts).unwrap();
        if outcome.is_not_applicable() {
            continue;
        }
        let oracle = solve_bruteforce(&inst).unwrap();
        assert_eq!(
            outcome.is_yes(),
            oracle.is_yes(),
            "degcap mismatch:\n{}",
            inst.to_json()
        );
        if let SolverOutcome::Yes { matching, .. } = &outcome {
            assert!(verify(&inst, matching).is_mefe);
            yes += 1;
        }
        done += 1;
    }
    println!("degcap structured: 30000 instances, {yes} yes");
}
