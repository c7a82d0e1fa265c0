//! Constructive existence procedures: the binary-utility setting (feasible
//! matching via course copies, then grade-driven exchanges until envy-free)
//! and the all-positive distinct-preferences setting via a hospitals/
//! residents style deferred acceptance.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::engines::{deferred_acceptance, max_bipartite_matching, PreferenceSystem};
use crate::graph::build_graph;
use crate::instance::{Instance, Matching};
use crate::outcome::{SolverError, SolverOutcome};
use crate::rational::Rational;
use crate::verify::{verify, verify_quick, VerifyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExistenceError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Per-course grade ranks. Rank 1 is the highest grade; among equal grades
/// (possible only at grade 0 under the binary-setting preconditions) ids
/// break ties. `k_i` is the grade at rank `c = sum of capacities`, the
/// weakest grade a fully merit-ordered seating can be forced to admit.
#[derive(Debug, Clone)]
pub struct RankProfile {
    /// `rank[course][ta]` is the 1-based rank of the TA in the course.
    pub rank: Vec<Vec<usize>>,
    pub total_seats: u32,
    pub thresholds: Vec<Rational>,
    pub k_star: Option<Rational>,
}

impl RankProfile {
    pub fn of(instance: &Instance) -> RankProfile {
        let n = instance.n_courses();
        let m = instance.n_tas();
        let total_seats = instance.total_capacity() as u32;
        let mut rank = vec![vec![0usize; m]; n];
        let mut thresholds = Vec::with_capacity(n);
        for c in 0..n {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                instance
                    .grade(b, c)
                    .cmp(&instance.grade(a, c))
                    .then_with(|| instance.ta(a).id.cmp(&instance.ta(b).id))
            });
            for (pos, &t) in order.iter().enumerate() {
                rank[c][t] = pos + 1;
            }
            if m == 0 {
                thresholds.push(Rational::zero());
            } else {
                let at_c = order[(total_seats as usize).saturating_sub(1).min(m - 1)];
                thresholds.push(instance.grade(at_c, c));
            }
        }
        RankProfile {
            rank,
            total_seats,
            k_star: thresholds.iter().copied().reduce(Rational::min),
            thresholds,
        }
    }
}

/// Clause-by-clause report for the binary-utility existence setting.
#[derive(Debug, Clone)]
pub struct BinaryExistenceReport {
    /// The common positive utility value, when utilities are binary.
    pub common_utility: Option<u64>,
    pub binary_utilities: bool,
    pub valuations_equal_grades: bool,
    /// Hall's condition, decided by saturating the course-copy graph.
    pub hall: bool,
    pub grades_distinct: bool,
    pub rank_profile: RankProfile,
}

impl BinaryExistenceReport {
    pub fn passes(&self) -> bool {
        self.binary_utilities && self.valuations_equal_grades && self.hall && self.grades_distinct
    }
}

/// Course-copy adjacency: capacity-many copies per course, each adjacent to
/// the course's positively valued TAs.
fn course_copies(instance: &Instance) -> (Vec<Vec<usize>>, Vec<usize>) {
    let graph = build_graph(instance);
    let mut adjacency = Vec::new();
    let mut copy_course = Vec::new();
    for c in 0..instance.n_courses() {
        for _ in 0..instance.course(c).capacity {
            adjacency.push(graph.course_adj[c].clone());
            copy_course.push(c);
        }
    }
    (adjacency, copy_course)
}

pub fn check_binary_existence(instance: &Instance) -> BinaryExistenceReport {
    let n = instance.n_courses();
    let m = instance.n_tas();

    let positive: BTreeSet<u64> = (0..m)
        .flat_map(|t| (0..n).map(move |c| (t, c)))
        .map(|(t, c)| instance.utility(t, c))
        .filter(|&u| u > 0)
        .collect();
    let binary_utilities = positive.len() <= 1;
    let common_utility = if positive.len() == 1 {
        positive.iter().next().copied()
    } else {
        None
    };

    let valuations_equal_grades = (0..n)
        .all(|c| (0..m).all(|t| Rational::from(instance.valuation(c, t)) == instance.grade(t, c)));

    let (adjacency, _) = course_copies(instance);
    let hall = max_bipartite_matching(&adjacency, m).left_saturated();

    let graph = build_graph(instance);
    let grades_distinct = (0..n).all(|c| {
        let mut seen = BTreeSet::new();
        graph.course_adj[c]
            .iter()
            .all(|&t| seen.insert(instance.grade(t, c)))
    });

    BinaryExistenceReport {
        common_utility,
        binary_utilities,
        valuations_equal_grades,
        hall,
        grades_distinct,
        rank_profile: RankProfile::of(instance),
    }
}

/// Per-course envy witnesses: the TAs outside a course's roster whose grade
/// beats the weakest grade inside. Their total count is the potential; zero
/// certifies envy-freeness under the binary-setting preconditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialState {
    /// Witness TA indices per course, ascending.
    pub witnesses: Vec<Vec<usize>>,
    pub sigma: Vec<u64>,
    pub psi: u64,
}

pub fn potential(instance: &Instance, matching: &Matching) -> Result<PotentialState, VerifyError> {
    if !verify(instance, matching).feasible {
        return Err(VerifyError::InfeasibleMatching);
    }
    let rosters = matching.rosters(instance);
    let mut witnesses = Vec::with_capacity(instance.n_courses());
    for (c, roster) in rosters.iter().enumerate() {
        let weakest = roster
            .iter()
            .map(|&t| instance.grade(t, c))
            .min()
            .expect("feasible roster is non-empty");
        witnesses.push(
            (0..instance.n_tas())
                .filter(|t| !roster.contains(t))
                .filter(|&t| instance.grade(t, c) > weakest)
                .collect::<Vec<usize>>(),
        );
    }
    let sigma: Vec<u64> = witnesses.iter().map(|w| w.len() as u64).collect();
    Ok(PotentialState {
        psi: sigma.iter().sum(),
        witnesses,
        sigma,
    })
}

/// Repairs a feasible matching into an envy-free one by repeatedly swapping
/// an envious unmatched TA for the weakest-graded holder of the envied
/// course. Also returns the potential after each step (strictly
/// decreasing), the first entry being the input's.
pub fn exchange_matching_trace(
    instance: &Instance,
    feasible: &Matching,
) -> Result<(Matching, Vec<u64>), ExistenceError> {
    let report = check_binary_existence(instance);
    if !report.passes() {
        return Err(ExistenceError::PreconditionViolated(
            "binary-utility existence clauses do not all hold".into(),
        ));
    }
    if !verify(instance, feasible).feasible {
        return Err(ExistenceError::Verify(VerifyError::InfeasibleMatching));
    }

    let m = instance.n_tas();
    let mut by_id: Vec<usize> = (0..m).collect();
    by_id.sort_by(|&a, &b| instance.ta(a).id.cmp(&instance.ta(b).id));

    let mut current = feasible.clone();
    let mut trace = vec![potential(instance, &current)?.psi];
    loop {
        // Least (envier id, envied id) pair: an unmatched TA positively
        // valuing a matched TA's course with a strictly higher grade there.
        let mut found = None;
        'outer: for &envier in &by_id {
            if current.course_of(envier).is_some() {
                continue;
            }
            for &envied in &by_id {
                let Some(c) = current.course_of(envied) else {
                    continue;
                };
                if instance.utility(envier, c) > 0
                    && instance.grade(envier, c) > instance.grade(envied, c)
                {
                    found = Some((envier, c));
                    break 'outer;
                }
            }
        }
        let Some((envier, course)) = found else { break };
        let weakest = by_id
            .iter()
            .copied()
            .filter(|&t| current.course_of(t) == Some(course))
            .min_by(|&a, &b| instance.grade(a, course).cmp(&instance.grade(b, course)))
            .expect("feasible roster is non-empty");
        let mut assignment = current.assignment().to_vec();
        assignment[weakest] = None;
        assignment[envier] = Some(course as u32);
        current = Matching::from_assignment(assignment);
        trace.push(potential(instance, &current)?.psi);
    }
    Ok((current, trace))
}

pub fn exchange_matching(
    instance: &Instance,
    feasible: &Matching,
) -> Result<Matching, ExistenceError> {
    exchange_matching_trace(instance, feasible).map(|(matching, _)| matching)
}

/// Binary utilities, valuations equal to grades, Hall's condition and
/// per-course distinct grades guarantee an MEFE matching for every
/// k up to the rank-c grade minimum. Construction: saturate the course
/// copies with a maximum matching, then exchange away all envy.
pub fn solve_existence_binval(instance: &Instance) -> Result<SolverOutcome, SolverError> {
    if instance.n_courses() == 0 {
        return Ok(SolverOutcome::Yes {
            matching: Matching::empty(instance),
            certified: instance.k(),
        });
    }
    let report = check_binary_existence(instance);
    if !report.passes() {
        return Ok(SolverOutcome::not_applicable(
            "binary-utility existence clauses do not all hold",
        ));
    }
    let k_star = report.rank_profile.k_star.expect("courses exist");
    if instance.k() > k_star {
        return Ok(SolverOutcome::not_applicable(format!(
            "threshold {} exceeds the certified bound {}",
            instance.k(),
            k_star
        )));
    }

    let (adjacency, copy_course) = course_copies(instance);
    let max = max_bipartite_matching(&adjacency, instance.n_tas());
    debug_assert!(max.left_saturated(), "Hall holds, so copies saturate");
    let mut assignment = vec![None; instance.n_tas()];
    for (copy, ta) in max.left_to_right.iter().enumerate() {
        if let Some(t) = ta {
            assignment[*t] = Some(copy_course[copy] as u32);
        }
    }
    let feasible = Matching::from_assignment(assignment);
    let matching =
        exchange_matching(instance, &feasible).map_err(|e| SolverError::Engine(e.to_string()))?;
    debug_assert!(verify_quick(instance, matching.assignment()));
    Ok(SolverOutcome::Yes {
        matching,
        certified: k_star,
    })
}

/// All pairs positively valued, distinct utilities per TA and grades per
/// course: residents-proposing deferred acceptance over complete lists
/// always yields an MEFE matching for k up to 1.
pub fn solve_existence_hr(instance: &Instance) -> Result<SolverOutcome, SolverError> {
    let n = instance.n_courses();
    let m = instance.n_tas();
    if instance.k() > Rational::one() {
        return Ok(SolverOutcome::not_applicable(
            "threshold above 1 is not certified by this construction",
        ));
    }
    for c in 0..n {
        for t in 0..m {
            if instance.valuation(c, t) == 0 {
                return Ok(SolverOutcome::not_applicable(
                    "a pair is not positively valued",
                ));
            }
        }
    }
    let profile = crate::polycases::CaseProfile::of(instance);
    if !profile.all_utilities_distinct() {
        return Ok(SolverOutcome::not_applicable(
            "a TA repeats a positive utility",
        ));
    }
    if !profile.all_grades_distinct() {
        return Ok(SolverOutcome::not_applicable(
            "a course repeats a grade among its positively valued TAs",
        ));
    }

    let left: Vec<Vec<Vec<usize>>> = (0..m)
        .map(|t| {
            let mut courses: Vec<usize> = (0..n).collect();
            courses.sort_by_key(|&c| std::cmp::Reverse(instance.utility(t, c)));
            courses.into_iter().map(|c| vec![c]).collect()
        })
        .collect();
    let right: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|c| {
            let mut tas: Vec<usize> = (0..m).collect();
            tas.sort_by_key(|&t| std::cmp::Reverse(instance.grade(t, c)));
            tas.into_iter().map(|t| vec![t]).collect()
        })
        .collect();
    let capacities: Vec<u32> = instance.courses().iter().map(|c| c.capacity).collect();
    let system = PreferenceSystem::new(left, right, capacities)
        .map_err(|e| SolverError::Engine(e.to_string()))?;
    let engine = deferred_acceptance(&system).map_err(|e| SolverError::Engine(e.to_string()))?;
    debug_assert!(engine.right_saturated(&system));
    let matching = Matching::from_assignment(
        engine
            .left_to_right
            .iter()
            .map(|c| c.map(|c| c as u32))
            .collect(),
    );
    debug_assert!(verify_quick(instance, matching.assignment()));
    Ok(SolverOutcome::Yes {
        matching,
        certified: Rational::one(),
    })
}
