//! Polynomial special-case solvers and the dispatcher.
//!
//! Each solver first checks its structural preconditions and answers
//! `NotApplicable` when they fail, so the dispatcher can walk the registry
//! in a fixed order and take the first applicable verdict.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::engines::{strongly_stable_max_weight_with, PreferenceSystem, StronglyStableOutcome};
use crate::graph::{build_graph, BipartiteGraph, Component};
use crate::instance::{Instance, Matching};
use crate::oracle;
use crate::outcome::{SolveOpts, SolverError, SolverOutcome};
use crate::paramsolvers;
use crate::rational::Rational;
use crate::seatmatch::{solve_seats, SeatGroup};
use crate::verify::verify_quick;

/// Structural facts a dispatcher needs: degrees, slack, valuation types and
/// tie flags, all derived deterministically from the instance.
#[derive(Debug, Clone)]
pub struct CaseProfile {
    pub course_degree: Vec<usize>,
    /// d(x) - c_x per course.
    pub course_slack: Vec<i64>,
    pub max_ta_degree: usize,
    /// Number of distinct positive valuations per course.
    pub valuation_types: Vec<usize>,
    /// Per course: positively valuing TAs all have distinct grades.
    pub grades_distinct: Vec<bool>,
    /// Per TA: positive utilities are pairwise distinct.
    pub utilities_distinct: Vec<bool>,
    pub n_courses: usize,
    pub max_capacity: u32,
}

impl CaseProfile {
    pub fn of(instance: &Instance) -> Self {
        let graph = build_graph(instance);
        Self::with_graph(instance, &graph)
    }

    fn with_graph(instance: &Instance, graph: &BipartiteGraph) -> Self {
        let n = instance.n_courses();
        let m = instance.n_tas();
        let course_degree: Vec<usize> = (0..n).map(|c| graph.course_degree(c)).collect();
        let course_slack = (0..n)
            .map(|c| course_degree[c] as i64 - instance.course(c).capacity as i64)
            .collect();
        let valuation_types = (0..n)
            .map(|c| {
                let distinct: BTreeSet<u64> = (0..m)
                    .map(|t| instance.valuation(c, t))
                    .filter(|&v| v > 0)
                    .collect();
                distinct.len()
            })
            .collect();
        let grades_distinct = (0..n)
            .map(|c| {
                let mut seen = BTreeSet::new();
                graph.course_adj[c]
                    .iter()
                    .all(|&t| seen.insert(instance.grade(t, c)))
            })
            .collect();
        let utilities_distinct = (0..m)
            .map(|t| {
                let mut seen = BTreeSet::new();
                graph.ta_adj[t]
                    .iter()
                    .all(|&c| seen.insert(instance.utility(t, c)))
            })
            .collect();
        CaseProfile {
            course_degree,
            course_slack,
            max_ta_degree: (0..m).map(|t| graph.ta_degree(t)).max().unwrap_or(0),
            valuation_types,
            grades_distinct,
            utilities_distinct,
            n_courses: n,
            max_capacity: instance
                .courses()
                .iter()
                .map(|c| c.capacity)
                .max()
                .unwrap_or(0),
        }
    }

    pub fn all_grades_distinct(&self) -> bool {
        self.grades_distinct.iter().all(|&b| b)
    }

    pub fn all_utilities_distinct(&self) -> bool {
        self.utilities_distinct.iter().all(|&b| b)
    }
}

fn yes(instance: &Instance, matching: Matching) -> SolverOutcome {
    debug_assert!(verify_quick(instance, matching.assignment()));
    SolverOutcome::Yes {
        matching,
        certified: instance.k(),
    }
}

/// Propagates a partial matching: while some unprocessed course neighbors a
/// matched TA, all its remaining unmatched neighbors are assigned to it.
/// The result may be infeasible; the caller verifies.
pub fn extended_matching(
    graph: &BipartiteGraph,
    partial: &Matching,
    matched_tas: &BTreeSet<usize>,
    matched_courses: &BTreeSet<usize>,
) -> Matching {
    let mut assignment: Vec<Option<u32>> = partial.assignment().to_vec();
    let mut t_mu = matched_tas.clone();
    let mut x_mu = matched_courses.clone();
    loop {
        // Smallest unprocessed course adjacent to a matched TA.
        let next = t_mu
            .iter()
            .flat_map(|&t| graph.ta_adj[t].iter().copied())
            .filter(|c| !x_mu.contains(c))
            .min();
        let Some(x) = next else { break };
        for &t in &graph.course_adj[x] {
            if t_mu.insert(t) {
                assignment[t] = Some(x as u32);
            }
        }
        x_mu.insert(x);
    }
    Matching::from_assignment(assignment)
}

/// Checks one component of a candidate assignment: every component course
/// exactly filled through positive edges, satisfied, and no envy among the
/// component's TAs. Envy cannot cross components (an envier positively
/// values the envied course), so component verdicts compose.
fn component_ok(instance: &Instance, assignment: &[Option<u32>], comp: &Component) -> bool {
    for &c in &comp.courses {
        let course = instance.course(c);
        let mut count = 0usize;
        let mut sum = 0u64;
        for (t, a) in assignment.iter().enumerate() {
            if *a == Some(c as u32) {
                if course.valuations[t] == 0 {
                    return false;
                }
                count += 1;
                sum += course.valuations[t];
            }
        }
        if count != course.capacity as usize {
            return false;
        }
        let k = instance.k();
        if (sum as i128) * (k.denom() as i128) < (k.numer() as i128) * (course.capacity as i128) {
            return false;
        }
    }
    for &envier in &comp.tas {
        let own = assignment[envier].map_or(0, |c| instance.utility(envier, c as usize));
        for &envied in &comp.tas {
            if envier == envied {
                continue;
            }
            let Some(c) = assignment[envied] else {
                continue;
            };
            let c = c as usize;
            if instance.utility(envier, c) > own
                && instance.grade(envier, c) >= instance.grade(envied, c)
            {
                return false;
            }
        }
    }
    true
}

/// Per-component solver for the unit degree-capacity-slack case. Returns the
/// component's assignment or None for a component-level NO.
fn degcap_component(
    instance: &Instance,
    graph: &BipartiteGraph,
    comp: &Component,
    jobs: usize,
) -> Option<Vec<Option<u32>>> {
    let m = instance.n_tas();
    if comp.courses.is_empty() {
        return Some(vec![None; m]);
    }

    let forced: Vec<usize> = comp
        .courses
        .iter()
        .copied()
        .filter(|&c| graph.course_degree(c) == instance.course(c).capacity as usize)
        .collect();

    if !forced.is_empty() {
        // Some course must take its whole neighborhood; overlaps mean two
        // forced courses claim one TA.
        let mut assignment: Vec<Option<u32>> = vec![None; m];
        let mut t_mu = BTreeSet::new();
        let mut x_mu = BTreeSet::new();
        for &c in &forced {
            for &t in &graph.course_adj[c] {
                if !t_mu.insert(t) {
                    return None;
                }
                assignment[t] = Some(c as u32);
            }
            x_mu.insert(c);
        }
        let seeded = Matching::from_assignment(assignment);
        let propagated = extended_matching(graph, &seeded, &t_mu, &x_mu);
        return component_ok(instance, propagated.assignment(), comp)
            .then(|| propagated.assignment().to_vec());
    }

    // All slacks are one: compare edges against vertices.
    let edges: usize = comp.courses.iter().map(|&c| graph.course_degree(c)).sum();
    let vertices = comp.courses.len() + comp.tas.len();

    if edges == vertices - 1 {
        // Tree: exactly one component TA stays unassigned; try each.
        let trial = |&t: &usize| -> Option<Vec<Option<u32>>> {
            let seeded = Matching::from_assignment(vec![None; m]);
            let t_mu = BTreeSet::from([t]);
            let propagated = extended_matching(graph, &seeded, &t_mu, &BTreeSet::new());
            component_ok(instance, propagated.assignment(), comp)
                .then(|| propagated.assignment().to_vec())
        };
        if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .expect("worker pool");
            let results: Vec<Option<Vec<Option<u32>>>> =
                pool.install(|| comp.tas.par_iter().map(trial).collect());
            return results.into_iter().flatten().next();
        }
        return comp.tas.iter().find_map(trial);
    }

    if edges == vertices {
        // Unique cycle: peel leaves to expose it, then both seeds at the
        // smallest cycle course.
        let mut deg: Vec<usize> = vec![0; instance.n_courses() + m];
        for &c in &comp.courses {
            deg[c] = graph.course_degree(c);
        }
        for &t in &comp.tas {
            deg[instance.n_courses() + t] = graph.ta_degree(t);
        }
        let mut removed = vec![false; instance.n_courses() + m];
        let mut stack: Vec<usize> = comp
            .courses
            .iter()
            .copied()
            .chain(comp.tas.iter().map(|&t| instance.n_courses() + t))
            .filter(|&v| deg[v] == 1)
            .collect();
        while let Some(v) = stack.pop() {
            if removed[v] {
                continue;
            }
            removed[v] = true;
            let neighbors: Vec<usize> = if v < instance.n_courses() {
                graph.course_adj[v]
                    .iter()
                    .map(|&t| instance.n_courses() + t)
                    .collect()
            } else {
                graph.ta_adj[v - instance.n_courses()].to_vec()
            };
            for u in neighbors {
                if !removed[u] {
                    deg[u] -= 1;
                    if deg[u] == 1 {
                        stack.push(u);
                    }
                }
            }
        }
        let x1 = comp
            .courses
            .iter()
            .copied()
            .find(|&c| !removed[c])
            .expect("unicyclic component has a cycle course");
        let mut cycle_tas: Vec<usize> = graph.course_adj[x1]
            .iter()
            .copied()
            .filter(|&t| !removed[instance.n_courses() + t])
            .collect();
        cycle_tas.sort_unstable();
        debug_assert_eq!(cycle_tas.len(), 2);

        for &excluded in &[cycle_tas[1], cycle_tas[0]] {
            let mut assignment: Vec<Option<u32>> = vec![None; m];
            let mut t_mu = BTreeSet::new();
            for &t in &graph.course_adj[x1] {
                if t != excluded {
                    assignment[t] = Some(x1 as u32);
                    t_mu.insert(t);
                }
            }
            let seeded = Matching::from_assignment(assignment);
            let propagated = extended_matching(graph, &seeded, &t_mu, &BTreeSet::from([x1]));
            if component_ok(instance, propagated.assignment(), comp) {
                return Some(propagated.assignment().to_vec());
            }
        }
        return None;
    }

    // More than one cycle: more seats than TAs, impossible.
    None
}

/// Degree minus capacity at most one for every course (Case split: forced
/// courses, tree, unique cycle, multi-cycle NO).
pub fn solve_degcap_le1(
    instance: &Instance,
    opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    let graph = build_graph(instance);
    for c in 0..instance.n_courses() {
        let slack = graph.course_degree(c) as i64 - instance.course(c).capacity as i64;
        if !(0..=1).contains(&slack) {
            return Ok(SolverOutcome::not_applicable(format!(
                "course `{}` has degree-capacity slack {}",
                instance.course(c).id,
                slack
            )));
        }
    }

    let mut assignment: Vec<Option<u32>> = vec![None; instance.n_tas()];
    for comp in &graph.components {
        match degcap_component(instance, &graph, comp, opts.jobs) {
            Some(part) => {
                for &t in &comp.tas {
                    assignment[t] = part[t];
                }
            }
            None => return Ok(SolverOutcome::No),
        }
    }
    let matching = Matching::from_assignment(assignment);
    if verify_quick(instance, matching.assignment()) {
        Ok(yes(instance, matching))
    } else {
        Ok(SolverOutcome::No)
    }
}

/// Sorts a course's neighborhood by grade descending (ids break ties) and
/// fills the capacity from the top. Shared by the single-course and
/// TA-degree-1 solvers.
fn top_graded_roster(
    instance: &Instance,
    course: usize,
    neighbors: &[usize],
) -> Option<Vec<usize>> {
    let cap = instance.course(course).capacity as usize;
    if neighbors.len() < cap {
        return None;
    }
    let mut sorted = neighbors.to_vec();
    sorted.sort_by(|&a, &b| {
        instance
            .grade(b, course)
            .cmp(&instance.grade(a, course))
            .then_with(|| instance.ta(a).id.cmp(&instance.ta(b).id))
    });
    sorted.truncate(cap);
    Some(sorted)
}

/// Single course: assign the top-graded positively-valuing TAs and verify.
pub fn solve_single_course(
    instance: &Instance,
    _opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    if instance.n_courses() != 1 {
        return Ok(SolverOutcome::not_applicable("more than one course"));
    }
    let graph = build_graph(instance);
    let Some(roster) = top_graded_roster(instance, 0, &graph.course_adj[0]) else {
        return Ok(SolverOutcome::No);
    };
    let mut assignment = vec![None; instance.n_tas()];
    for &t in &roster {
        assignment[t] = Some(0);
    }
    let matching = Matching::from_assignment(assignment);
    if verify_quick(instance, matching.assignment()) {
        Ok(yes(instance, matching))
    } else {
        Ok(SolverOutcome::No)
    }
}

/// Every TA positively values at most one course: split per course and fill
/// each from the top of its own grade order.
pub fn solve_ta_degree1(
    instance: &Instance,
    _opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    let graph = build_graph(instance);
    if (0..instance.n_tas()).any(|t| graph.ta_degree(t) > 1) {
        return Ok(SolverOutcome::not_applicable("a TA has degree above one"));
    }
    let mut assignment = vec![None; instance.n_tas()];
    for c in 0..instance.n_courses() {
        let Some(roster) = top_graded_roster(instance, c, &graph.course_adj[c]) else {
            return Ok(SolverOutcome::No);
        };
        for &t in &roster {
            assignment[t] = Some(c as u32);
        }
    }
    let matching = Matching::from_assignment(assignment);
    if verify_quick(instance, matching.assignment()) {
        Ok(yes(instance, matching))
    } else {
        Ok(SolverOutcome::No)
    }
}

/// Bounds for `solve_constant_enum`.
pub const CONST_ENUM_MAX_COURSES: usize = 4;
pub const CONST_ENUM_MAX_CAPACITY: u32 = 4;

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Constant courses and capacities: enumerate every distribution of rosters.
pub fn solve_constant_enum(
    instance: &Instance,
    opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    let n = instance.n_courses();
    if n > CONST_ENUM_MAX_COURSES {
        return Ok(SolverOutcome::not_applicable(format!(
            "{n} courses exceeds the constant bound {CONST_ENUM_MAX_COURSES}"
        )));
    }
    if instance
        .courses()
        .iter()
        .any(|c| c.capacity > CONST_ENUM_MAX_CAPACITY)
    {
        return Ok(SolverOutcome::not_applicable(format!(
            "a capacity exceeds the constant bound {CONST_ENUM_MAX_CAPACITY}"
        )));
    }
    let m = instance.n_tas() as u64;
    let mut remaining = m;
    let mut candidates: u128 = 1;
    for c in instance.courses() {
        candidates = candidates.saturating_mul(binom(remaining, c.capacity as u64));
        remaining = remaining.saturating_sub(c.capacity as u64);
    }
    if candidates > opts.budgets.leaf_visits as u128 {
        return Ok(SolverOutcome::not_applicable(format!(
            "{candidates} roster distributions exceed the enumeration budget"
        )));
    }

    fn choose_roster(
        instance: &Instance,
        course: usize,
        assignment: &mut Vec<Option<u32>>,
        start: usize,
        left: u32,
    ) -> bool {
        if left == 0 {
            return fill_course(instance, course + 1, assignment);
        }
        let m = instance.n_tas();
        if start + (left as usize) > m {
            return false;
        }
        for t in start..m {
            if assignment[t].is_some() || instance.valuation(course, t) == 0 {
                continue;
            }
            assignment[t] = Some(course as u32);
            if choose_roster(instance, course, assignment, t + 1, left - 1) {
                return true;
            }
            assignment[t] = None;
        }
        false
    }

    fn fill_course(instance: &Instance, course: usize, assignment: &mut Vec<Option<u32>>) -> bool {
        if course == instance.n_courses() {
            return verify_quick(instance, assignment);
        }
        let cap = instance.course(course).capacity;
        choose_roster(instance, course, assignment, 0, cap)
    }

    let mut assignment = vec![None; instance.n_tas()];
    if fill_course(instance, 0, &mut assignment) {
        Ok(yes(instance, Matching::from_assignment(assignment)))
    } else {
        Ok(SolverOutcome::No)
    }
}

/// All capacities one, per-TA distinct utilities: reduce to maximum-weight
/// strongly stable matching, where courses rank by grade with ties and a
/// pair weighs 1 exactly when its valuation meets the threshold. MEFE exists
/// iff a strongly stable matching of weight n does.
pub fn solve_capacity1(
    instance: &Instance,
    opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    let n = instance.n_courses();
    let m = instance.n_tas();
    if instance.courses().iter().any(|c| c.capacity != 1) {
        return Ok(SolverOutcome::not_applicable("a capacity differs from 1"));
    }
    let profile = CaseProfile::of(instance);
    if !profile.all_utilities_distinct() {
        return Ok(SolverOutcome::not_applicable(
            "a TA repeats a positive utility",
        ));
    }
    let graph = build_graph(instance);
    let mut estimate: u128 = 1;
    for c in 0..n {
        estimate = estimate.saturating_mul(graph.course_degree(c) as u128 + 1);
    }
    if estimate > opts.budgets.leaf_visits as u128 {
        return Ok(SolverOutcome::not_applicable(format!(
            "{estimate} engine candidates exceed the enumeration budget"
        )));
    }

    // Left: TAs with strict utility lists. Right: courses ranking by grade,
    // grouped into ties.
    let left: Vec<Vec<Vec<usize>>> = (0..m)
        .map(|t| {
            let mut courses = graph.ta_adj[t].clone();
            courses.sort_by_key(|&c| std::cmp::Reverse(instance.utility(t, c)));
            courses.into_iter().map(|c| vec![c]).collect()
        })
        .collect();
    let right: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|c| {
            let mut tas = graph.course_adj[c].clone();
            tas.sort_by(|&a, &b| {
                instance
                    .grade(b, c)
                    .cmp(&instance.grade(a, c))
                    .then(a.cmp(&b))
            });
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for t in tas {
                match groups.last_mut() {
                    Some(g) if instance.grade(g[0], c) == instance.grade(t, c) => g.push(t),
                    _ => groups.push(vec![t]),
                }
            }
            groups
        })
        .collect();
    let mut system = PreferenceSystem::new(left, right, vec![1; n])
        .map_err(|e| SolverError::Engine(e.to_string()))?;
    for t in 0..m {
        for &c in &graph.ta_adj[t] {
            let w = u8::from(Rational::from(instance.valuation(c, t)) >= instance.k());
            system
                .set_weight(t, c, w)
                .map_err(|e| SolverError::Engine(e.to_string()))?;
        }
    }

    match strongly_stable_max_weight_with(&system, opts.budgets.leaf_visits)
        .map_err(|e| SolverError::Engine(e.to_string()))?
    {
        StronglyStableOutcome::Found {
            matching,
            total_weight,
        } if total_weight == n as u64 => {
            let assignment = matching
                .left_to_right
                .iter()
                .map(|r| r.map(|c| c as u32))
                .collect();
            Ok(yes(instance, Matching::from_assignment(assignment)))
        }
        _ => Ok(SolverOutcome::No),
    }
}

/// Seat quota for a two-valued course: the least number of high seats
/// satisfying `a*q + a'*q' >= k*c` with `a + a' = c`, or None when no
/// nonnegative integer pair does.
pub fn two_valuation_quota(capacity: u32, q: u64, q_low: u64, k: Rational) -> Option<(u32, u32)> {
    debug_assert!(q >= q_low);
    if Rational::from(q) < k {
        return None;
    }
    if q == q_low {
        return Some((capacity, 0));
    }
    let need = (k - Rational::from(q_low)) * Rational::from(capacity) / Rational::from(q - q_low);
    let a = need.ceil_int().max(0) as u32;
    debug_assert!(a <= capacity);
    Some((a, capacity - a))
}

/// Every course has at most two distinct positive valuations, grades are
/// distinct per course and utilities distinct per TA: fix the seat quotas
/// per course and match seats stably.
pub fn solve_two_valuation(
    instance: &Instance,
    opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    let profile = CaseProfile::of(instance);
    if profile.valuation_types.iter().any(|&r| r > 2) {
        return Ok(SolverOutcome::not_applicable(
            "a course has more than two distinct positive valuations",
        ));
    }
    if !profile.all_grades_distinct() {
        return Ok(SolverOutcome::not_applicable(
            "a course repeats a grade among its positively valued TAs",
        ));
    }
    if !profile.all_utilities_distinct() {
        return Ok(SolverOutcome::not_applicable(
            "a TA repeats a positive utility",
        ));
    }

    let m = instance.n_tas();
    let mut groups = Vec::new();
    for (c, course) in instance.courses().iter().enumerate() {
        let mut values: Vec<u64> = (0..m)
            .map(|t| course.valuations[t])
            .filter(|&v| v > 0)
            .collect();
        values.sort_unstable_by(|a, b| b.cmp(a));
        values.dedup();
        if values.is_empty() {
            return Ok(SolverOutcome::No);
        }
        let q = values[0];
        let q_low = *values.last().unwrap();
        let Some((high, low)) = two_valuation_quota(course.capacity, q, q_low, instance.k()) else {
            return Ok(SolverOutcome::No);
        };
        if high > 0 {
            groups.push(SeatGroup {
                course: c,
                seats: high,
                acceptable: (0..m).filter(|&t| course.valuations[t] == q).collect(),
            });
        }
        if low > 0 {
            groups.push(SeatGroup {
                course: c,
                seats: low,
                acceptable: (0..m).filter(|&t| course.valuations[t] > 0).collect(),
            });
        }
    }

    match solve_seats(instance, &groups, opts.budgets.leaf_visits, &|mu| {
        verify_quick(instance, mu.assignment())
    })? {
        Some(matching) => Ok(yes(instance, matching)),
        None => Ok(SolverOutcome::No),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Auto,
    Brute,
    DegCap,
    Single,
    TaDeg1,
    Cap1,
    TwoVal,
    ConstEnum,
    FptN,
    Approx(Rational),
    ExistBinval,
    ExistHr,
}

impl Strategy {
    pub fn parse(name: &str, epsilon: Option<Rational>) -> Result<Self, String> {
        match name {
            "auto" => Ok(Strategy::Auto),
            "brute" => Ok(Strategy::Brute),
            "degcap" => Ok(Strategy::DegCap),
            "single" => Ok(Strategy::Single),
            "tadeg1" => Ok(Strategy::TaDeg1),
            "cap1" => Ok(Strategy::Cap1),
            "twoval" => Ok(Strategy::TwoVal),
            "constenum" => Ok(Strategy::ConstEnum),
            "fptn" => Ok(Strategy::FptN),
            "approx" => match epsilon {
                Some(eps) => Ok(Strategy::Approx(eps)),
                None => Err("strategy `approx` requires --epsilon".into()),
            },
            "exist-binval" => Ok(Strategy::ExistBinval),
            "exist-hr" => Ok(Strategy::ExistHr),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dispatched {
    pub solver: &'static str,
    pub outcome: SolverOutcome,
}

/// Runs one named solver, or walks the registry in order for `Auto` and
/// returns the first applicable verdict.
pub fn dispatch(
    instance: &Instance,
    strategy: Strategy,
    opts: &SolveOpts,
) -> Result<Dispatched, SolverError> {
    type Entry = (
        &'static str,
        fn(&Instance, &SolveOpts) -> Result<SolverOutcome, SolverError>,
    );
    const REGISTRY: &[Entry] = &[
        ("tadeg1", solve_ta_degree1),
        ("single", solve_single_course),
        ("degcap", solve_degcap_le1),
        ("cap1", solve_capacity1),
        ("twoval", solve_two_valuation),
        ("constenum", solve_constant_enum),
        ("fptn", paramsolvers::solve_fpt_n),
        ("brute", brute_entry),
    ];

    fn brute_entry(instance: &Instance, opts: &SolveOpts) -> Result<SolverOutcome, SolverError> {
        oracle::solve_bruteforce_with(instance, opts)
    }

    let run_named = |name: &'static str,
                     f: fn(&Instance, &SolveOpts) -> Result<SolverOutcome, SolverError>|
     -> Result<Dispatched, SolverError> {
        Ok(Dispatched {
            solver: name,
            outcome: f(instance, opts)?,
        })
    };

    match strategy {
        Strategy::Auto => {
            for (name, f) in REGISTRY {
                let outcome = f(instance, opts)?;
                if !outcome.is_not_applicable() {
                    return Ok(Dispatched {
                        solver: name,
                        outcome,
                    });
                }
            }
            Ok(Dispatched {
                solver: "auto",
                outcome: SolverOutcome::not_applicable("no solver applicable"),
            })
        }
        Strategy::Brute => run_named("brute", brute_entry),
        Strategy::DegCap => run_named("degcap", solve_degcap_le1),
        Strategy::Single => run_named("single", solve_single_course),
        Strategy::TaDeg1 => run_named("tadeg1", solve_ta_degree1),
        Strategy::Cap1 => run_named("cap1", solve_capacity1),
        Strategy::TwoVal => run_named("twoval", solve_two_valuation),
        Strategy::ConstEnum => run_named("constenum", solve_constant_enum),
        Strategy::FptN => run_named("fptn", paramsolvers::solve_fpt_n),
        Strategy::Approx(eps) => Ok(Dispatched {
            solver: "approx",
            outcome: paramsolvers::solve_approx(instance, eps, opts)?,
        }),
        Strategy::ExistBinval => Ok(Dispatched {
            solver: "exist-binval",
            outcome: crate::existence::solve_existence_binval(instance)?,
        }),
        Strategy::ExistHr => Ok(Dispatched {
            solver: "exist-hr",
            outcome: crate::existence::solve_existence_hr(instance)?,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::{CourseSpec, TaSpec};
    use crate::oracle::solve_bruteforce;
    use crate::verify::verify;

    fn inst(k: &str, courses: Vec<CourseSpec>, tas: Vec<TaSpec>) -> Instance {
        Instance::new(k.parse().unwrap(), courses, tas).unwrap()
    }

    fn course(id: &str, capacity: u32, vals: &[(&str, u64)]) -> CourseSpec {
        CourseSpec {
            id: id.into(),
            capacity,
            valuations: vals.iter().map(|(t, v)| (t.to_string(), *v)).collect(),
        }
    }

    /// TA valuing the listed courses; utilities mirror valuations, grades
    /// given as strings.
    fn ta(id: &str, entries: &[(&str, u64, &str)]) -> TaSpec {
        TaSpec {
            id: id.into(),
            utilities: entries
                .iter()
                .map(|(c, u, _)| (c.to_string(), *u))
                .collect(),
            grades: entries
                .iter()
                .map(|(c, _, g)| (c.to_string(), g.parse().unwrap()))
                .collect(),
        }
    }

    /// Path t0 - x1 - t1 - x2 - t2 with unit capacities: marking t0 as used
    /// forces t1 into x1 and then t2 into x2.
    #[test]
    fn extended_matching_propagates_along_a_path() {
        let instance = inst(
            "0",
            vec![
                course("x1", 1, &[("t0", 1), ("t1", 1)]),
                course("x2", 1, &[("t1", 1), ("t2", 1)]),
            ],
            vec![
                ta("t0", &[("x1", 1, "1")]),
                ta("t1", &[("x1", 1, "1"), ("x2", 1, "1")]),
                ta("t2", &[("x2", 1, "1")]),
            ],
        );
        let graph = build_graph(&instance);
        let seed = Matching::empty(&instance);
        let t0 = instance.ta_ix("t0").unwrap();
        let result = extended_matching(&graph, &seed, &BTreeSet::from([t0]), &BTreeSet::new());
        assert_eq!(result.course_of(instance.ta_ix("t1").unwrap()), Some(0));
        assert_eq!(result.course_of(instance.ta_ix("t2").unwrap()), Some(1));
        assert_eq!(result.course_of(t0), None);
    }

    #[test]
    fn extended_matching_leaves_full_seed_unchanged() {
        let instance = fixtures::figure_instance();
        let graph = build_graph(&instance);
        let seed = Matching::from_pairs(
            &instance,
            vec![("t1", Some("c1")), ("t2", Some("c2")), ("t3", Some("c3"))],
        )
        .unwrap();
        let result = extended_matching(
            &graph,
            &seed,
            &BTreeSet::from([0, 1, 2]),
            &BTreeSet::from([0, 1, 2]),
        );
        assert_eq!(result, seed);
    }

    /// Two forced courses (degree = capacity) sharing a TA: the seed claims
    /// the TA twice, so the component answers No.
    #[test]
    fn degcap_overlapping_forced_courses_is_no() {
        let instance = inst(
            "0",
            vec![course("x1", 1, &[("t0", 1)]), course("x2", 1, &[("t0", 1)])],
            vec![ta("t0", &[("x1", 1, "1"), ("x2", 1, "1")]), ta("t1", &[])],
        );
        let outcome = solve_degcap_le1(&instance, &SolveOpts::default()).unwrap();
        assert!(outcome.is_no());
        assert!(solve_bruteforce(&instance).unwrap().is_no());
    }

    /// A component with two cycles has more seats than TAs: No.
    #[test]
    fn degcap_multi_cycle_component_is_no() {
        // Two courses of degree 3, capacity 2, sharing all three TAs:
        // edges 6 > vertices 5 in that component. Two isolated TAs keep the
        // instance within the capacity bound.
        let instance = inst(
            "0",
            vec![
                course("x1", 2, &[("t1", 1), ("t2", 1), ("t3", 1)]),
                course("x2", 2, &[("t1", 1), ("t2", 1), ("t3", 1)]),
            ],
            vec![
                ta("t1", &[("x1", 1, "1"), ("x2", 1, "1")]),
                ta("t2", &[("x1", 1, "1"), ("x2", 1, "1")]),
                ta("t3", &[("x1", 1, "1"), ("x2", 1, "1")]),
                ta("t4", &[]),
                ta("t5", &[]),
            ],
        );
        let outcome = solve_degcap_le1(&instance, &SolveOpts::default()).unwrap();
        assert!(outcome.is_no());
    }

    /// Tree case: one course, two TAs with distinct grades; unassigning the
    /// lower-grade TA verifies, the other seed fails the envy check.
    #[test]
    fn degcap_tree_case_tries_each_unassigned_ta() {
        let instance = inst(
            "1",
            vec![course("x", 1, &[("t1", 2), ("t2", 1)])],
            vec![ta("t1", &[("x", 2, "2")]), ta("t2", &[("x", 1, "1")])],
        );
        let outcome = solve_degcap_le1(&instance, &SolveOpts::default()).unwrap();
        let mu = outcome.matching().expect("tree case solves");
        assert_eq!(mu.course_of(0), Some(0));
        assert_eq!(mu.course_of(1), None);
    }

    /// Unicyclic component x1-t1-x2-t2-x1 with unit capacities: the seed
    /// keeping t1 at x1 satisfies both courses, the other fails.
    #[test]
    fn degcap_unique_cycle_tries_both_seeds() {
        let instance = inst(
            "2",
            vec![
                course("x1", 1, &[("t1", 2), ("t2", 1)]),
                course("x2", 1, &[("t1", 1), ("t2", 2)]),
            ],
            vec![
                ta("t1", &[("x1", 2, "1"), ("x2", 1, "1")]),
                ta("t2", &[("x1", 1, "1"), ("x2", 2, "1")]),
            ],
        );
        let outcome = solve_degcap_le1(&instance, &SolveOpts::default()).unwrap();
        let mu = outcome.matching().expect("one seed satisfies");
        assert_eq!(mu.course_of(0), Some(0));
        assert_eq!(mu.course_of(1), Some(1));
        assert!(verify(&instance, mu).is_mefe);
    }

    #[test]
    fn degcap_unique_cycle_both_seeds_failing_is_no() {
        let instance = inst(
            "2",
            vec![
                course("x1", 1, &[("t1", 1), ("t2", 1)]),
                course("x2", 1, &[("t1", 2), ("t2", 2)]),
            ],
            vec![
                ta("t1", &[("x1", 1, "1"), ("x2", 2, "1")]),
                ta("t2", &[("x1", 1, "1"), ("x2", 2, "1")]),
            ],
        );
        let outcome = solve_degcap_le1(&instance, &SolveOpts::default()).unwrap();
        assert!(outcome.is_no());
        assert!(solve_bruteforce(&instance).unwrap().is_no());
    }

    #[test]
    fn degcap_not_applicable_on_big_slack() {
        let instance = fixtures::figure_instance();
        assert!(solve_degcap_le1(&instance, &SolveOpts::default())
            .unwrap()
            .is_not_applicable());
    }

    /// Capacity 2, grades 5 > 4 > 3, valuations 10, 10, 1, k = 10: the top
    /// two by grade are exactly the two valued 10.
    #[test]
    fn single_course_takes_the_top_graded() {
        let instance = inst(
            "10",
            vec![course("x", 2, &[("t1", 10), ("t2", 10), ("t3", 1)])],
            vec![
                ta("t1", &[("x", 10, "5")]),
                ta("t2", &[("x", 10, "4")]),
                ta("t3", &[("x", 1, "3")]),
            ],
        );
        let outcome = solve_single_course(&instance, &SolveOpts::default()).unwrap();
        let mu = outcome.matching().expect("top two satisfy");
        assert_eq!(mu.course_of(0), Some(0));
        assert_eq!(mu.course_of(1), Some(0));
        assert_eq!(mu.course_of(2), None);
        assert!(verify(&instance, mu).is_mefe);
    }

    #[test]
    fn single_course_short_neighborhood_is_no() {
        let instance = Instance::new_with_capacity_deficit(
            "0".parse().unwrap(),
            vec![course("x", 2, &[("t1", 1)])],
            vec![ta("t1", &[("x", 1, "1")]), ta("t2", &[])],
        )
        .unwrap();
        assert!(solve_single_course(&instance, &SolveOpts::default())
            .unwrap()
            .is_no());
    }

    #[test]
    fn single_course_boundary_tie_is_no() {
        let instance = fixtures::one_course_two_tas_equal_grades();
        assert!(solve_single_course(&instance, &SolveOpts::default())
            .unwrap()
            .is_no());
    }

    /// Degree-0 TAs stay unassigned and envy nobody.
    #[test]
    fn ta_degree1_ignores_zero_degree_tas() {
        let instance = inst(
            "1",
            vec![course("x", 1, &[("t1", 2)])],
            vec![ta("t1", &[("x", 2, "1")]), ta("t2", &[])],
        );
        let outcome = solve_ta_degree1(&instance, &SolveOpts::default()).unwrap();
        let mu = outcome.matching().expect("fillable");
        assert_eq!(mu.course_of(1), None);
        assert!(verify(&instance, mu).is_mefe);
    }

    #[test]
    fn ta_degree1_boundary_tie_in_one_subinstance_is_no() {
        let instance = inst(
            "0",
            vec![
                course("x1", 1, &[("t1", 1)]),
                course("x2", 1, &[("t2", 1), ("t3", 1)]),
            ],
            vec![
                ta("t1", &[("x1", 1, "1")]),
                ta("t2", &[("x2", 1, "2")]),
                ta("t3", &[("x2", 1, "2")]),
            ],
        );
        assert!(solve_ta_degree1(&instance, &SolveOpts::default())
            .unwrap()
            .is_no());
    }

    #[test]
    fn constant_enum_zero_courses_is_yes_empty() {
        let instance = inst("0", vec![], vec![ta("t1", &[])]);
        let outcome = solve_constant_enum(&instance, &SolveOpts::default()).unwrap();
        assert_eq!(outcome.matching(), Some(&Matching::empty(&instance)));
    }

    /// The only acceptable TA of one course is valued below k, so no
    /// strongly stable matching reaches weight n.
    #[test]
    fn capacity1_forced_weight_zero_edge_is_no() {
        let instance = inst(
            "3",
            vec![
                course("x1", 1, &[("t1", 5), ("t2", 4)]),
                course("x2", 1, &[("t2", 1)]),
            ],
            vec![
                ta("t1", &[("x1", 2, "2")]),
                ta("t2", &[("x1", 3, "1"), ("x2", 2, "1")]),
            ],
        );
        assert!(solve_capacity1(&instance, &SolveOpts::default())
            .unwrap()
            .is_no());
        assert!(solve_bruteforce(&instance).unwrap().is_no());
    }

    #[test]
    fn capacity1_grade_tie_is_no() {
        let instance = fixtures::one_course_two_tas_equal_grades();
        assert!(solve_capacity1(&instance, &SolveOpts::default())
            .unwrap()
            .is_no());
    }

    #[test]
    fn dispatch_routes_all_cap1_distinct_to_cap1() {
        // Course degrees of 3 keep the slack solver out of the way.
        let instance = inst(
            "1",
            vec![
                course("x1", 1, &[("t1", 2), ("t2", 3), ("t3", 1)]),
                course("x2", 1, &[("t1", 1), ("t2", 2), ("t3", 2)]),
            ],
            vec![
                ta("t1", &[("x1", 4, "2"), ("x2", 3, "1")]),
                ta("t2", &[("x1", 2, "1"), ("x2", 5, "2")]),
                ta("t3", &[("x1", 6, "3"), ("x2", 1, "3")]),
            ],
        );
        let dispatched = dispatch(&instance, Strategy::Auto, &SolveOpts::default()).unwrap();
        assert_eq!(dispatched.solver, "cap1");
    }

    #[test]
    fn dispatch_figure_goes_to_constant_enumeration() {
        let dispatched = dispatch(
            &fixtures::figure_instance(),
            Strategy::Auto,
            &SolveOpts::default(),
        )
        .unwrap();
        assert_eq!(dispatched.solver, "constenum");
        assert!(dispatched.outcome.is_yes());
    }

    #[test]
    fn strategy_names_parse() {
        for name in [
            "auto",
            "brute",
            "degcap",
            "single",
            "tadeg1",
            "cap1",
            "twoval",
            "constenum",
            "fptn",
            "exist-binval",
            "exist-hr",
        ] {
            assert!(Strategy::parse(name, None).is_ok(), "{name}");
        }
        assert!(Strategy::parse("approx", None).is_err());
        assert!(Strategy::parse("approx", Some(Rational::new(1, 2).unwrap())).is_ok());
        assert!(Strategy::parse("nope", None).is_err());
    }
}
