//! Exhaustive exact solver, the ground truth every other solver is tested
//! against. Assignments are built TA by TA in instance order, each TA trying
//! courses in index order with Unassigned last, so the first solution found
//! is the lexicographically least and repeated runs are identical.
//!
//! Pruning is capacity-based only: a branch dies when the course is already
//! full (zero-valued edges can never appear in a feasible matching and are
//! skipped likewise) or when the remaining TAs cannot fill the remaining
//! seats. Leaves therefore carry exactly-filled courses and only
//! satisfaction and envy remain to check.

use rayon::prelude::*;

use crate::instance::{Instance, Matching};
use crate::outcome::{SolveOpts, SolverError, SolverOutcome};
use crate::verify::verify_quick;

/// `(n+1)^m`, saturating at `u128::MAX`.
fn assignment_space(instance: &Instance) -> u128 {
    let base = instance.n_courses() as u128 + 1;
    let mut acc: u128 = 1;
    for _ in 0..instance.n_tas() {
        acc = acc.saturating_mul(base);
    }
    acc
}

fn check_budget(instance: &Instance, opts: &SolveOpts) -> Result<(), SolverError> {
    let estimate = assignment_space(instance);
    if estimate > opts.budgets.leaf_visits as u128 {
        return Err(SolverError::ResourceBound {
            estimate,
            budget: opts.budgets.leaf_visits,
        });
    }
    Ok(())
}

struct Search<'a> {
    instance: &'a Instance,
    capacities: Vec<u32>,
    /// Stop after the first solution when true.
    first_only: bool,
}

struct SearchState {
    assignment: Vec<Option<u32>>,
    remaining: Vec<u32>,
    seats_left: u64,
    found: Vec<Vec<Option<u32>>>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, first_only: bool) -> Self {
        Search {
            instance,
            capacities: instance.courses().iter().map(|c| c.capacity).collect(),
            first_only,
        }
    }

    fn fresh_state(&self) -> SearchState {
        SearchState {
            assignment: vec![None; self.instance.n_tas()],
            remaining: self.capacities.clone(),
            seats_left: self.capacities.iter().map(|&c| c as u64).sum(),
            found: Vec::new(),
        }
    }

    /// DFS from TA `depth`; returns true when the search should stop.
    fn descend(&self, depth: usize, state: &mut SearchState) -> bool {
        let m = self.instance.n_tas();
        let tas_left = (m - depth) as u64;
        if tas_left < state.seats_left {
            return false;
        }
        if depth == m {
            if verify_quick(self.instance, &state.assignment) {
                state.found.push(state.assignment.clone());
                return self.first_only;
            }
            return false;
        }
        for c in 0..self.instance.n_courses() {
            if state.remaining[c] == 0 || self.instance.valuation(c, depth) == 0 {
                continue;
            }
            state.remaining[c] -= 1;
            state.seats_left -= 1;
            state.assignment[depth] = Some(c as u32);
            let stop = self.descend(depth + 1, state);
            state.assignment[depth] = None;
            state.remaining[c] += 1;
            state.seats_left += 1;
            if stop {
                return true;
            }
        }
        self.descend(depth + 1, state)
    }

    /// Runs the search, splitting on the first TA's choice across `jobs`
    /// workers. Results keep the sequential order: solutions from branch i
    /// precede solutions from branch j for i < j, and within a branch the
    /// DFS order is lexicographic.
    fn run(&self, jobs: usize) -> Vec<Vec<Option<u32>>> {
        let m = self.instance.n_tas();
        if jobs <= 1 || m == 0 {
            let mut state = self.fresh_state();
            self.descend(0, &mut state);
            return state.found;
        }

        // Branches in lexicographic order: courses 0..n, then Unassigned.
        let n = self.instance.n_courses();
        let branches: Vec<Option<u32>> = (0..n as u32).map(Some).chain([None]).collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("worker pool");
        let per_branch: Vec<Vec<Vec<Option<u32>>>> = pool.install(|| {
            branches
                .par_iter()
                .map(|&choice| {
                    let mut state = self.fresh_state();
                    match choice {
                        Some(c) => {
                            let c = c as usize;
                            if self.capacities[c] == 0 || self.instance.valuation(c, 0) == 0 {
                                return Vec::new();
                            }
                            state.remaining[c] -= 1;
                            state.seats_left -= 1;
                            state.assignment[0] = Some(c as u32);
                            self.descend(1, &mut state);
                        }
                        None => {
                            // First TA stays unassigned; depth-1 pruning
                            // rejects it when every TA is needed for seats.
                            self.descend(1, &mut state);
                        }
                    }
                    state.found
                })
                .collect()
        });
        let mut all = Vec::new();
        for found in per_branch {
            for f in found {
                all.push(f);
                if self.first_only && !all.is_empty() {
                    return all;
                }
            }
        }
        all
    }
}

/// Exhaustive search for one MEFE matching. Deterministic: returns the
/// lexicographically least solution (TA index major, course index minor,
/// Unassigned last).
pub fn solve_bruteforce(instance: &Instance) -> Result<SolverOutcome, SolverError> {
    solve_bruteforce_with(instance, &SolveOpts::default())
}

pub fn solve_bruteforce_with(
    instance: &Instance,
    opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    check_budget(instance, opts)?;
    let search = Search::new(instance, true);
    let found = search.run(opts.jobs);
    Ok(match found.into_iter().next() {
        Some(assignment) => SolverOutcome::Yes {
            matching: Matching::from_assignment(assignment),
            certified: instance.k(),
        },
        None => SolverOutcome::No,
    })
}

/// Every MEFE matching, in the deterministic order described above.
pub fn enumerate_all_mefe(instance: &Instance) -> Result<Vec<Matching>, SolverError> {
    enumerate_all_mefe_with(instance, &SolveOpts::default())
}

pub fn enumerate_all_mefe_with(
    instance: &Instance,
    opts: &SolveOpts,
) -> Result<Vec<Matching>, SolverError> {
    check_budget(instance, opts)?;
    let search = Search::new(instance, false);
    Ok(search
        .run(opts.jobs)
        .into_iter()
        .map(Matching::from_assignment)
        .collect())
}
