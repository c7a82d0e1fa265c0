//! Shared machinery for the solvers that guess per-course seat layouts and
//! reduce to stable matching: courses split into seat groups, TAs propose by
//! utility, seats rank by grade.
//!
//! A seat-group layout alone cannot see envy between different valuation
//! classes of the same course (a TA whose class has no seats never appears
//! in the reduced instance), so a stable saturating assignment may still map
//! to an envious matching. Every candidate is therefore checked against the
//! real verifier, and when both proposer orientations produce saturating but
//! failing assignments the search falls back to a budget-guarded exhaustive
//! scan of saturating assignments. If the proposer-side deferred acceptance
//! does not saturate the seats, no saturating assignment of this layout can
//! map to an envy-free matching at all (any such matching re-seats into a
//! stable saturating one), so the layout is dead.

use crate::engines::{deferred_acceptance, PreferenceSystem};
use crate::instance::{Instance, Matching};
use crate::outcome::SolverError;

#[derive(Debug, Clone)]
pub(crate) struct SeatGroup {
    pub course: usize,
    pub seats: u32,
    /// TA indices acceptable to every seat of this group.
    pub acceptable: Vec<usize>,
}

struct SeatLayout {
    /// Course of each seat.
    seat_course: Vec<usize>,
    /// Acceptable TAs per seat, ranked by grade descending.
    seat_prefs: Vec<Vec<usize>>,
    /// Acceptable seats per TA, ranked by course utility descending, then
    /// group order, then seat index (a common order for all TAs).
    ta_prefs: Vec<Vec<usize>>,
}

fn build_layout(instance: &Instance, groups: &[SeatGroup]) -> SeatLayout {
    let mut seat_course = Vec::new();
    let mut seat_group = Vec::new();
    for (gix, g) in groups.iter().enumerate() {
        for _ in 0..g.seats {
            seat_course.push(g.course);
            seat_group.push(gix);
        }
    }
    let seat_count = seat_course.len();

    let mut seat_prefs = vec![Vec::new(); seat_count];
    for (six, &gix) in seat_group.iter().enumerate() {
        let g = &groups[gix];
        let mut members = g.acceptable.clone();
        let course = g.course;
        members.sort_by(|&a, &b| {
            instance
                .grade(b, course)
                .cmp(&instance.grade(a, course))
                .then(a.cmp(&b))
        });
        seat_prefs[six] = members;
    }

    let mut ta_prefs = vec![Vec::new(); instance.n_tas()];
    for t in 0..instance.n_tas() {
        let mut seats: Vec<usize> = (0..seat_count)
            .filter(|&s| seat_prefs[s].contains(&t))
            .collect();
        seats.sort_by(|&a, &b| {
            instance
                .utility(t, seat_course[b])
                .cmp(&instance.utility(t, seat_course[a]))
                .then(seat_group[a].cmp(&seat_group[b]))
                .then(a.cmp(&b))
        });
        ta_prefs[t] = seats;
    }

    SeatLayout {
        seat_course,
        seat_prefs,
        ta_prefs,
    }
}

fn map_to_matching(layout: &SeatLayout, ta_to_seat: &[Option<usize>]) -> Matching {
    let assignment = ta_to_seat
        .iter()
        .map(|s| s.map(|s| layout.seat_course[s] as u32))
        .collect();
    Matching::from_assignment(assignment)
}

/// Searches for a seat-saturating assignment whose mapped matching passes
/// `check`. Deterministic. `Ok(None)` definitively means no saturating
/// assignment of this layout maps to a passing matching.
pub(crate) fn solve_seats(
    instance: &Instance,
    groups: &[SeatGroup],
    node_budget: u64,
    check: &dyn Fn(&Matching) -> bool,
) -> Result<Option<Matching>, SolverError> {
    let layout = build_layout(instance, groups);
    let seat_count = layout.seat_course.len();
    let m = instance.n_tas();

    // TA-proposing deferred acceptance (TA-optimal stable assignment).
    let strictify = |lists: &[Vec<usize>]| -> Vec<Vec<Vec<usize>>> {
        lists
            .iter()
            .map(|l| l.iter().map(|&x| vec![x]).collect())
            .collect()
    };
    let system = PreferenceSystem::new(
        strictify(&layout.ta_prefs),
        strictify(&layout.seat_prefs),
        vec![1; seat_count],
    )
    .map_err(|e| SolverError::Engine(e.to_string()))?;
    let ta_opt = deferred_acceptance(&system).map_err(|e| SolverError::Engine(e.to_string()))?;
    if !ta_opt.right_saturated(&system) {
        return Ok(None);
    }
    let mu = map_to_matching(&layout, &ta_opt.left_to_right);
    if check(&mu) {
        return Ok(Some(mu));
    }

    // Seat-proposing orientation (seat-optimal stable assignment).
    if seat_count > 0 {
        let system_rev = PreferenceSystem::new(
            strictify(&layout.seat_prefs),
            strictify(&layout.ta_prefs),
            vec![1; m],
        )
        .map_err(|e| SolverError::Engine(e.to_string()))?;
        let seat_opt =
            deferred_acceptance(&system_rev).map_err(|e| SolverError::Engine(e.to_string()))?;
        if seat_opt.left_to_right.iter().all(Option::is_some) {
            let mut ta_to_seat = vec![None; m];
            for (s, t) in seat_opt.left_to_right.iter().enumerate() {
                if let Some(t) = t {
                    ta_to_seat[*t] = Some(s);
                }
            }
            let mu = map_to_matching(&layout, &ta_to_seat);
            if check(&mu) {
                return Ok(Some(mu));
            }
        }
    }

    // Exhaustive fallback over saturating assignments, seat by seat.
    let mut ta_to_seat: Vec<Option<usize>> = vec![None; m];
    let mut nodes: u64 = 0;
    fn descend(
        layout: &SeatLayout,
        seat: usize,
        ta_to_seat: &mut Vec<Option<usize>>,
        nodes: &mut u64,
        budget: u64,
        check: &dyn Fn(&Matching) -> bool,
    ) -> Result<Option<Matching>, SolverError> {
        *nodes += 1;
        if *nodes > budget {
            return Err(SolverError::ResourceBound {
                estimate: *nodes as u128,
                budget,
            });
        }
        if seat == layout.seat_course.len() {
            let mu = map_to_matching(layout, ta_to_seat);
            return Ok(if check(&mu) { Some(mu) } else { None });
        }
        for &t in &layout.seat_prefs[seat] {
            if ta_to_seat[t].is_some() {
                continue;
            }
            ta_to_seat[t] = Some(seat);
            let found = descend(layout, seat + 1, ta_to_seat, nodes, budget, check)?;
            ta_to_seat[t] = None;
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    descend(&layout, 0, &mut ta_to_seat, &mut nodes, node_budget, check)
}

/// Odometer over one valid vector choice per course. `per_course` must be
/// non-empty lists; emits the cartesian product in lexicographic order with
/// the first course as the most significant digit.
pub(crate) struct VectorOdometer<'a, T> {
    per_course: &'a [Vec<T>],
    next: Option<Vec<usize>>,
}

impl<'a, T> VectorOdometer<'a, T> {
    pub fn new(per_course: &'a [Vec<T>]) -> Self {
        let next = if per_course.iter().all(|v| !v.is_empty()) {
            Some(vec![0; per_course.len()])
        } else {
            None
        };
        VectorOdometer { per_course, next }
    }
}

impl<'a, T> Iterator for VectorOdometer<'a, T> {
    type Item = Vec<&'a T>;

    fn next(&mut self) -> Option<Self::Item> {
        let ix = self.next.as_ref()?;
        let item = ix
            .iter()
            .enumerate()
            .map(|(c, &i)| &self.per_course[c][i])
            .collect();
        // Increment from the last course.
        let mut ix = self.next.take().unwrap();
        for c in (0..ix.len()).rev() {
            ix[c] += 1;
            if ix[c] < self.per_course[c].len() {
                self.next = Some(ix);
                return Some(item);
            }
            ix[c] = 0;
        }
        if ix.is_empty() {
            // Zero courses: a single empty combination.
            self.next = None;
        }
        Some(item)
    }
}
