//! Reusable matching engines: many-to-one deferred acceptance over strict
//! lists, maximum-weight strongly stable matching for one-sided ties with
//! 0/1 weights, and maximum bipartite matching.
//!
//! A `PreferenceSystem` has a proposing left side (capacity 1 each) and a
//! right side with capacities. Preference lists are sequences of tie groups;
//! strict lists have singleton groups. Acceptability is mutual by
//! construction.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("preference lists contain ties")]
    TiesPresent,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("system is malformed: {0}")]
    Malformed(String),
    #[error("search budget of {0} nodes exceeded")]
    SearchBudget(u64),
}

#[derive(Debug, Clone)]
pub struct PreferenceSystem {
    /// Tie-group lists of right indices, one per left agent.
    left: Vec<Vec<Vec<usize>>>,
    /// Tie-group lists of left indices, one per right agent.
    right: Vec<Vec<Vec<usize>>>,
    right_capacity: Vec<u32>,
    /// Group rank of r in l's list; usize::MAX when unacceptable.
    rank_left: Vec<Vec<usize>>,
    /// Group rank of l in r's list; usize::MAX when unacceptable.
    rank_right: Vec<Vec<usize>>,
    /// 0/1 weight per acceptable pair, defaulting to 1.
    weight: Vec<Vec<u8>>,
}

impl PreferenceSystem {
    pub fn new(
        left: Vec<Vec<Vec<usize>>>,
        right: Vec<Vec<Vec<usize>>>,
        right_capacity: Vec<u32>,
    ) -> Result<Self, EngineError> {
        let nl = left.len();
        let nr = right.len();
        if right_capacity.len() != nr {
            return Err(EngineError::Malformed(
                "capacity list length mismatch".into(),
            ));
        }
        if right_capacity.contains(&0) {
            return Err(EngineError::Malformed("zero capacity".into()));
        }
        let rank_of = |lists: &[Vec<Vec<usize>>],
                       other: usize|
         -> Result<Vec<Vec<usize>>, EngineError> {
            lists
                .iter()
                .map(|groups| {
                    let mut ranks = vec![usize::MAX; other];
                    for (gix, group) in groups.iter().enumerate() {
                        for &member in group {
                            if member >= other {
                                return Err(EngineError::Malformed(
                                    "preference entry out of range".into(),
                                ));
                            }
                            if ranks[member] != usize::MAX {
                                return Err(EngineError::Malformed("agent listed twice".into()));
                            }
                            ranks[member] = gix;
                        }
                    }
                    Ok(ranks)
                })
                .collect()
        };
        let rank_left = rank_of(&left, nr)?;
        let rank_right = rank_of(&right, nl)?;
        for l in 0..nl {
            for r in 0..nr {
                if (rank_left[l][r] == usize::MAX) != (rank_right[r][l] == usize::MAX) {
                    return Err(EngineError::Malformed(format!(
                        "acceptability not mutual for pair ({l}, {r})"
                    )));
                }
            }
        }
        let weight = rank_left
            .iter()
            .map(|row| row.iter().map(|&rk| u8::from(rk != usize::MAX)).collect())
            .collect();
        Ok(PreferenceSystem {
            left,
            right,
            right_capacity,
            rank_left,
            rank_right,
            weight,
        })
    }

    pub fn set_weight(&mut self, l: usize, r: usize, w: u8) -> Result<(), EngineError> {
        if w > 1 {
            return Err(EngineError::PreconditionViolated(
                "weights must be 0 or 1".into(),
            ));
        }
        if self.rank_left[l][r] == usize::MAX {
            return Err(EngineError::Malformed("weight on unacceptable pair".into()));
        }
        self.weight[l][r] = w;
        Ok(())
    }

    pub fn left_count(&self) -> usize {
        self.left.len()
    }

    pub fn right_count(&self) -> usize {
        self.right.len()
    }

    fn acceptable(&self, l: usize, r: usize) -> bool {
        self.rank_left[l][r] != usize::MAX
    }

    fn has_ties(&self) -> bool {
        self.left
            .iter()
            .chain(self.right.iter())
            .any(|groups| groups.iter().any(|g| g.len() > 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineMatching {
    pub left_to_right: Vec<Option<usize>>,
    /// Right-side rosters, each ascending by left index.
    pub rosters: Vec<Vec<usize>>,
}

impl EngineMatching {
    fn from_assignment(left_to_right: Vec<Option<usize>>, nr: usize) -> Self {
        let mut rosters = vec![Vec::new(); nr];
        for (l, r) in left_to_right.iter().enumerate() {
            if let Some(r) = r {
                rosters[*r].push(l);
            }
        }
        EngineMatching {
            left_to_right,
            rosters,
        }
    }

    pub fn right_saturated(&self, system: &PreferenceSystem) -> bool {
        self.rosters
            .iter()
            .zip(&system.right_capacity)
            .all(|(roster, &cap)| roster.len() == cap as usize)
    }
}

/// Many-to-one deferred acceptance, left side proposing. Requires strict
/// lists on both sides; produces the proposer-optimal stable matching.
pub fn deferred_acceptance(system: &PreferenceSystem) -> Result<EngineMatching, EngineError> {
    if system.has_ties() {
        return Err(EngineError::TiesPresent);
    }
    let nl = system.left_count();
    let nr = system.right_count();
    let mut next_choice = vec![0usize; nl];
    let mut held: Vec<Option<usize>> = vec![None; nl];
    let mut rosters: Vec<Vec<usize>> = vec![Vec::new(); nr];
    let mut queue: std::collections::VecDeque<usize> = (0..nl).collect();

    while let Some(l) = queue.pop_front() {
        let prefs = &system.left[l];
        let mut placed = false;
        while next_choice[l] < prefs.len() {
            let r = prefs[next_choice[l]][0];
            next_choice[l] += 1;
            let cap = system.right_capacity[r] as usize;
            if rosters[r].len() < cap {
                rosters[r].push(l);
                held[l] = Some(r);
                placed = true;
                break;
            }
            // Full: bump the worst-ranked holder if l beats them.
            let (worst_pos, &worst) = rosters[r]
                .iter()
                .enumerate()
                .max_by_key(|(_, &h)| system.rank_right[r][h])
                .expect("roster non-empty");
            if system.rank_right[r][l] < system.rank_right[r][worst] {
                rosters[r][worst_pos] = l;
                held[worst] = None;
                queue.push_back(worst);
                held[l] = Some(r);
                placed = true;
                break;
            }
        }
        let _ = placed;
    }
    for roster in &mut rosters {
        roster.sort_unstable();
    }
    Ok(EngineMatching {
        left_to_right: held,
        rosters,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StronglyStableOutcome {
    Found {
        matching: EngineMatching,
        total_weight: u64,
    },
    NoStronglyStable,
}

/// A pair strongly blocks when one side strictly improves and the other
/// weakly improves (indifference counts, unmatched counts).
fn strongly_blocks(
    system: &PreferenceSystem,
    assignment: &[Option<usize>],
    right_holder: &[Option<usize>],
    l: usize,
    r: usize,
) -> bool {
    if assignment[l] == Some(r) {
        return false;
    }
    let (l_strict, l_weak) = match assignment[l] {
        None => (true, true),
        Some(cur) => {
            let newr = system.rank_left[l][r];
            let curr = system.rank_left[l][cur];
            (newr < curr, newr <= curr)
        }
    };
    let (r_strict, r_weak) = match right_holder[r] {
        None => (true, true),
        Some(cur) => {
            let newr = system.rank_right[r][l];
            let curr = system.rank_right[r][cur];
            (newr < curr, newr <= curr)
        }
    };
    (l_strict && r_weak) || (r_strict && l_weak)
}

fn is_strongly_stable(
    system: &PreferenceSystem,
    assignment: &[Option<usize>],
    right_holder: &[Option<usize>],
) -> bool {
    for l in 0..system.left_count() {
        for r in 0..system.right_count() {
            if system.acceptable(l, r) && strongly_blocks(system, assignment, right_holder, l, r) {
                return false;
            }
        }
    }
    true
}

const DEFAULT_SS_BUDGET: u64 = 20_000_000;

/// Maximum-weight strongly stable matching for unit capacities, strict left
/// lists and 0/1 weights. Exhaustive over matchings with a stability filter;
/// exact at the scale this artifact targets, guarded by a node budget.
pub fn strongly_stable_max_weight(
    system: &PreferenceSystem,
) -> Result<StronglyStableOutcome, EngineError> {
    strongly_stable_max_weight_with(system, DEFAULT_SS_BUDGET)
}

pub fn strongly_stable_max_weight_with(
    system: &PreferenceSystem,
    budget: u64,
) -> Result<StronglyStableOutcome, EngineError> {
    if system.left.iter().any(|g| g.iter().any(|t| t.len() > 1)) {
        return Err(EngineError::PreconditionViolated(
            "ties on the proposing side".into(),
        ));
    }
    if system.right_capacity.iter().any(|&c| c != 1) {
        return Err(EngineError::PreconditionViolated(
            "capacities must all be 1".into(),
        ));
    }

    let nl = system.left_count();
    let nr = system.right_count();
    let mut assignment: Vec<Option<usize>> = vec![None; nl];
    let mut right_holder: Vec<Option<usize>> = vec![None; nr];
    let mut best: Option<(u64, Vec<Option<usize>>)> = None;
    let mut nodes: u64 = 0;

    // DFS over right agents in index order; each takes one acceptable left
    // partner or stays unmatched. First maximum found wins ties, so the
    // outcome is deterministic.
    fn descend(
        system: &PreferenceSystem,
        r: usize,
        assignment: &mut Vec<Option<usize>>,
        right_holder: &mut Vec<Option<usize>>,
        best: &mut Option<(u64, Vec<Option<usize>>)>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<(), EngineError> {
        *nodes += 1;
        if *nodes > budget {
            return Err(EngineError::SearchBudget(budget));
        }
        if r == system.right_count() {
            if is_strongly_stable(system, assignment, right_holder) {
                let weight: u64 = assignment
                    .iter()
                    .enumerate()
                    .filter_map(|(l, m)| m.map(|r| system.weight[l][r] as u64))
                    .sum();
                if best.as_ref().is_none_or(|(w, _)| weight > *w) {
                    *best = Some((weight, assignment.clone()));
                }
            }
            return Ok(());
        }
        for group in &system.right[r] {
            let l = group[0];
            if assignment[l].is_some() {
                continue;
            }
            assignment[l] = Some(r);
            right_holder[r] = Some(l);
            descend(system, r + 1, assignment, right_holder, best, nodes, budget)?;
            assignment[l] = None;
            right_holder[r] = None;
        }
        descend(system, r + 1, assignment, right_holder, best, nodes, budget)
    }

    // Right lists may have ties; flatten to individual candidates first.
    let flat = PreferenceSystem {
        right: system
            .right
            .iter()
            .map(|groups| {
                groups
                    .iter()
                    .flat_map(|g| g.iter().map(|&l| vec![l]))
                    .collect()
            })
            .collect(),
        ..system.clone()
    };

    descend(
        &flat,
        0,
        &mut assignment,
        &mut right_holder,
        &mut best,
        &mut nodes,
        budget,
    )?;

    Ok(match best {
        Some((total_weight, assignment)) => StronglyStableOutcome::Found {
            matching: EngineMatching::from_assignment(assignment, nr),
            total_weight,
        },
        None => StronglyStableOutcome::NoStronglyStable,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxMatching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    pub size: usize,
}

impl MaxMatching {
    pub fn left_saturated(&self) -> bool {
        self.left_to_right.iter().all(Option::is_some)
    }

    pub fn right_saturated(&self) -> bool {
        self.right_to_left.iter().all(Option::is_some)
    }
}

/// Maximum-cardinality bipartite matching (augmenting paths over the left
/// side in index order; deterministic).
pub fn max_bipartite_matching(left_adj: &[Vec<usize>], right_count: usize) -> MaxMatching {
    let nl = left_adj.len();
    let mut right_to_left: Vec<Option<usize>> = vec![None; right_count];
    let mut size = 0;

    fn augment(
        l: usize,
        left_adj: &[Vec<usize>],
        right_to_left: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &r in &left_adj[l] {
            if visited[r] {
                continue;
            }
            visited[r] = true;
            match right_to_left[r] {
                None => {
                    right_to_left[r] = Some(l);
                    return true;
                }
                Some(other) => {
                    if augment(other, left_adj, right_to_left, visited) {
                        right_to_left[r] = Some(l);
                        return true;
                    }
                }
            }
        }
        false
    }

    for l in 0..nl {
        let mut visited = vec![false; right_count];
        if augment(l, left_adj, &mut right_to_left, &mut visited) {
            size += 1;
        }
    }
    let mut left_to_right = vec![None; nl];
    for (r, l) in right_to_left.iter().enumerate() {
        if let Some(l) = l {
            left_to_right[*l] = Some(r);
        }
    }
    MaxMatching {
        left_to_right,
        right_to_left,
        size,
    }
}
