//! Solver outcome and shared run configuration.

use thiserror::Error;

use crate::instance::Matching;
use crate::rational::Rational;

/// Result of a solver run. `Yes` carries the matching and the threshold the
/// matching is certified against (the instance `k` for exact solvers,
/// `(1-eps)k` for the approximation, the construction's own bound for the
/// existence procedures).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverOutcome {
    Yes {
        matching: Matching,
        certified: Rational,
    },
    No,
    NotApplicable {
        reason: String,
    },
}

impl SolverOutcome {
    pub fn not_applicable(reason: impl Into<String>) -> Self {
        SolverOutcome::NotApplicable {
            reason: reason.into(),
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, SolverOutcome::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, SolverOutcome::No)
    }

    pub fn is_not_applicable(&self) -> bool {
        matches!(self, SolverOutcome::NotApplicable { .. })
    }

    pub fn matching(&self) -> Option<&Matching> {
        match self {
            SolverOutcome::Yes { matching, .. } => Some(matching),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("enumeration requires ~{estimate} visits, budget is {budget}")]
    ResourceBound { estimate: u128, budget: u64 },
    #[error("engine failure: {0}")]
    Engine(String),
}

/// Work limits. `leaf_visits` bounds exhaustive assignment enumeration
/// (`(n+1)^m` for the oracle); `seat_vectors` bounds the number of valid
/// seat-vector combinations the parameterized solvers may try.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub leaf_visits: u64,
    pub seat_vectors: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            leaf_visits: 100_000_000,
            seat_vectors: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOpts {
    pub budgets: Budgets,
    /// Worker count for parallelizable searches; 1 runs fully sequential and
    /// any value yields identical results.
    pub jobs: usize,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            budgets: Budgets::default(),
            jobs: 1,
        }
    }
}
