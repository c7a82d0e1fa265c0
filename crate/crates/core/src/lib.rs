//! Merit-based envy-free egalitarian (MEFE) matching of TAs to courses:
//! exact data model and verifier, a brute-force oracle, stable-matching
//! engines, the polynomial special-case solvers with a dispatcher,
//! parameterized and approximation solvers, constructive existence
//! procedures, and hardness-construction instance generators.
//!
//! A matching is MEFE when every course is filled to capacity through
//! positively valued pairs, each course's average valuation of its TAs
//! meets the threshold `k`, and no TA merit-envies another (higher-or-equal
//! grade in the envied TA's course plus strictly higher utility for it).
//! All grade and threshold arithmetic is exact rational.

pub mod engines;
pub mod existence;
pub mod fixtures;
pub mod graph;
pub mod instance;
pub mod oracle;
pub mod outcome;
pub mod paramsolvers;
pub mod polycases;
pub mod rational;
pub mod reductions;
mod seatmatch;
pub mod verify;

pub use instance::{CourseSpec, Instance, InstanceError, Matching, MatchingError, TaSpec};
pub use outcome::{Budgets, SolveOpts, SolverError, SolverOutcome};
pub use polycases::{dispatch, Dispatched, Strategy};
pub use rational::Rational;
pub use verify::{verify, VerificationReport};
