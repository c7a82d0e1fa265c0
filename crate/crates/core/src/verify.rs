//! The verifier: feasibility, course satisfaction, merit-based envy and weak
//! stability. `verify` never fails; it collects every violation so the CLI
//! can print full diagnostics.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Instance, Matching};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("course `{course}` holds {actual} TAs, capacity is {expected}")]
    CapacityMismatch {
        course: String,
        expected: u32,
        actual: usize,
    },
    #[error("matching is not feasible")]
    InfeasibleMatching,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    CapacityMismatch {
        course: String,
        expected: u32,
        actual: usize,
    },
    ZeroValuedAssignment {
        ta: String,
        course: String,
    },
    UnsatisfiedCourse {
        course: String,
        avg_util: Rational,
        threshold: Rational,
    },
    Envy {
        envier: String,
        envied: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub feasible: bool,
    /// Exact average utility per course, present for courses whose roster
    /// meets the capacity exactly.
    pub avg_utils: BTreeMap<String, Rational>,
    pub envy_pairs: Vec<(String, String)>,
    pub is_mefe: bool,
    pub violations: Vec<Violation>,
}

/// Exact `sum of valuations / capacity` for one course.
pub fn avg_util(
    instance: &Instance,
    matching: &Matching,
    course: usize,
) -> Result<Rational, VerifyError> {
    let c = instance.course(course);
    let roster: Vec<usize> = (0..instance.n_tas())
        .filter(|&t| matching.course_of(t) == Some(course))
        .collect();
    if roster.len() != c.capacity as usize {
        return Err(VerifyError::CapacityMismatch {
            course: c.id.clone(),
            expected: c.capacity,
            actual: roster.len(),
        });
    }
    let sum: u64 = roster.iter().map(|&t| c.valuations[t]).sum();
    Ok(Rational::from(sum) / Rational::from(c.capacity))
}

/// All ordered merit-based envy pairs `(envier, envied)`.
///
/// `t_i` envies `t_j` when `g_i(mu(t_j)) >= g_j(mu(t_j))` and
/// `u_i(mu(t_j)) > u_i(mu(t_i))`. Only assigned TAs can be envied; an
/// unassigned envier's own utility counts as 0.
pub fn envy_pairs(instance: &Instance, matching: &Matching) -> Vec<(usize, usize)> {
    let m = instance.n_tas();
    let mut pairs = Vec::new();
    for envier in 0..m {
        let own_utility = matching
            .course_of(envier)
            .map_or(0, |c| instance.utility(envier, c));
        for envied in 0..m {
            if envier == envied {
                continue;
            }
            let Some(course) = matching.course_of(envied) else {
                continue;
            };
            if instance.utility(envier, course) > own_utility
                && instance.grade(envier, course) >= instance.grade(envied, course)
            {
                pairs.push((envier, envied));
            }
        }
    }
    pairs
}

pub fn verify(instance: &Instance, matching: &Matching) -> VerificationReport {
    let mut violations = Vec::new();
    let mut feasible = true;
    let rosters = matching.rosters(instance);

    for (cix, roster) in rosters.iter().enumerate() {
        let course = instance.course(cix);
        if roster.len() != course.capacity as usize {
            feasible = false;
            violations.push(Violation::CapacityMismatch {
                course: course.id.clone(),
                expected: course.capacity,
                actual: roster.len(),
            });
        }
        for &t in roster {
            if course.valuations[t] == 0 {
                feasible = false;
                violations.push(Violation::ZeroValuedAssignment {
                    ta: instance.ta(t).id.clone(),
                    course: course.id.clone(),
                });
            }
        }
    }

    let mut avg_utils = BTreeMap::new();
    let mut all_satisfied = true;
    for (cix, roster) in rosters.iter().enumerate() {
        let course = instance.course(cix);
        if roster.len() != course.capacity as usize {
            all_satisfied = false;
            continue;
        }
        let sum: u64 = roster.iter().map(|&t| course.valuations[t]).sum();
        let avg = Rational::from(sum) / Rational::from(course.capacity);
        avg_utils.insert(course.id.clone(), avg);
        if avg < instance.k() {
            all_satisfied = false;
            violations.push(Violation::UnsatisfiedCourse {
                course: course.id.clone(),
                avg_util: avg,
                threshold: instance.k(),
            });
        }
    }

    let envy = envy_pairs(instance, matching);
    for &(envier, envied) in &envy {
        violations.push(Violation::Envy {
            envier: instance.ta(envier).id.clone(),
            envied: instance.ta(envied).id.clone(),
        });
    }

    VerificationReport {
        feasible,
        avg_utils,
        is_mefe: feasible && all_satisfied && envy.is_empty(),
        envy_pairs: envy
            .iter()
            .map(|&(a, b)| (instance.ta(a).id.clone(), instance.ta(b).id.clone()))
            .collect(),
        violations,
    }
}

/// Allocation-free MEFE check over a raw assignment vector, used in the hot
/// enumeration loops. Must agree with `verify(...).is_mefe`; the equivalence
/// is property-tested.
pub fn verify_quick(instance: &Instance, assignment: &[Option<u32>]) -> bool {
    verify_quick_at(instance, assignment, instance.k())
}

/// Same check against an explicit satisfaction threshold (the relaxed
/// guarantee of the approximation solver).
pub fn verify_quick_at(instance: &Instance, assignment: &[Option<u32>], k: Rational) -> bool {
    let n = instance.n_courses();
    let m = instance.n_tas();
    debug_assert_eq!(assignment.len(), m);

    let mut counts = vec![0usize; n];
    let mut sums = vec![0u64; n];
    for t in 0..m {
        if let Some(c) = assignment[t] {
            let c = c as usize;
            let v = instance.valuation(c, t);
            if v == 0 {
                return false;
            }
            counts[c] += 1;
            sums[c] += v;
        }
    }
    for c in 0..n {
        let cap = instance.course(c).capacity;
        if counts[c] != cap as usize {
            return false;
        }
        // sum / cap >= k  <=>  sum * k.den >= k.num * cap, all exact in i128.
        let lhs = sums[c] as i128 * k.denom() as i128;
        let rhs = k.numer() as i128 * cap as i128;
        if lhs < rhs {
            return false;
        }
    }
    for envier in 0..m {
        let own = assignment[envier].map_or(0, |c| instance.utility(envier, c as usize));
        for envied in 0..m {
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

/// Weak stability of a feasible matching: no pair `(x, t)` where `t`
/// strictly prefers `x` to its assignment (unassigned utility 0) and
/// strictly out-grades some TA assigned to `x`.
pub fn is_weakly_stable(instance: &Instance, matching: &Matching) -> Result<bool, VerifyError> {
    let report = verify(instance, matching);
    if !report.feasible {
        return Err(VerifyError::InfeasibleMatching);
    }
    let rosters = matching.rosters(instance);
    for t in 0..instance.n_tas() {
        let own = matching.course_of(t).map_or(0, |c| instance.utility(t, c));
        for (cix, roster) in rosters.iter().enumerate() {
            if instance.utility(t, cix) <= own {
                continue;
            }
            let g = instance.grade(t, cix);
            if roster.iter().any(|&o| instance.grade(o, cix) < g) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
