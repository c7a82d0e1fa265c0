//! Parameterized solvers: exact search over valid seat vectors (FPT in the
//! number of courses for constant valuation types and capacities) and the
//! (1-eps)-approximation over geometric valuation buckets.

use num::{BigInt, BigRational, One};

use crate::instance::{Instance, Matching};
use crate::outcome::{SolveOpts, SolverError, SolverOutcome};
use crate::polycases::CaseProfile;
use crate::rational::Rational;
use crate::seatmatch::{solve_seats, SeatGroup, VectorOdometer};
use crate::verify::verify_quick;

/// A per-course seat vector: `counts[j]` TAs of the j-th valuation class
/// (exact solver) or the j-th bucket (approximation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeatVector {
    pub counts: Vec<u32>,
}

/// All vectors with `sum(counts) = capacity` and, when `threshold` is set,
/// `sum(counts[j] * class_value[j]) >= threshold * capacity`, in
/// lexicographic order. `class_sizes[j]` caps each count by the number of
/// TAs actually available in the class.
fn valid_vectors(
    capacity: u32,
    class_values: &[u64],
    class_sizes: &[usize],
    threshold: Option<Rational>,
) -> Vec<SeatVector> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; class_values.len()];
    fn rec(
        j: usize,
        left: u32,
        counts: &mut Vec<u32>,
        class_values: &[u64],
        class_sizes: &[usize],
        out: &mut Vec<SeatVector>,
    ) {
        if j == counts.len() {
            if left == 0 {
                out.push(SeatVector {
                    counts: counts.clone(),
                });
            }
            return;
        }
        let max_here = (class_sizes[j] as u32).min(left);
        for a in 0..=max_here {
            counts[j] = a;
            rec(j + 1, left - a, counts, class_values, class_sizes, out);
        }
        counts[j] = 0;
    }
    rec(
        0,
        capacity,
        &mut counts,
        class_values,
        class_sizes,
        &mut out,
    );
    if let Some(k) = threshold {
        let need_num = k.numer() as i128 * capacity as i128;
        let need_den = k.denom() as i128;
        out.retain(|v| {
            let total: i128 = v
                .counts
                .iter()
                .zip(class_values)
                .map(|(&a, &q)| a as i128 * q as i128)
                .sum();
            total * need_den >= need_num
        });
    }
    out
}

struct CourseClasses {
    /// Distinct positive valuations, descending.
    values: Vec<u64>,
    /// TA indices per class.
    members: Vec<Vec<usize>>,
}

fn course_classes(instance: &Instance, course: usize) -> CourseClasses {
    let m = instance.n_tas();
    let mut values: Vec<u64> = (0..m)
        .map(|t| instance.valuation(course, t))
        .filter(|&v| v > 0)
        .collect();
    values.sort_unstable_by(|a, b| b.cmp(a));
    values.dedup();
    let members = values
        .iter()
        .map(|&q| {
            (0..m)
                .filter(|&t| instance.valuation(course, t) == q)
                .collect()
        })
        .collect();
    CourseClasses { values, members }
}

fn distinctness_guard(instance: &Instance) -> Option<SolverOutcome> {
    let profile = CaseProfile::of(instance);
    if !profile.all_grades_distinct() {
        return Some(SolverOutcome::not_applicable(
            "a course repeats a grade among its positively valued TAs",
        ));
    }
    if !profile.all_utilities_distinct() {
        return Some(SolverOutcome::not_applicable(
            "a TA repeats a positive utility",
        ));
    }
    None
}

fn groups_for_combo(classes: &[CourseClasses], combo: &[&SeatVector]) -> Vec<SeatGroup> {
    let mut groups = Vec::new();
    for (course, (cc, vector)) in classes.iter().zip(combo).enumerate() {
        for (j, &count) in vector.counts.iter().enumerate() {
            if count > 0 {
                groups.push(SeatGroup {
                    course,
                    seats: count,
                    acceptable: cc.members[j].clone(),
                });
            }
        }
    }
    groups
}

/// Exact FPT(n) solver: guesses, per course, how many assigned TAs carry
/// each distinct positive valuation, then reduces each guess to a stable
/// seat assignment.
pub fn solve_fpt_n(instance: &Instance, opts: &SolveOpts) -> Result<SolverOutcome, SolverError> {
    if let Some(na) = distinctness_guard(instance) {
        return Ok(na);
    }

    // (c_i + 1)^{r_i} over all courses bounds the combination count.
    let mut bound: u128 = 1;
    for c in 0..instance.n_courses() {
        let r_i = course_classes(instance, c).values.len() as u32;
        let base = instance.course(c).capacity as u128 + 1;
        bound = bound.saturating_mul(base.saturating_pow(r_i));
    }
    if bound > opts.budgets.seat_vectors as u128 {
        return Ok(SolverOutcome::not_applicable(format!(
            "{bound} seat-vector combinations exceed the budget"
        )));
    }

    let classes: Vec<CourseClasses> = (0..instance.n_courses())
        .map(|c| course_classes(instance, c))
        .collect();
    let per_course: Vec<Vec<SeatVector>> = classes
        .iter()
        .enumerate()
        .map(|(c, cc)| {
            let sizes: Vec<usize> = cc.members.iter().map(Vec::len).collect();
            valid_vectors(
                instance.course(c).capacity,
                &cc.values,
                &sizes,
                Some(instance.k()),
            )
        })
        .collect();
    if per_course.iter().any(Vec::is_empty) {
        return Ok(SolverOutcome::No);
    }

    for combo in VectorOdometer::new(&per_course) {
        let groups = groups_for_combo(&classes, &combo);
        if let Some(matching) = solve_seats(instance, &groups, opts.budgets.leaf_visits, &|mu| {
            verify_quick(instance, mu.assignment())
        })? {
            debug_assert!(verify_quick(instance, matching.assignment()));
            return Ok(SolverOutcome::Yes {
                matching,
                certified: instance.k(),
            });
        }
    }
    Ok(SolverOutcome::No)
}

/// Geometric buckets `[(1+eps')^{j-1}, (1+eps')^j)` covering 1..=max_value,
/// with exact rational boundaries.
struct Buckets {
    /// `bounds[j] = (1+eps')^j`, j = 0..=count.
    bounds: Vec<BigRational>,
}

impl Buckets {
    fn covering(base: &BigRational, max_value: u64, limit: u64) -> Option<Buckets> {
        let target = BigRational::from_integer(BigInt::from(max_value + 1));
        let mut bounds = vec![BigRational::one()];
        while *bounds.last().unwrap() < target {
            if bounds.len() as u64 > limit {
                return None;
            }
            let next = bounds.last().unwrap() * base;
            bounds.push(next);
        }
        Some(Buckets { bounds })
    }

    fn count(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Bucket index (0-based) of a positive value.
    fn bucket_of(&self, value: u64) -> usize {
        let v = BigRational::from_integer(BigInt::from(value));
        for j in 1..self.bounds.len() {
            if v < self.bounds[j] {
                return j - 1;
            }
        }
        unreachable!("value beyond the covering range")
    }
}

/// (1-eps)-approximation of course satisfaction: guesses per-course bucket
/// counts, matches seats stably, and keeps the first assignment that is
/// feasible, exactly envy-free, and satisfies every course at `(1-eps)k`.
pub fn solve_approx(
    instance: &Instance,
    epsilon: Rational,
    opts: &SolveOpts,
) -> Result<SolverOutcome, SolverError> {
    if epsilon <= Rational::zero() || epsilon >= Rational::one() {
        return Ok(SolverOutcome::not_applicable(
            "epsilon must lie strictly between 0 and 1",
        ));
    }
    if let Some(na) = distinctness_guard(instance) {
        return Ok(na);
    }

    // eps' = 1/(1-eps) - 1, so 1 + eps' = 1/(1-eps).
    let one_minus = Rational::one() - epsilon;
    let base = BigRational::new(
        BigInt::from(one_minus.denom()),
        BigInt::from(one_minus.numer()),
    );
    let relaxed = one_minus * instance.k();

    let m = instance.n_tas();
    let mut classes = Vec::new();
    let mut per_course = Vec::new();
    for course in instance.courses() {
        let max_value = (0..m).map(|t| course.valuations[t]).max().unwrap_or(0);
        if max_value == 0 {
            // No positive valuations: the course cannot be filled.
            return Ok(SolverOutcome::No);
        }
        let Some(buckets) = Buckets::covering(&base, max_value, opts.budgets.seat_vectors) else {
            return Ok(SolverOutcome::not_applicable(
                "bucket count exceeds the seat-vector budget",
            ));
        };
        let mut members = vec![Vec::new(); buckets.count()];
        for t in 0..m {
            let v = course.valuations[t];
            if v > 0 {
                members[buckets.bucket_of(v)].push(t);
            }
        }
        let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
        // Bucket lower bounds are not needed as values here: vectors are
        // only constrained to sum to the capacity; the threshold is checked
        // on the mapped matching.
        let values = vec![0u64; buckets.count()];
        let vectors = valid_vectors(course.capacity, &values, &sizes, None);
        per_course.push(vectors);
        classes.push(CourseClasses { values, members });
    }

    let mut combos: u128 = 1;
    for v in &per_course {
        combos = combos.saturating_mul(v.len().max(1) as u128);
    }
    if combos > opts.budgets.seat_vectors as u128 {
        return Ok(SolverOutcome::not_applicable(format!(
            "{combos} bucket-vector combinations exceed the budget"
        )));
    }
    if per_course.iter().any(Vec::is_empty) {
        return Ok(SolverOutcome::No);
    }

    let check = |mu: &Matching| verify_relaxed(instance, mu.assignment(), relaxed);
    for combo in VectorOdometer::new(&per_course) {
        let groups = groups_for_combo(&classes, &combo);
        if let Some(matching) = solve_seats(instance, &groups, opts.budgets.leaf_visits, &check)? {
            return Ok(SolverOutcome::Yes {
                matching,
                certified: relaxed,
            });
        }
    }
    Ok(SolverOutcome::No)
}

/// Feasibility and exact envy-freeness at the relaxed satisfaction
/// threshold.
fn verify_relaxed(instance: &Instance, assignment: &[Option<u32>], threshold: Rational) -> bool {
    crate::verify::verify_quick_at(instance, assignment, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::solve_bruteforce;
    use crate::verify::verify;

    #[test]
    fn valid_vector_generation_respects_both_constraints() {
        // capacity 2, classes valued 3 and 1, threshold 2: a*3 + b*1 >= 4.
        let vectors = valid_vectors(2, &[3, 1], &[5, 5], Some(Rational::from_int(2)));
        assert_eq!(
            vectors,
            vec![
                SeatVector { counts: vec![1, 1] },
                SeatVector { counts: vec![2, 0] }
            ]
        );
    }

    #[test]
    fn vector_count_never_exceeds_capacity_plus_one_power() {
        let vectors = valid_vectors(3, &[5, 2, 1], &[10, 10, 10], None);
        assert!(vectors.len() as u64 <= 4u64.pow(3));
        for v in &vectors {
            assert_eq!(v.counts.iter().sum::<u32>(), 3);
        }
    }

    #[test]
    fn single_class_course_reduces_to_one_vector() {
        let inst = fixtures::one_course(&[("t1", 2, "3"), ("t2", 2, "2"), ("t3", 2, "1")], 2, "2");
        let outcome = solve_fpt_n(&inst, &SolveOpts::default()).unwrap();
        assert!(outcome.is_yes());
        let mu = outcome.matching().unwrap();
        assert!(verify(&inst, mu).is_mefe);
    }

    #[test]
    fn unreachable_threshold_is_no() {
        let inst = fixtures::one_course(&[("t1", 2, "3"), ("t2", 1, "2")], 1, "5");
        assert!(solve_fpt_n(&inst, &SolveOpts::default()).unwrap().is_no());
    }

    #[test]
    fn fpt_n_handles_the_cross_class_leak_instance() {
        let inst = fixtures::seat_leak_instance();
        let oracle = solve_bruteforce(&inst).unwrap();
        let fptn = solve_fpt_n(&inst, &SolveOpts::default()).unwrap();
        assert_eq!(oracle.is_yes(), fptn.is_yes());
        assert!(fptn.is_yes());
    }

    #[test]
    fn bucket_boundaries_partition_positive_values() {
        // eps = 1/2 gives base 2: buckets [1,2), [2,4), [4,8), ...
        let base = BigRational::from_integer(BigInt::from(2));
        let buckets = Buckets::covering(&base, 16, 1000).unwrap();
        assert_eq!(buckets.count(), 5);
        for v in 1..=16u64 {
            let j = buckets.bucket_of(v);
            let lo = &buckets.bounds[j];
            let hi = &buckets.bounds[j + 1];
            let bv = BigRational::from_integer(BigInt::from(v));
            assert!(*lo <= bv && bv < *hi);
        }
    }

    #[test]
    fn approx_on_uniform_values_is_exact() {
        let inst = fixtures::one_course(&[("t1", 4, "3"), ("t2", 4, "2"), ("t3", 4, "1")], 2, "4");
        let outcome =
            solve_approx(&inst, Rational::new(1, 2).unwrap(), &SolveOpts::default()).unwrap();
        let mu = outcome.matching().expect("uniform yes-instance");
        let report = verify(&inst, mu);
        assert!(report.feasible && report.envy_pairs.is_empty());
        assert!(report
            .avg_utils
            .values()
            .all(|a| *a >= Rational::from_int(4)));
    }

    #[test]
    fn approx_rejects_epsilon_at_bounds() {
        let inst = fixtures::figure_instance();
        for eps in [Rational::zero(), Rational::one()] {
            assert!(solve_approx(&inst, eps, &SolveOpts::default())
                .unwrap()
                .is_not_applicable());
        }
    }
}
