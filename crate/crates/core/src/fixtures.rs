//! Small hand-built instances shared by unit, integration and acceptance
//! tests.

use std::collections::BTreeMap;

use crate::instance::{CourseSpec, Instance, TaSpec};
use crate::rational::Rational;

fn assoc_u64(entries: &[(&str, u64)]) -> BTreeMap<String, u64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn assoc_rat(entries: &[(&str, &str)]) -> BTreeMap<String, Rational> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.parse().unwrap()))
        .collect()
}

/// The introductory 3-course / 3-TA example: course valuations double as
/// grades, TA tuples are utilities, every capacity is 1, k = 7. The matching
/// {t2->c1, t1->c2, t3->c3} is feasible and satisfying but t1 envies t2;
/// {t1->c1, t2->c2, t3->c3} is MEFE.
pub fn figure_instance() -> Instance {
    let courses = vec![
        CourseSpec {
            id: "c1".into(),
            capacity: 1,
            valuations: assoc_u64(&[("t1", 9), ("t2", 8), ("t3", 7)]),
        },
        CourseSpec {
            id: "c2".into(),
            capacity: 1,
            valuations: assoc_u64(&[("t1", 8), ("t2", 7), ("t3", 9)]),
        },
        CourseSpec {
            id: "c3".into(),
            capacity: 1,
            valuations: assoc_u64(&[("t1", 7), ("t2", 7), ("t3", 7)]),
        },
    ];
    let tas = vec![
        TaSpec {
            id: "t1".into(),
            utilities: assoc_u64(&[("c1", 9), ("c2", 8), ("c3", 8)]),
            grades: assoc_rat(&[("c1", "9"), ("c2", "8"), ("c3", "7")]),
        },
        TaSpec {
            id: "t2".into(),
            utilities: assoc_u64(&[("c1", 8), ("c2", 8), ("c3", 8)]),
            grades: assoc_rat(&[("c1", "8"), ("c2", "7"), ("c3", "7")]),
        },
        TaSpec {
            id: "t3".into(),
            utilities: assoc_u64(&[("c1", 8), ("c2", 8), ("c3", 8)]),
            grades: assoc_rat(&[("c1", "7"), ("c2", "9"), ("c3", "7")]),
        },
    ];
    Instance::new(Rational::from_int(7), courses, tas).unwrap()
}

/// One course `x` with the given `(ta id, valuation, grade)` rows, capacity
/// and threshold. Utilities are set equal to valuations.
pub fn one_course(rows: &[(&str, u64, &str)], capacity: u32, k: &str) -> Instance {
    let course = CourseSpec {
        id: "x".into(),
        capacity,
        valuations: rows.iter().map(|(t, v, _)| (t.to_string(), *v)).collect(),
    };
    let tas = rows
        .iter()
        .map(|(t, v, g)| TaSpec {
            id: t.to_string(),
            utilities: assoc_u64(&[("x", *v)]),
            grades: assoc_rat(&[("x", g)]),
        })
        .collect();
    Instance::new(k.parse().unwrap(), vec![course], tas).unwrap()
}

/// The classic non-existence example: one course of capacity 1, two TAs with
/// equal positive grades. Whoever is left out envies the other.
pub fn one_course_two_tas_equal_grades() -> Instance {
    one_course(&[("t1", 1, "1"), ("t2", 1, "1")], 1, "0")
}

/// A yes-instance on which the TA-optimal stable seat assignment for the
/// correct seat layout maps to an envious matching: courses x, y of capacity
/// 1 at k = 1; s and r carry value 3 at x and 2 at y, t carries value 1 at x
/// only; grades at x are s 3 > t 2 > r 1, at y r 2 > s 1; s prefers y, r
/// prefers x. {s->x, r->y} is MEFE, but rotating both men up yields
/// {s->y, r->x} in which t envies r.
pub fn seat_leak_instance() -> Instance {
    let courses = vec![
        CourseSpec {
            id: "x".into(),
            capacity: 1,
            valuations: assoc_u64(&[("s", 3), ("r", 3), ("t", 1)]),
        },
        CourseSpec {
            id: "y".into(),
            capacity: 1,
            valuations: assoc_u64(&[("s", 2), ("r", 2)]),
        },
    ];
    let tas = vec![
        TaSpec {
            id: "s".into(),
            utilities: assoc_u64(&[("x", 8), ("y", 9)]),
            grades: assoc_rat(&[("x", "3"), ("y", "1")]),
        },
        TaSpec {
            id: "r".into(),
            utilities: assoc_u64(&[("x", 9), ("y", 8)]),
            grades: assoc_rat(&[("x", "1"), ("y", "2")]),
        },
        TaSpec {
            id: "t".into(),
            utilities: assoc_u64(&[("x", 5)]),
            grades: assoc_rat(&[("x", "2")]),
        },
    ];
    Instance::new(Rational::one(), courses, tas).unwrap()
}
