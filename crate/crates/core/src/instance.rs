//! Instance and matching data model.
//!
//! An instance holds courses (capacity + integer valuations over TAs), TAs
//! (integer utilities and rational grades over courses) and the satisfaction
//! threshold `k`. Associations are stored densely by index; missing entries
//! mean zero. Instances are immutable after construction and all invariants
//! are enforced up front:
//!
//! * `v_x(t) = 0` exactly when `u_t(x) = 0`,
//! * identifiers unique per side, capacities positive,
//! * the number of TAs covers the total capacity (unless explicitly relaxed
//!   for negative test fixtures).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("duplicate course id `{0}`")]
    DuplicateCourse(String),
    #[error("duplicate ta id `{0}`")]
    DuplicateTa(String),
    #[error("course `{0}` has zero capacity")]
    ZeroCapacity(String),
    #[error("course `{course}` values unknown ta `{ta}`")]
    UnknownTa { course: String, ta: String },
    #[error("ta `{ta}` references unknown course `{course}`")]
    UnknownCourse { ta: String, course: String },
    #[error("course `{course}` and ta `{ta}` disagree on zero: v={valuation}, u={utility}")]
    ZeroConsistency {
        course: String,
        ta: String,
        valuation: u64,
        utility: u64,
    },
    #[error("negative grade for ta `{ta}` in course `{course}`")]
    NegativeGrade { ta: String, course: String },
    #[error("negative threshold k")]
    NegativeThreshold,
    #[error("total capacity {total_capacity} exceeds number of TAs {tas}")]
    CapacityDeficit { total_capacity: u64, tas: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("matching references unknown ta `{0}`")]
    UnknownTa(String),
    #[error("matching references unknown course `{0}`")]
    UnknownCourse(String),
    #[error("ta `{0}` assigned more than once")]
    DuplicateTa(String),
}

/// Input description of one course, association keyed by ta id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CourseSpec {
    pub id: String,
    pub capacity: u32,
    #[serde(default)]
    pub valuations: BTreeMap<String, u64>,
}

/// Input description of one TA, associations keyed by course id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaSpec {
    pub id: String,
    #[serde(default)]
    pub utilities: BTreeMap<String, u64>,
    #[serde(default)]
    pub grades: BTreeMap<String, Rational>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceWire {
    k: Rational,
    courses: Vec<CourseSpec>,
    tas: Vec<TaSpec>,
}

#[derive(Debug, Clone)]
pub struct Course {
    pub id: String,
    pub capacity: u32,
    /// Dense valuation row indexed by ta index.
    pub valuations: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Ta {
    pub id: String,
    /// Dense utility row indexed by course index.
    pub utilities: Vec<u64>,
    /// Dense grade row indexed by course index.
    pub grades: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    k: Rational,
    courses: Vec<Course>,
    tas: Vec<Ta>,
    course_ids: BTreeMap<String, usize>,
    ta_ids: BTreeMap<String, usize>,
}

impl Instance {
    pub fn new(
        k: Rational,
        courses: Vec<CourseSpec>,
        tas: Vec<TaSpec>,
    ) -> Result<Self, InstanceError> {
        Self::build(k, courses, tas, false)
    }

    /// Permits `m < sum of capacities`, which the model otherwise forbids.
    /// Intended only for negative test fixtures.
    pub fn new_with_capacity_deficit(
        k: Rational,
        courses: Vec<CourseSpec>,
        tas: Vec<TaSpec>,
    ) -> Result<Self, InstanceError> {
        Self::build(k, courses, tas, true)
    }

    fn build(
        k: Rational,
        courses: Vec<CourseSpec>,
        tas: Vec<TaSpec>,
        allow_deficit: bool,
    ) -> Result<Self, InstanceError> {
        if k.is_negative() {
            return Err(InstanceError::NegativeThreshold);
        }
        let mut course_ids = BTreeMap::new();
        for (ix, c) in courses.iter().enumerate() {
            if course_ids.insert(c.id.clone(), ix).is_some() {
                return Err(InstanceError::DuplicateCourse(c.id.clone()));
            }
            if c.capacity == 0 {
                return Err(InstanceError::ZeroCapacity(c.id.clone()));
            }
        }
        let mut ta_ids = BTreeMap::new();
        for (ix, t) in tas.iter().enumerate() {
            if ta_ids.insert(t.id.clone(), ix).is_some() {
                return Err(InstanceError::DuplicateTa(t.id.clone()));
            }
        }

        let n = courses.len();
        let m = tas.len();
        let mut dense_courses: Vec<Course> = courses
            .iter()
            .map(|c| Course {
                id: c.id.clone(),
                capacity: c.capacity,
                valuations: vec![0; m],
            })
            .collect();
        for (cix, c) in courses.iter().enumerate() {
            for (ta, &v) in &c.valuations {
                let tix = *ta_ids.get(ta).ok_or_else(|| InstanceError::UnknownTa {
                    course: c.id.clone(),
                    ta: ta.clone(),
                })?;
                dense_courses[cix].valuations[tix] = v;
            }
        }

        let mut dense_tas: Vec<Ta> = tas
            .iter()
            .map(|t| Ta {
                id: t.id.clone(),
                utilities: vec![0; n],
                grades: vec![Rational::zero(); n],
            })
            .collect();
        for (tix, t) in tas.iter().enumerate() {
            for (course, &u) in &t.utilities {
                let cix = *course_ids
                    .get(course)
                    .ok_or_else(|| InstanceError::UnknownCourse {
                        ta: t.id.clone(),
                        course: course.clone(),
                    })?;
                dense_tas[tix].utilities[cix] = u;
            }
            for (course, &g) in &t.grades {
                let cix = *course_ids
                    .get(course)
                    .ok_or_else(|| InstanceError::UnknownCourse {
                        ta: t.id.clone(),
                        course: course.clone(),
                    })?;
                if g.is_negative() {
                    return Err(InstanceError::NegativeGrade {
                        ta: t.id.clone(),
                        course: course.clone(),
                    });
                }
                dense_tas[tix].grades[cix] = g;
            }
        }

        for (cix, c) in dense_courses.iter().enumerate() {
            for (tix, t) in dense_tas.iter().enumerate() {
                let v = c.valuations[tix];
                let u = t.utilities[cix];
                if (v == 0) != (u == 0) {
                    return Err(InstanceError::ZeroConsistency {
                        course: c.id.clone(),
                        ta: t.id.clone(),
                        valuation: v,
                        utility: u,
                    });
                }
            }
        }

        let total_capacity: u64 = dense_courses.iter().map(|c| c.capacity as u64).sum();
        if !allow_deficit && total_capacity > m as u64 {
            return Err(InstanceError::CapacityDeficit {
                total_capacity,
                tas: m,
            });
        }

        Ok(Instance {
            k,
            courses: dense_courses,
            tas: dense_tas,
            course_ids,
            ta_ids,
        })
    }

    pub fn k(&self) -> Rational {
        self.k
    }

    /// Same data under a different threshold.
    pub fn with_k(&self, k: Rational) -> Instance {
        let mut out = self.clone();
        out.k = k;
        out
    }

    pub fn n_courses(&self) -> usize {
        self.courses.len()
    }

    pub fn n_tas(&self) -> usize {
        self.tas.len()
    }

    pub fn courses(&self) -> &[Course] {
        &self.courses
    }

    pub fn tas(&self) -> &[Ta] {
        &self.tas
    }

    pub fn course(&self, ix: usize) -> &Course {
        &self.courses[ix]
    }

    pub fn ta(&self, ix: usize) -> &Ta {
        &self.tas[ix]
    }

    pub fn course_ix(&self, id: &str) -> Option<usize> {
        self.course_ids.get(id).copied()
    }

    pub fn ta_ix(&self, id: &str) -> Option<usize> {
        self.ta_ids.get(id).copied()
    }

    pub fn valuation(&self, course: usize, ta: usize) -> u64 {
        self.courses[course].valuations[ta]
    }

    pub fn utility(&self, ta: usize, course: usize) -> u64 {
        self.tas[ta].utilities[course]
    }

    pub fn grade(&self, ta: usize, course: usize) -> Rational {
        self.tas[ta].grades[course]
    }

    pub fn total_capacity(&self) -> u64 {
        self.courses.iter().map(|c| c.capacity as u64).sum()
    }

    pub fn to_json(&self) -> String {
        let wire = InstanceWire {
            k: self.k,
            courses: self
                .courses
                .iter()
                .map(|c| CourseSpec {
                    id: c.id.clone(),
                    capacity: c.capacity,
                    valuations: self
                        .tas
                        .iter()
                        .enumerate()
                        .filter(|(tix, _)| c.valuations[*tix] > 0)
                        .map(|(tix, t)| (t.id.clone(), c.valuations[tix]))
                        .collect(),
                })
                .collect(),
            tas: self
                .tas
                .iter()
                .map(|t| TaSpec {
                    id: t.id.clone(),
                    utilities: self
                        .courses
                        .iter()
                        .enumerate()
                        .filter(|(cix, _)| t.utilities[*cix] > 0)
                        .map(|(cix, c)| (c.id.clone(), t.utilities[cix]))
                        .collect(),
                    grades: self
                        .courses
                        .iter()
                        .enumerate()
                        .filter(|(cix, _)| t.grades[*cix] != Rational::zero())
                        .map(|(cix, c)| (c.id.clone(), t.grades[cix]))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("instance serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self, String> {
        let wire: InstanceWire = serde_json::from_str(json).map_err(|e| e.to_string())?;
        Instance::new(wire.k, wire.courses, wire.tas).map_err(|e| e.to_string())
    }
}

/// Partial assignment of TAs to courses. Indexed by ta index; `None` means
/// unassigned. Construction validates ids; each TA appears at most once by
/// representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    assignment: Vec<Option<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatchingWire {
    assignment: BTreeMap<String, Option<String>>,
}

impl Matching {
    pub fn empty(instance: &Instance) -> Self {
        Matching {
            assignment: vec![None; instance.n_tas()],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<u32>>) -> Self {
        Matching { assignment }
    }

    pub fn from_pairs<'a, I>(instance: &Instance, pairs: I) -> Result<Self, MatchingError>
    where
        I: IntoIterator<Item = (&'a str, Option<&'a str>)>,
    {
        let mut assignment = vec![None; instance.n_tas()];
        let mut seen = vec![false; instance.n_tas()];
        for (ta, course) in pairs {
            let tix = instance
                .ta_ix(ta)
                .ok_or_else(|| MatchingError::UnknownTa(ta.to_string()))?;
            if seen[tix] {
                return Err(MatchingError::DuplicateTa(ta.to_string()));
            }
            seen[tix] = true;
            assignment[tix] = match course {
                Some(c) => Some(
                    instance
                        .course_ix(c)
                        .ok_or_else(|| MatchingError::UnknownCourse(c.to_string()))?
                        as u32,
                ),
                None => None,
            };
        }
        Ok(Matching { assignment })
    }

    pub fn course_of(&self, ta: usize) -> Option<usize> {
        self.assignment[ta].map(|c| c as usize)
    }

    pub fn assignment(&self) -> &[Option<u32>] {
        &self.assignment
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    /// Per-course lists of assigned TA indices, ascending.
    pub fn rosters(&self, instance: &Instance) -> Vec<Vec<usize>> {
        let mut rosters = vec![Vec::new(); instance.n_courses()];
        for (tix, a) in self.assignment.iter().enumerate() {
            if let Some(c) = a {
                rosters[*c as usize].push(tix);
            }
        }
        rosters
    }

    pub fn to_json(&self, instance: &Instance) -> String {
        let wire = MatchingWire {
            assignment: self
                .assignment
                .iter()
                .enumerate()
                .map(|(tix, a)| {
                    (
                        instance.ta(tix).id.clone(),
                        a.map(|c| instance.course(c as usize).id.clone()),
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("matching serialization cannot fail")
    }

    pub fn from_json(instance: &Instance, json: &str) -> Result<Self, String> {
        let wire: MatchingWire = serde_json::from_str(json).map_err(|e| e.to_string())?;
        Matching::from_pairs(
            instance,
            wire.assignment
                .iter()
                .map(|(t, c)| (t.as_str(), c.as_deref())),
        )
        .map_err(|e| e.to_string())
    }
}
