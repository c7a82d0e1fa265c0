//! Hardness-construction instance generators with their back-mappers, and
//! the seeded random generator behind the property sweeps.
//!
//! Generator identifiers are structured (`x1`/`x2` for the partition
//! courses, `<r>#<j>` for course copies, `<r>.d1`/`.e1` for dummies) so the
//! back-mappers need no side tables.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{CourseSpec, Instance, Matching, TaSpec};
use crate::rational::Rational;
use crate::verify::verify;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("partition input must have even cardinality")]
    OddCardinality,
    #[error("partition values must be positive")]
    NonPositiveValue,
    #[error("preference list of `{0}` is longer than three")]
    ListTooLong(String),
    #[error("man `{0}` has a tie in his list")]
    TiesOnMenSide(String),
    #[error("acceptability is not mutual for `{0}` and `{1}`")]
    NotMutual(String, String),
    #[error("unknown agent `{0}` in a preference list")]
    UnknownAgent(String),
    #[error("element `{0}` appears in more than three triples")]
    DegreeTooHigh(String),
    #[error("sets must have equal sizes")]
    UnequalSets,
    #[error("triple references unknown element `{0}`")]
    UnknownElement(String),
    #[error("matching or instance does not come from this generator: {0}")]
    NotAGeneratedInstance(String),
    #[error("profile cannot be satisfied: {0}")]
    UnsatisfiableProfile(String),
    #[error("instance assembly failed: {0}")]
    Assembly(String),
}

// ---------------------------------------------------------------------------
// Equal-cardinality partition.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionInput {
    pub values: Vec<u64>,
}

/// Two identically-valued courses of capacity m/2; uniform TA utilities and
/// grades keep every full matching envy-free, so a solution exists exactly
/// when the values split into halves of equal sum. The threshold is the
/// half-sum divided by the capacity, making per-course satisfaction
/// equivalent to "this side sums to at least half".
pub fn from_partition(input: &PartitionInput) -> Result<Instance, GenError> {
    let m = input.values.len();
    if !m.is_multiple_of(2) || m == 0 {
        return Err(GenError::OddCardinality);
    }
    if input.values.contains(&0) {
        return Err(GenError::NonPositiveValue);
    }
    let ta_id = |j: usize| format!("t{}", j + 1);
    let valuations: BTreeMap<String, u64> = input
        .values
        .iter()
        .enumerate()
        .map(|(j, &s)| (ta_id(j), s))
        .collect();
    let courses = vec![
        CourseSpec {
            id: "x1".into(),
            capacity: (m / 2) as u32,
            valuations: valuations.clone(),
        },
        CourseSpec {
            id: "x2".into(),
            capacity: (m / 2) as u32,
            valuations,
        },
    ];
    let tas = (0..m)
        .map(|j| TaSpec {
            id: ta_id(j),
            utilities: [("x1".to_string(), 1), ("x2".to_string(), 1)].into(),
            grades: [
                ("x1".to_string(), Rational::one()),
                ("x2".to_string(), Rational::one()),
            ]
            .into(),
        })
        .collect();
    let total: u64 = input.values.iter().sum();
    let k = Rational::from(total) / Rational::from(m as u64);
    Instance::new(k, courses, tas).map_err(|e| GenError::Assembly(e.to_string()))
}

/// Splits a solution of a `from_partition` instance back into the two value
/// multisets.
pub fn map_back_partition(
    instance: &Instance,
    matching: &Matching,
) -> Result<(Vec<u64>, Vec<u64>), GenError> {
    if instance.n_courses() != 2
        || instance.course_ix("x1") != Some(0)
        || instance.course_ix("x2") != Some(1)
    {
        return Err(GenError::NotAGeneratedInstance(
            "expected exactly courses x1 and x2".into(),
        ));
    }
    for t in 0..instance.n_tas() {
        if instance.valuation(0, t) != instance.valuation(1, t) {
            return Err(GenError::NotAGeneratedInstance(
                "course valuations are not identical".into(),
            ));
        }
    }
    let mut sides = (Vec::new(), Vec::new());
    for t in 0..instance.n_tas() {
        match matching.course_of(t) {
            Some(0) => sides.0.push(instance.valuation(0, t)),
            Some(1) => sides.1.push(instance.valuation(1, t)),
            _ => {}
        }
    }
    sides.0.sort_unstable();
    sides.1.sort_unstable();
    Ok(sides)
}

// ---------------------------------------------------------------------------
// (3,3)-SMTI with ties on the women's side.

/// Preference lists as tie groups; strict lists have singleton groups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmtiAgent {
    pub id: String,
    pub prefs: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Smti33Input {
    pub men: Vec<SmtiAgent>,
    pub women: Vec<SmtiAgent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmtiVariant {
    /// Course valuations are 4 - rank and double as grades.
    GradeDerived,
    /// Course valuations are 1 on every listed pair; grades stay 4 - rank.
    Binary,
}

fn smti_positions(agent: &SmtiAgent) -> Result<BTreeMap<String, usize>, GenError> {
    let entries: usize = agent.prefs.iter().map(Vec::len).sum();
    if entries > 3 {
        return Err(GenError::ListTooLong(agent.id.clone()));
    }
    let mut positions = BTreeMap::new();
    for (gix, group) in agent.prefs.iter().enumerate() {
        for member in group {
            if positions.insert(member.clone(), gix + 1).is_some() {
                return Err(GenError::ListTooLong(agent.id.clone()));
            }
        }
    }
    Ok(positions)
}

/// Courses are the men (capacity 1), TAs are the women; a listed pair at tie
/// position i carries value 4 - i on each relevant function and k = 1. A
/// solution exists exactly when the input admits a complete weakly stable
/// matching.
pub fn from_smti33(input: &Smti33Input, variant: SmtiVariant) -> Result<Instance, GenError> {
    for man in &input.men {
        if man.prefs.iter().any(|g| g.len() > 1) {
            return Err(GenError::TiesOnMenSide(man.id.clone()));
        }
    }
    let men: BTreeMap<String, BTreeMap<String, usize>> = input
        .men
        .iter()
        .map(|m| Ok((m.id.clone(), smti_positions(m)?)))
        .collect::<Result<_, GenError>>()?;
    let women: BTreeMap<String, BTreeMap<String, usize>> = input
        .women
        .iter()
        .map(|w| Ok((w.id.clone(), smti_positions(w)?)))
        .collect::<Result<_, GenError>>()?;

    for (man, prefs) in &men {
        for woman in prefs.keys() {
            let listed = women
                .get(woman)
                .ok_or_else(|| GenError::UnknownAgent(woman.clone()))?
                .contains_key(man);
            if !listed {
                return Err(GenError::NotMutual(man.clone(), woman.clone()));
            }
        }
    }
    for (woman, prefs) in &women {
        for man in prefs.keys() {
            let listed = men
                .get(man)
                .ok_or_else(|| GenError::UnknownAgent(man.clone()))?
                .contains_key(woman);
            if !listed {
                return Err(GenError::NotMutual(man.clone(), woman.clone()));
            }
        }
    }

    let courses = input
        .men
        .iter()
        .map(|man| CourseSpec {
            id: man.id.clone(),
            capacity: 1,
            valuations: men[&man.id]
                .iter()
                .map(|(woman, &pos)| {
                    let v = match variant {
                        SmtiVariant::GradeDerived => 4 - pos as u64,
                        SmtiVariant::Binary => 1,
                    };
                    (woman.clone(), v)
                })
                .collect(),
        })
        .collect();
    let tas = input
        .women
        .iter()
        .map(|woman| TaSpec {
            id: woman.id.clone(),
            utilities: women[&woman.id]
                .iter()
                .map(|(man, &pos)| (man.clone(), 4 - pos as u64))
                .collect(),
            grades: women[&woman.id]
                .keys()
                .map(|man| {
                    let pos = men[man][&woman.id];
                    (man.clone(), Rational::from_int(4 - pos as i64))
                })
                .collect(),
        })
        .collect();
    Instance::new(Rational::one(), courses, tas).map_err(|e| GenError::Assembly(e.to_string()))
}

// ---------------------------------------------------------------------------
// 3-dimensional perfect matching, degree at most three.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreeDmInput {
    pub p: Vec<String>,
    pub q: Vec<String>,
    pub r: Vec<String>,
    pub triples: Vec<(String, String, String)>,
}

/// Three capacity-2 courses per element of R (one per triple slot), original
/// TAs for P and Q valued 2 by their triple's copy, plus four dummies per
/// element (valued 3 and 1 by every copy of it) and k = 2: copies not used
/// by the matching absorb one 3-dummy and one 1-dummy each, averaging
/// exactly 2.
pub fn from_3dpm(input: &ThreeDmInput) -> Result<Instance, GenError> {
    if input.p.len() != input.q.len() || input.q.len() != input.r.len() {
        return Err(GenError::UnequalSets);
    }
    let p_set: BTreeSet<&String> = input.p.iter().collect();
    let q_set: BTreeSet<&String> = input.q.iter().collect();
    let r_set: BTreeSet<&String> = input.r.iter().collect();
    let mut degree: BTreeMap<&String, usize> = BTreeMap::new();
    for (p, q, r) in &input.triples {
        if !p_set.contains(p) {
            return Err(GenError::UnknownElement(p.clone()));
        }
        if !q_set.contains(q) {
            return Err(GenError::UnknownElement(q.clone()));
        }
        if !r_set.contains(r) {
            return Err(GenError::UnknownElement(r.clone()));
        }
        for e in [p, q, r] {
            let d = degree.entry(e).or_insert(0);
            *d += 1;
            if *d > 3 {
                return Err(GenError::DegreeTooHigh(e.clone()));
            }
        }
    }

    let copy_id = |r: &str, j: usize| format!("{r}#{j}");
    // Triples of each r element in input order; copy j hosts the j-th one.
    let mut triples_of: BTreeMap<&String, Vec<(&String, &String)>> = BTreeMap::new();
    for (p, q, r) in &input.triples {
        triples_of.entry(r).or_default().push((p, q));
    }

    let mut courses = Vec::new();
    for r in &input.r {
        let slots = triples_of.get(r).map(Vec::as_slice).unwrap_or(&[]);
        for j in 1..=3usize {
            let mut valuations: BTreeMap<String, u64> = BTreeMap::new();
            if let Some((p, q)) = slots.get(j - 1) {
                valuations.insert((*p).clone(), 2);
                valuations.insert((*q).clone(), 2);
            }
            valuations.insert(format!("{r}.d1"), 3);
            valuations.insert(format!("{r}.d2"), 3);
            valuations.insert(format!("{r}.e1"), 1);
            valuations.insert(format!("{r}.e2"), 1);
            courses.push(CourseSpec {
                id: copy_id(r, j),
                capacity: 2,
                valuations,
            });
        }
    }

    // Original TAs: utility 1 and grade 1 on the copies that value them;
    // grade 1 additionally on every copy of an r sharing a triple with them.
    let mut original_courses: BTreeMap<&String, BTreeSet<String>> = BTreeMap::new();
    let mut original_grades: BTreeMap<&String, BTreeSet<String>> = BTreeMap::new();
    for (r, slots) in &triples_of {
        for (j, (p, q)) in slots.iter().enumerate() {
            for t in [p, q] {
                original_courses
                    .entry(t)
                    .or_default()
                    .insert(copy_id(r, j + 1));
                for jj in 1..=3usize {
                    original_grades.entry(t).or_default().insert(copy_id(r, jj));
                }
            }
        }
    }

    let mut tas = Vec::new();
    for t in input.p.iter().chain(&input.q) {
        let utilities: BTreeMap<String, u64> = original_courses
            .get(t)
            .into_iter()
            .flatten()
            .map(|c| (c.clone(), 1))
            .collect();
        let grades: BTreeMap<String, Rational> = original_grades
            .get(t)
            .into_iter()
            .flatten()
            .map(|c| (c.clone(), Rational::one()))
            .collect();
        tas.push(TaSpec {
            id: t.clone(),
            utilities,
            grades,
        });
    }
    // Dummies: utility 1 on their own copies, grade 2 on every course.
    let all_course_ids: Vec<String> = courses.iter().map(|c| c.id.clone()).collect();
    for r in &input.r {
        for dummy in ["d1", "d2", "e1", "e2"] {
            tas.push(TaSpec {
                id: format!("{r}.{dummy}"),
                utilities: (1..=3usize).map(|j| (copy_id(r, j), 1)).collect(),
                grades: all_course_ids
                    .iter()
                    .map(|c| (c.clone(), Rational::from_int(2)))
                    .collect(),
            });
        }
    }

    Instance::new(Rational::from_int(2), courses, tas)
        .map_err(|e| GenError::Assembly(e.to_string()))
}

// ---------------------------------------------------------------------------
// Seeded random instances for the property sweeps.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    /// No structural constraint beyond the instance invariants.
    None,
    /// Degree minus capacity in {0, 1} for every course.
    Degcap1,
    /// All capacities 1, distinct positive utilities per TA.
    Cap1,
    /// At most two distinct positive valuations per course, distinct grades
    /// per course, distinct utilities per TA.
    Twoval,
    /// Binary utilities with a common value, valuations equal to grades,
    /// distinct grades per course, Hall's condition; k is the certified
    /// rank bound.
    Binval,
    /// Every pair positively valued, distinct utilities and grades; k = 1.
    Allpos,
}

impl Structure {
    pub fn parse(name: &str) -> Result<Self, String> {
        match name {
            "none" => Ok(Structure::None),
            "degcap1" => Ok(Structure::Degcap1),
            "cap1" => Ok(Structure::Cap1),
            "twoval" => Ok(Structure::Twoval),
            "binval" => Ok(Structure::Binval),
            "allpos" => Ok(Structure::Allpos),
            other => Err(format!("unknown structure `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Ties may appear anywhere.
    Free,
    /// Grades distinct per course among positively valued TAs.
    DistinctGrades,
    /// Also utilities distinct per TA among positive entries.
    DistinctGradesUtils,
}

impl TiePolicy {
    pub fn parse(name: &str) -> Result<Self, String> {
        match name {
            "free" => Ok(TiePolicy::Free),
            "distinct-grades" => Ok(TiePolicy::DistinctGrades),
            "distinct-grades-utils" => Ok(TiePolicy::DistinctGradesUtils),
            other => Err(format!("unknown tie policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RandomProfile {
    pub n: usize,
    pub m: usize,
    pub cap_max: u32,
    pub val_max: u64,
    pub tie_policy: TiePolicy,
    pub structure: Structure,
}

/// Deterministic pseudo-random instance for the requested profile; the
/// stream depends only on the seed, never on the platform.
pub fn random_instance(seed: u64, profile: &RandomProfile) -> Result<Instance, GenError> {
    if profile.n == 0 && profile.m == 0 {
        return Err(GenError::UnsatisfiableProfile("empty instance".into()));
    }
    if profile.cap_max == 0 || profile.val_max == 0 {
        return Err(GenError::UnsatisfiableProfile(
            "cap_max and val_max must be positive".into(),
        ));
    }
    if profile.n > profile.m {
        return Err(GenError::UnsatisfiableProfile(
            "need at least one TA per course".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..400 {
        if let Some(instance) = try_random(&mut rng, profile) {
            return Ok(instance);
        }
        let _ = attempt;
    }
    Err(GenError::UnsatisfiableProfile(format!(
        "no instance found for {:?} after 400 attempts",
        profile.structure
    )))
}

fn draw_capacities(rng: &mut ChaCha8Rng, profile: &RandomProfile) -> Option<Vec<u32>> {
    for _ in 0..50 {
        let caps: Vec<u32> = (0..profile.n)
            .map(|_| rng.gen_range(1..=profile.cap_max))
            .collect();
        let total: u64 = caps.iter().map(|&c| c as u64).sum();
        if total <= profile.m as u64 {
            return Some(caps);
        }
    }
    // Fall back to all-ones, which fits because n <= m.
    Some(vec![1; profile.n])
}

/// `count` distinct values from 1..=pool_max, shuffled.
fn distinct_values(rng: &mut ChaCha8Rng, count: usize, pool_max: u64) -> Vec<u64> {
    let mut pool: Vec<u64> = (1..=pool_max.max(count as u64)).collect();
    pool.shuffle(rng);
    pool.truncate(count);
    pool
}

fn try_random(rng: &mut ChaCha8Rng, profile: &RandomProfile) -> Option<Instance> {
    let n = profile.n;
    let m = profile.m;
    let caps = match profile.structure {
        Structure::Cap1 => vec![1; n],
        _ => draw_capacities(rng, profile)?,
    };

    // Support: which (course, ta) pairs are positive.
    let mut support = vec![vec![false; m]; n];
    match profile.structure {
        Structure::Degcap1 => {
            for c in 0..n {
                let d = (caps[c] as usize + rng.gen_range(0..=1usize)).min(m);
                if d < caps[c] as usize {
                    return None;
                }
                let mut tas: Vec<usize> = (0..m).collect();
                tas.shuffle(rng);
                for &t in tas.iter().take(d) {
                    support[c][t] = true;
                }
            }
        }
        Structure::Allpos => {
            for row in support.iter_mut() {
                row.fill(true);
            }
        }
        _ => {
            for (c, row) in support.iter_mut().enumerate() {
                for slot in row.iter_mut() {
                    *slot = rng.gen_bool(0.65);
                }
                // A course with fewer neighbors than seats can never be
                // filled; keep such instances possible under `None` but
                // top the support up elsewhere.
                if !matches!(profile.structure, Structure::None) {
                    let mut have: usize = row.iter().filter(|&&b| b).count();
                    let mut tas: Vec<usize> = (0..m).collect();
                    tas.shuffle(rng);
                    for &t in &tas {
                        if have >= caps[c] as usize {
                            break;
                        }
                        if !row[t] {
                            row[t] = true;
                            have += 1;
                        }
                    }
                }
            }
        }
    }

    let grades_distinct = matches!(
        profile.structure,
        Structure::Twoval | Structure::Binval | Structure::Allpos
    ) || !matches!(profile.tie_policy, TiePolicy::Free);
    let utils_distinct = matches!(
        profile.structure,
        Structure::Cap1 | Structure::Twoval | Structure::Allpos
    ) || matches!(profile.tie_policy, TiePolicy::DistinctGradesUtils);

    // Valuations.
    let mut valuations = vec![vec![0u64; m]; n];
    match profile.structure {
        Structure::Twoval => {
            for c in 0..n {
                let q = rng.gen_range(1..=profile.val_max);
                let q2 = rng.gen_range(1..=profile.val_max);
                for t in 0..m {
                    if support[c][t] {
                        valuations[c][t] = if rng.gen_bool(0.5) { q } else { q2 };
                    }
                }
            }
        }
        Structure::Binval => {
            // Valuations are grades; filled below.
        }
        _ => {
            for c in 0..n {
                for t in 0..m {
                    if support[c][t] {
                        valuations[c][t] = rng.gen_range(1..=profile.val_max);
                    }
                }
            }
        }
    }

    // Grades.
    let mut grades = vec![vec![Rational::zero(); m]; n];
    for c in 0..n {
        let members: Vec<usize> = (0..m).filter(|&t| support[c][t]).collect();
        if grades_distinct || matches!(profile.structure, Structure::Binval) {
            let values = distinct_values(rng, members.len(), profile.val_max.max(m as u64));
            for (t, v) in members.iter().zip(values) {
                grades[c][*t] = Rational::from(v);
            }
        } else {
            for &t in &members {
                // Halves exercise exact rational comparisons.
                let numer = rng.gen_range(0..=2 * profile.val_max) as i64;
                grades[c][t] = Rational::new(numer, 2).unwrap();
            }
        }
    }
    if matches!(profile.structure, Structure::Binval) {
        for c in 0..n {
            for t in 0..m {
                valuations[c][t] = if support[c][t] {
                    let g = grades[c][t];
                    debug_assert!(g.denom() == 1);
                    g.numer() as u64
                } else {
                    0
                };
            }
        }
    }

    // Utilities.
    let mut utilities = vec![vec![0u64; n]; m];
    let common = rng.gen_range(1..=profile.val_max);
    for t in 0..m {
        let mine: Vec<usize> = (0..n).filter(|&c| support[c][t]).collect();
        match profile.structure {
            Structure::Binval => {
                for &c in &mine {
                    utilities[t][c] = common;
                }
            }
            _ if utils_distinct => {
                let values = distinct_values(rng, mine.len(), profile.val_max.max(n as u64));
                for (c, v) in mine.iter().zip(values) {
                    utilities[t][*c] = v;
                }
            }
            _ => {
                for &c in &mine {
                    utilities[t][c] = rng.gen_range(1..=profile.val_max);
                }
            }
        }
    }

    // Threshold.
    let k = match profile.structure {
        Structure::Allpos => Rational::one(),
        Structure::Binval => Rational::zero(), // placeholder, replaced below
        _ => Rational::new(rng.gen_range(0..=2 * profile.val_max) as i64, 2).unwrap(),
    };

    let courses: Vec<CourseSpec> = (0..n)
        .map(|c| CourseSpec {
            id: format!("c{}", c + 1),
            capacity: caps[c],
            valuations: (0..m)
                .filter(|&t| valuations[c][t] > 0)
                .map(|t| (format!("t{}", t + 1), valuations[c][t]))
                .collect(),
        })
        .collect();
    let tas: Vec<TaSpec> = (0..m)
        .map(|t| TaSpec {
            id: format!("t{}", t + 1),
            utilities: (0..n)
                .filter(|&c| utilities[t][c] > 0)
                .map(|c| (format!("c{}", c + 1), utilities[t][c]))
                .collect(),
            grades: (0..n)
                .filter(|&c| grades[c][t] != Rational::zero())
                .map(|c| (format!("c{}", c + 1), grades[c][t]))
                .collect(),
        })
        .collect();
    let instance = Instance::new(k, courses, tas).ok()?;

    match profile.structure {
        Structure::Binval => {
            let report = crate::existence::check_binary_existence(&instance);
            if !report.passes() {
                return None;
            }
            let k_star = report.rank_profile.k_star?;
            Some(instance.with_k(k_star))
        }
        _ => Some(instance),
    }
}

/// Deterministic sub-seed stream, so sweeps can derive one seed per case.
pub fn seed_stream(master: u64, count: usize) -> Vec<u64> {
    let mut rng = StdRng::seed_from_u64(master);
    (0..count).map(|_| rng.gen()).collect()
}

/// Convenience wrapper asserting that a generated instance parses and
/// verifies structurally; used by tests and `bench`.
pub fn assert_well_formed(instance: &Instance) {
    let empty = Matching::empty(instance);
    let _ = verify(instance, &empty);
}
