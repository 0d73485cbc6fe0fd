//! Problem instances in the ITC-2007 curriculum-based `.ctt` format.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Course {
    pub id: String,
    pub teacher: String,
    pub n_lectures: usize,
    pub min_working_days: usize,
    pub n_students: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curriculum {
    pub id: String,
    pub courses: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Unavailability {
    pub course: usize,
    pub day: usize,
    pub timeslot: usize,
}

/// An immutable, validated problem instance.
///
/// Besides the raw entities it carries the dense lookup tables the search
/// needs (lecture-to-course map, availability matrix, conflict lists), so
/// nothing downstream ever compares id strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    n_days: usize,
    periods_per_day: usize,
    courses: Vec<Course>,
    rooms: Vec<Room>,
    curricula: Vec<Curriculum>,
    unavailabilities: Vec<Unavailability>,

    course_index: HashMap<String, usize>,
    room_index: HashMap<String, usize>,
    lecture_course: Vec<usize>,
    course_first_lecture: Vec<usize>,
    available: Vec<bool>,
    n_available: Vec<usize>,
    conflicts: Vec<Vec<usize>>,
    conflict_matrix: Vec<bool>,
    course_curricula: Vec<Vec<usize>>,
    max_capacity: usize,
}

impl Instance {
    /// Builds an instance, checking every structural invariant.
    ///
    /// Duplicate unavailability entries are dropped (with a warning).
    pub fn new(
        name: impl Into<String>,
        n_days: usize,
        periods_per_day: usize,
        courses: Vec<Course>,
        rooms: Vec<Room>,
        curricula: Vec<Curriculum>,
        unavailabilities: Vec<Unavailability>,
    ) -> Result<Self> {
        let name = name.into();
        if n_days == 0 || periods_per_day == 0 {
            return Err(Error::Degenerate("days and periods per day must be positive".into()));
        }
        let n_periods = n_days * periods_per_day;

        let mut course_index = HashMap::with_capacity(courses.len());
        for (i, c) in courses.iter().enumerate() {
            if c.n_lectures == 0 {
                return Err(Error::InvalidArgument(format!("course `{}` has no lectures", c.id)));
            }
            if c.min_working_days == 0 {
                return Err(Error::InvalidArgument(format!(
                    "course `{}` has zero minimum working days",
                    c.id
                )));
            }
            if course_index.insert(c.id.clone(), i).is_some() {
                return Err(Error::DuplicateId { kind: "course", id: c.id.clone() });
            }
        }
        let mut room_index = HashMap::with_capacity(rooms.len());
        for (i, r) in rooms.iter().enumerate() {
            if room_index.insert(r.id.clone(), i).is_some() {
                return Err(Error::DuplicateId { kind: "room", id: r.id.clone() });
            }
        }
        let mut seen_curricula = HashSet::new();
        for q in &curricula {
            if !seen_curricula.insert(q.id.as_str()) {
                return Err(Error::DuplicateId { kind: "curriculum", id: q.id.clone() });
            }
            let mut members = HashSet::new();
            for &c in &q.courses {
                if c >= courses.len() {
                    return Err(Error::InvalidArgument(format!(
                        "curriculum `{}` refers to course index {c}",
                        q.id
                    )));
                }
                if !members.insert(c) {
                    return Err(Error::DuplicateId {
                        kind: "curriculum member",
                        id: format!("{}/{}", q.id, courses[c].id),
                    });
                }
            }
        }

        let mut dedup = BTreeSet::new();
        for u in &unavailabilities {
            if u.course >= courses.len() {
                return Err(Error::InvalidArgument(format!("unavailability for course index {}", u.course)));
            }
            if u.day >= n_days || u.timeslot >= periods_per_day {
                return Err(Error::InvalidArgument(format!(
                    "unavailability ({}, {}) outside the {n_days}x{periods_per_day} grid",
                    u.day, u.timeslot
                )));
            }
            if !dedup.insert(*u) {
                log::warn!(
                    "duplicate unavailability for course `{}` at day {} timeslot {} ignored",
                    courses[u.course].id,
                    u.day,
                    u.timeslot
                );
            }
        }
        let mut kept = Vec::with_capacity(dedup.len());
        let mut seen = HashSet::new();
        for u in unavailabilities {
            if seen.insert(u) {
                kept.push(u);
            }
        }

        let n_courses = courses.len();
        let mut lecture_course = Vec::new();
        let mut course_first_lecture = Vec::with_capacity(n_courses + 1);
        for (c, course) in courses.iter().enumerate() {
            course_first_lecture.push(lecture_course.len());
            lecture_course.extend(std::iter::repeat_n(c, course.n_lectures));
        }
        course_first_lecture.push(lecture_course.len());

        let mut available = vec![true; n_courses * n_periods];
        for u in &kept {
            available[u.course * n_periods + u.day * periods_per_day + u.timeslot] = false;
        }
        let n_available = (0..n_courses)
            .map(|c| available[c * n_periods..(c + 1) * n_periods].iter().filter(|&&a| a).count())
            .collect();

        let mut course_curricula = vec![Vec::new(); n_courses];
        for (qi, q) in curricula.iter().enumerate() {
            for &c in &q.courses {
                course_curricula[c].push(qi);
            }
        }

        let mut teacher_ids: HashMap<&str, usize> = HashMap::new();
        let teacher: Vec<usize> = courses
            .iter()
            .map(|c| {
                let next = teacher_ids.len();
                *teacher_ids.entry(c.teacher.as_str()).or_insert(next)
            })
            .collect();
        let mut conflict_matrix = vec![false; n_courses * n_courses];
        for a in 0..n_courses {
            for b in (a + 1)..n_courses {
                if teacher[a] == teacher[b] {
                    conflict_matrix[a * n_courses + b] = true;
                    conflict_matrix[b * n_courses + a] = true;
                }
            }
        }
        for q in &curricula {
            for (i, &a) in q.courses.iter().enumerate() {
                for &b in &q.courses[i + 1..] {
                    conflict_matrix[a * n_courses + b] = true;
                    conflict_matrix[b * n_courses + a] = true;
                }
            }
        }
        let conflicts = (0..n_courses)
            .map(|a| (0..n_courses).filter(|&b| conflict_matrix[a * n_courses + b]).collect())
            .collect();
        let max_capacity = rooms.iter().map(|r| r.capacity).max().unwrap_or(0);

        Ok(Self {
            name,
            n_days,
            periods_per_day,
            courses,
            rooms,
            curricula,
            unavailabilities: kept,
            course_index,
            room_index,
            lecture_course,
            course_first_lecture,
            available,
            n_available,
            conflicts,
            conflict_matrix,
            course_curricula,
            max_capacity,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_days(&self) -> usize {
        self.n_days
    }

    pub fn periods_per_day(&self) -> usize {
        self.periods_per_day
    }

    pub fn n_periods(&self) -> usize {
        self.n_days * self.periods_per_day
    }

    pub fn courses(&self) -> &[Course] {
        &self.courses
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn curricula(&self) -> &[Curriculum] {
        &self.curricula
    }

    pub fn unavailabilities(&self) -> &[Unavailability] {
        &self.unavailabilities
    }

    pub fn n_courses(&self) -> usize {
        self.courses.len()
    }

    pub fn n_rooms(&self) -> usize {
        self.rooms.len()
    }

    pub fn n_lectures(&self) -> usize {
        self.lecture_course.len()
    }

    pub fn course_of(&self, lecture: usize) -> usize {
        self.lecture_course[lecture]
    }

    /// Global lecture indices belonging to `course`.
    pub fn lectures_of(&self, course: usize) -> std::ops::Range<usize> {
        self.course_first_lecture[course]..self.course_first_lecture[course + 1]
    }

    pub fn course_index(&self, id: &str) -> Option<usize> {
        self.course_index.get(id).copied()
    }

    pub fn room_index(&self, id: &str) -> Option<usize> {
        self.room_index.get(id).copied()
    }

    #[inline]
    pub fn is_available(&self, course: usize, period: usize) -> bool {
        self.available[course * self.n_periods() + period]
    }

    pub fn n_available_periods(&self, course: usize) -> usize {
        self.n_available[course]
    }

    /// Courses in conflict with `course` (shared curriculum or teacher).
    #[inline]
    pub fn conflicts_of(&self, course: usize) -> &[usize] {
        &self.conflicts[course]
    }

    #[inline]
    pub fn in_conflict(&self, a: usize, b: usize) -> bool {
        self.conflict_matrix[a * self.courses.len() + b]
    }

    #[inline]
    pub fn curricula_of(&self, course: usize) -> &[usize] {
        &self.course_curricula[course]
    }

    pub fn max_capacity(&self) -> usize {
        self.max_capacity
    }

    #[inline]
    pub fn day_of(&self, period: usize) -> usize {
        period / self.periods_per_day
    }

    #[inline]
    pub fn timeslot_of(&self, period: usize) -> usize {
        period % self.periods_per_day
    }

    /// Room occupation as a fraction: lectures over (rooms x periods).
    pub fn room_occupation(&self) -> f64 {
        let slots = self.n_rooms() * self.n_periods();
        if slots == 0 {
            return f64::INFINITY;
        }
        self.n_lectures() as f64 / slots as f64
    }
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
                .filter(|(_, t)| !t.is_empty()),
        );
        Self { inner: it.peekable(), last_line: 0 }
    }

    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, t)) => {
                self.last_line = n;
                Ok((n, t))
            }
            None => Err(Error::Syntax {
                line: self.last_line + 1,
                msg: "unexpected end of input".into(),
            }),
        }
    }

    fn peek_first(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, t)| t[0])
    }

    fn header_value(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, toks) = self.next()?;
        if toks[0] != key {
            return Err(Error::Syntax { line, msg: format!("expected `{key}`, found `{}`", toks[0]) });
        }
        if toks.len() != 2 {
            return Err(Error::Syntax { line, msg: format!("`{key}` takes exactly one value") });
        }
        Ok((line, toks[1]))
    }

    fn header_int(&mut self, key: &str) -> Result<usize> {
        let (line, v) = self.header_value(key)?;
        parse_int(v, line)
    }

    fn section(&mut self, key: &str) -> Result<()> {
        let (line, toks) = self.next()?;
        if toks != [key] {
            return Err(Error::Syntax { line, msg: format!("expected section `{key}`, found `{}`", toks.join(" ")) });
        }
        Ok(())
    }

    /// Rows up to (not including) the next line starting with `stop`.
    fn rows_until(&mut self, stop: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
        let mut rows = Vec::new();
        loop {
            match self.peek_first() {
                Some(t) if t == stop => return Ok(rows),
                Some(_) => rows.push(self.next()?),
                None => {
                    return Err(Error::Syntax {
                        line: self.last_line + 1,
                        msg: format!("missing `{stop}`"),
                    })
                }
            }
        }
    }
}

fn parse_int(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::Syntax { line, msg: format!("expected a non-negative integer, found `{tok}`") })
}

fn expect_len(toks: &[&str], n: usize, line: usize, what: &str) -> Result<()> {
    if toks.len() != n {
        return Err(Error::Syntax {
            line,
            msg: format!("{what} row needs {n} fields, found {}", toks.len()),
        });
    }
    Ok(())
}

/// Parses a `.ctt` document.
pub fn parse_ctt(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (_, name) = lines.header_value("Name:")?;
    let n_courses = lines.header_int("Courses:")?;
    let n_rooms = lines.header_int("Rooms:")?;
    let n_days = lines.header_int("Days:")?;
    let ppd = lines.header_int("Periods_per_day:")?;
    let n_curricula = lines.header_int("Curricula:")?;
    let n_constraints = lines.header_int("Constraints:")?;

    lines.section("COURSES:")?;
    let rows = lines.rows_until("ROOMS:")?;
    if rows.len() != n_courses {
        return Err(Error::CountMismatch { section: "COURSES", expected: n_courses, found: rows.len() });
    }
    let mut courses = Vec::with_capacity(n_courses);
    let mut course_ids = HashMap::new();
    for (line, toks) in rows {
        expect_len(&toks, 5, line, "course")?;
        let course = Course {
            id: toks[0].to_string(),
            teacher: toks[1].to_string(),
            n_lectures: parse_int(toks[2], line)?,
            min_working_days: parse_int(toks[3], line)?,
            n_students: parse_int(toks[4], line)?,
        };
        if course.n_lectures == 0 || course.min_working_days == 0 {
            return Err(Error::Syntax { line, msg: "lectures and minimum working days must be positive".into() });
        }
        if course_ids.insert(course.id.clone(), courses.len()).is_some() {
            return Err(Error::DuplicateId { kind: "course", id: course.id });
        }
        courses.push(course);
    }

    lines.section("ROOMS:")?;
    let rows = lines.rows_until("CURRICULA:")?;
    if rows.len() != n_rooms {
        return Err(Error::CountMismatch { section: "ROOMS", expected: n_rooms, found: rows.len() });
    }
    let mut rooms = Vec::with_capacity(n_rooms);
    for (line, toks) in rows {
        expect_len(&toks, 2, line, "room")?;
        rooms.push(Room { id: toks[0].to_string(), capacity: parse_int(toks[1], line)? });
    }

    lines.section("CURRICULA:")?;
    let rows = lines.rows_until("UNAVAILABILITY_CONSTRAINTS:")?;
    if rows.len() != n_curricula {
        return Err(Error::CountMismatch { section: "CURRICULA", expected: n_curricula, found: rows.len() });
    }
    let mut curricula = Vec::with_capacity(n_curricula);
    for (line, toks) in rows {
        if toks.len() < 2 {
            return Err(Error::Syntax { line, msg: "curriculum row needs an id and a course count".into() });
        }
        let k = parse_int(toks[1], line)?;
        if toks.len() != 2 + k {
            return Err(Error::Syntax {
                line,
                msg: format!("curriculum `{}` declares {k} courses but lists {}", toks[0], toks.len() - 2),
            });
        }
        let mut members = Vec::with_capacity(k);
        for id in &toks[2..] {
            let c = *course_ids
                .get(*id)
                .ok_or_else(|| Error::UnknownId { kind: "course", id: id.to_string(), line })?;
            if members.contains(&c) {
                return Err(Error::DuplicateId { kind: "curriculum member", id: format!("{}/{id}", toks[0]) });
            }
            members.push(c);
        }
        curricula.push(Curriculum { id: toks[0].to_string(), courses: members });
    }

    lines.section("UNAVAILABILITY_CONSTRAINTS:")?;
    let rows = lines.rows_until("END.")?;
    if rows.len() != n_constraints {
        return Err(Error::CountMismatch {
            section: "UNAVAILABILITY_CONSTRAINTS",
            expected: n_constraints,
            found: rows.len(),
        });
    }
    let mut unavailabilities = Vec::with_capacity(n_constraints);
    for (line, toks) in rows {
        expect_len(&toks, 3, line, "unavailability")?;
        let course = *course_ids
            .get(toks[0])
            .ok_or_else(|| Error::UnknownId { kind: "course", id: toks[0].to_string(), line })?;
        let day = parse_int(toks[1], line)?;
        let timeslot = parse_int(toks[2], line)?;
        if day >= n_days {
            return Err(Error::OutOfRange { line, what: "day", value: day, bound: n_days });
        }
        if timeslot >= ppd {
            return Err(Error::OutOfRange { line, what: "timeslot", value: timeslot, bound: ppd });
        }
        unavailabilities.push(Unavailability { course, day, timeslot });
    }
    lines.section("END.")?;

    Instance::new(name, n_days, ppd, courses, rooms, curricula, unavailabilities)
}

/// Writes an instance back out in `.ctt` form.
pub fn format_ctt(inst: &Instance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Name: {}", inst.name);
    let _ = writeln!(s, "Courses: {}", inst.courses.len());
    let _ = writeln!(s, "Rooms: {}", inst.rooms.len());
    let _ = writeln!(s, "Days: {}", inst.n_days);
    let _ = writeln!(s, "Periods_per_day: {}", inst.periods_per_day);
    let _ = writeln!(s, "Curricula: {}", inst.curricula.len());
    let _ = writeln!(s, "Constraints: {}", inst.unavailabilities.len());
    s.push_str("\nCOURSES:\n");
    for c in &inst.courses {
        let _ = writeln!(s, "{} {} {} {} {}", c.id, c.teacher, c.n_lectures, c.min_working_days, c.n_students);
    }
    s.push_str("\nROOMS:\n");
    for r in &inst.rooms {
        let _ = writeln!(s, "{}\t{}", r.id, r.capacity);
    }
    s.push_str("\nCURRICULA:\n");
    for q in &inst.curricula {
        let _ = write!(s, "{}  {} ", q.id, q.courses.len());
        let ids: Vec<&str> = q.courses.iter().map(|&c| inst.courses[c].id.as_str()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s.push_str("\nUNAVAILABILITY_CONSTRAINTS:\n");
    for u in &inst.unavailabilities {
        let _ = writeln!(s, "{} {} {}", inst.courses[u.course].id, u.day, u.timeslot);
    }
    s.push_str("\nEND.\n");
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FindingKind {
    ProvablyInfeasible,
    UnrealisticRoomEndowment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    /// Offending course; `None` for instance-wide findings.
    pub course: Option<usize>,
    pub detail: String,
}

/// Screens an instance for the two classes that are decidable by inspection.
pub fn validate_instance(inst: &Instance) -> Vec<Finding> {
    let mut out = Vec::new();
    for (c, course) in inst.courses.iter().enumerate() {
        let avail = inst.n_available_periods(c);
        if course.n_lectures > avail {
            out.push(Finding {
                kind: FindingKind::ProvablyInfeasible,
                course: Some(c),
                detail: format!(
                    "course `{}` has {} lectures but only {avail} available periods",
                    course.id, course.n_lectures
                ),
            });
        }
    }
    let slots = inst.n_rooms() * inst.n_periods();
    if inst.n_lectures() > slots {
        out.push(Finding {
            kind: FindingKind::ProvablyInfeasible,
            course: None,
            detail: format!("{} lectures but only {slots} (room, period) slots", inst.n_lectures()),
        });
    }
    for (c, course) in inst.courses.iter().enumerate() {
        if course.n_students > inst.max_capacity {
            out.push(Finding {
                kind: FindingKind::UnrealisticRoomEndowment,
                course: Some(c),
                detail: format!(
                    "course `{}` has {} students, largest room seats {}",
                    course.id, course.n_students, inst.max_capacity
                ),
            });
        }
    }
    out
}

pub fn is_provably_infeasible(inst: &Instance) -> bool {
    validate_instance(inst).iter().any(|f| f.kind == FindingKind::ProvablyInfeasible)
}

/// Unordered course pairs `(a, b)`, `a < b`, that share a curriculum or a teacher.
pub fn conflict_pairs(inst: &Instance) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for a in 0..inst.n_courses() {
        for &b in inst.conflicts_of(a) {
            if a < b {
                out.insert((a, b));
            }
        }
    }
    out
}

pub const FEATURE_NAMES: [&str; 7] = ["Le", "Cu", "RO", "Co", "Av", "RS", "DL"];

/// The seven instance features used for configuration prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct FeatureVector<F> {
    /// Total lectures.
    #[serde(rename = "Le")]
    pub lectures: F,
    /// Number of curricula.
    #[serde(rename = "Cu")]
    pub curricula: F,
    /// Room occupation, percent.
    #[serde(rename = "RO")]
    pub room_occupation: F,
    /// Conflicting course pairs over all course pairs, percent.
    #[serde(rename = "Co")]
    pub conflicts: F,
    /// Available (course, period) cells, percent.
    #[serde(rename = "Av")]
    pub availability: F,
    /// Mean share of rooms large enough for a course, percent.
    #[serde(rename = "RS")]
    pub room_suitability: F,
    /// Average daily lectures per curriculum.
    #[serde(rename = "DL")]
    pub daily_lectures: F,
}

impl<F: Scalar> FeatureVector<F> {
    pub fn to_array(&self) -> [F; 7] {
        [
            self.lectures,
            self.curricula,
            self.room_occupation,
            self.conflicts,
            self.availability,
            self.room_suitability,
            self.daily_lectures,
        ]
    }

    pub fn from_array(v: [F; 7]) -> Self {
        Self {
            lectures: v[0],
            curricula: v[1],
            room_occupation: v[2],
            conflicts: v[3],
            availability: v[4],
            room_suitability: v[5],
            daily_lectures: v[6],
        }
    }
}

pub fn extract_features<F: Scalar>(inst: &Instance) -> Result<FeatureVector<F>> {
    let n_periods = inst.n_periods();
    let n_rooms = inst.n_rooms();
    let n_courses = inst.n_courses();
    if n_rooms == 0 {
        return Err(Error::Degenerate("instance has no rooms".into()));
    }
    if n_periods == 0 {
        return Err(Error::Degenerate("instance has no periods".into()));
    }
    let hundred = F::of(100.0);
    let le = inst.n_lectures();

    let ro = hundred * F::of_usize(le) / F::of_usize(n_rooms * n_periods);

    let co = if n_courses < 2 {
        F::zero()
    } else {
        let pairs = n_courses * (n_courses - 1) / 2;
        hundred * F::of_usize(conflict_pairs(inst).len()) / F::of_usize(pairs)
    };

    let av = if n_courses == 0 {
        hundred
    } else {
        hundred
            * (F::one() - F::of_usize(inst.unavailabilities.len()) / F::of_usize(n_courses * n_periods))
    };

    let rs = if n_courses == 0 {
        hundred
    } else {
        let total: F = inst
            .courses
            .iter()
            .map(|c| {
                let fit = inst.rooms.iter().filter(|r| r.capacity >= c.n_students).count();
                hundred * F::of_usize(fit) / F::of_usize(n_rooms)
            })
            .sum();
        total / F::of_usize(n_courses)
    };

    let dl = if inst.curricula.is_empty() {
        F::zero()
    } else {
        let lectures: usize = inst
            .curricula
            .iter()
            .flat_map(|q| q.courses.iter().map(|&c| inst.courses[c].n_lectures))
            .sum();
        F::of_usize(lectures) / F::of_usize(inst.curricula.len() * inst.n_days)
    };

    Ok(FeatureVector {
        lectures: F::of_usize(le),
        curricula: F::of_usize(inst.curricula.len()),
        room_occupation: ro,
        conflicts: co,
        availability: av,
        room_suitability: rs,
        daily_lectures: dl,
    })
}

/// Size parameters for [`generate_toy_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToySpec {
    pub days: usize,
    pub timeslots: usize,
    pub rooms: usize,
    pub courses: usize,
    pub curricula: usize,
    /// Each course draws its lecture count uniformly from `1..=max_lectures`.
    pub max_lectures: usize,
}

/// Small random instance for tests and demos. Never provably infeasible.
pub fn generate_toy_instance(spec: ToySpec, seed: u64) -> Result<Instance> {
    let ToySpec { days, timeslots, rooms, courses, curricula, max_lectures } = spec;
    if days == 0 || timeslots == 0 || rooms == 0 || courses == 0 || curricula == 0 || max_lectures == 0 {
        return Err(Error::InvalidArgument("all toy instance counts must be at least 1".into()));
    }
    let n_periods = days * timeslots;
    if max_lectures > n_periods {
        return Err(Error::InvalidArgument(format!(
            "{max_lectures} lectures cannot fit into {n_periods} distinct periods"
        )));
    }
    let slots = rooms * n_periods;
    if courses > slots {
        return Err(Error::InvalidArgument(format!("{courses} courses cannot fit into {slots} slots")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_teachers = courses.div_ceil(2).max(1);
    let mut course_list: Vec<Course> = (0..courses)
        .map(|i| {
            let n_lectures = rng.gen_range(1..=max_lectures);
            Course {
                id: format!("c{i:02}"),
                teacher: format!("t{:02}", rng.gen_range(0..n_teachers)),
                n_lectures,
                min_working_days: rng.gen_range(1..=n_lectures.min(days)),
                n_students: rng.gen_range(5..=40),
            }
        })
        .collect();
    // total lectures never exceed the (room, period) slots
    let mut total: usize = course_list.iter().map(|c| c.n_lectures).sum();
    while total > slots {
        let c = (0..courses).max_by_key(|&i| (course_list[i].n_lectures, std::cmp::Reverse(i))).unwrap_or(0);
        course_list[c].n_lectures -= 1;
        course_list[c].min_working_days = course_list[c].min_working_days.min(course_list[c].n_lectures);
        total -= 1;
    }

    let mut room_list: Vec<Room> = (0..rooms)
        .map(|i| Room { id: format!("r{i}"), capacity: rng.gen_range(10..=45) })
        .collect();
    let max_students = course_list.iter().map(|c| c.n_students).max().unwrap_or(0);
    if room_list.iter().all(|r| r.capacity < max_students) {
        let k = rng.gen_range(0..rooms);
        room_list[k].capacity = max_students;
    }

    let mut idx: Vec<usize> = (0..courses).collect();
    let curriculum_list: Vec<Curriculum> = (0..curricula)
        .map(|i| {
            idx.shuffle(&mut rng);
            let k = rng.gen_range(1..=courses.min(3));
            let mut members = idx[..k].to_vec();
            members.sort_unstable();
            Curriculum { id: format!("q{i:02}"), courses: members }
        })
        .collect();

    let mut unavailabilities = Vec::new();
    for (c, course) in course_list.iter_mut().enumerate() {
        let mut blocked = 0;
        for p in 0..n_periods {
            if rng.gen_bool(0.15) && n_periods - blocked > course.n_lectures {
                blocked += 1;
                unavailabilities.push(Unavailability { course: c, day: p / timeslots, timeslot: p % timeslots });
            }
        }
    }

    Instance::new(
        format!("toy-{seed}"),
        days,
        timeslots,
        course_list,
        room_list,
        curriculum_list,
        unavailabilities,
    )
}
