//! Timetables, the weighted cost function and its incremental evaluation.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::instance::{is_provably_infeasible, Instance};

pub const W_MIN_WORKING_DAYS: u64 = 5;
pub const W_ISOLATED_LECTURES: u64 = 2;
pub const W_ROOM_CAPACITY: u64 = 1;
pub const W_ROOM_STABILITY: u64 = 1;

/// Largest search space [`brute_force_optimum`] agrees to enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub period: usize,
    pub room: usize,
}

/// Violation counts per constraint and the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub conflicts: u64,
    pub room_occupancy: u64,
    pub room_capacity: u64,
    pub min_working_days: u64,
    pub isolated_lectures: u64,
    pub room_stability: u64,
    pub w_hard: u64,
    pub total: u64,
}

impl CostBreakdown {
    pub fn new(
        conflicts: u64,
        room_occupancy: u64,
        room_capacity: u64,
        min_working_days: u64,
        isolated_lectures: u64,
        room_stability: u64,
        w_hard: u64,
    ) -> Self {
        let total = w_hard * (conflicts + room_occupancy)
            + W_MIN_WORKING_DAYS * min_working_days
            + W_ISOLATED_LECTURES * isolated_lectures
            + W_ROOM_CAPACITY * room_capacity
            + W_ROOM_STABILITY * room_stability;
        Self {
            conflicts,
            room_occupancy,
            room_capacity,
            min_working_days,
            isolated_lectures,
            room_stability,
            w_hard,
            total,
        }
    }

    pub fn hard(&self) -> u64 {
        self.conflicts + self.room_occupancy
    }

    /// Weighted soft cost only, i.e. the ITC-2007 objective of a feasible timetable.
    pub fn soft(&self) -> u64 {
        self.total - self.w_hard * self.hard()
    }

    pub fn is_feasible(&self) -> bool {
        self.hard() == 0
    }

    pub fn with_w_hard(&self, w_hard: u64) -> Self {
        Self::new(
            self.conflicts,
            self.room_occupancy,
            self.room_capacity,
            self.min_working_days,
            self.isolated_lectures,
            self.room_stability,
            w_hard,
        )
    }

    /// True when `total` matches the weighted sum of the components.
    pub fn is_consistent(&self) -> bool {
        self.with_w_hard(self.w_hard).total == self.total
    }
}

/// Signed change of every cost component caused by a move.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComponentDelta {
    pub conflicts: i64,
    pub room_occupancy: i64,
    pub room_capacity: i64,
    pub min_working_days: i64,
    pub isolated_lectures: i64,
    pub room_stability: i64,
}

impl ComponentDelta {
    pub fn weighted(&self, w_hard: u64) -> i64 {
        w_hard as i64 * (self.conflicts + self.room_occupancy)
            + W_MIN_WORKING_DAYS as i64 * self.min_working_days
            + W_ISOLATED_LECTURES as i64 * self.isolated_lectures
            + W_ROOM_CAPACITY as i64 * self.room_capacity
            + W_ROOM_STABILITY as i64 * self.room_stability
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    /// Put one lecture into a new (period, room).
    MoveLecture { lecture: usize, period: usize, room: usize },
    /// Exchange the (period, room) of two lectures of distinct courses.
    SwapLectures { a: usize, b: usize },
}

impl Move {
    pub fn is_swap(&self) -> bool {
        matches!(self, Move::SwapLectures { .. })
    }
}

/// A complete assignment of lectures to slots plus the occupancy tables the
/// incremental evaluator reads.
#[derive(Debug, Clone)]
pub struct Timetable {
    n_periods: usize,
    n_rooms: usize,
    n_days: usize,
    periods_per_day: usize,
    assignment: Vec<Slot>,
    slot_count: Vec<u16>,
    course_period: Vec<u32>,
    course_day_count: Vec<u16>,
    course_days: Vec<u16>,
    course_room_count: Vec<u16>,
    course_rooms: Vec<u16>,
    curriculum_period_count: Vec<u16>,
    empty_slots: Vec<u32>,
    empty_pos: Vec<u32>,
}

impl PartialEq for Timetable {
    fn eq(&self, other: &Self) -> bool {
        self.assignment == other.assignment
    }
}

impl Eq for Timetable {}

impl Timetable {
    /// Builds a timetable from a per-lecture assignment, enforcing the
    /// search-space rules (availability, one lecture per course and period).
    pub fn from_assignment(inst: &Instance, assignment: Vec<Slot>) -> Result<Self> {
        if assignment.len() != inst.n_lectures() {
            return Err(Error::InvalidArgument(format!(
                "assignment has {} entries for {} lectures",
                assignment.len(),
                inst.n_lectures()
            )));
        }
        let np = inst.n_periods();
        let nr = inst.n_rooms();
        let mut seen = vec![false; inst.n_courses() * np];
        for (l, s) in assignment.iter().enumerate() {
            let c = inst.course_of(l);
            if s.period >= np || s.room >= nr {
                return Err(Error::InvalidArgument(format!("lecture {l} assigned outside the grid")));
            }
            if !inst.is_available(c, s.period) {
                return Err(Error::InvalidArgument(format!(
                    "course `{}` is unavailable in period {}",
                    inst.courses()[c].id,
                    s.period
                )));
            }
            if std::mem::replace(&mut seen[c * np + s.period], true) {
                return Err(Error::InvalidArgument(format!(
                    "course `{}` has two lectures in period {}",
                    inst.courses()[c].id,
                    s.period
                )));
            }
        }
        Ok(Self::build(inst, assignment))
    }

    fn build(inst: &Instance, assignment: Vec<Slot>) -> Self {
        let np = inst.n_periods();
        let nr = inst.n_rooms();
        let nd = inst.n_days();
        let nc = inst.n_courses();
        let mut tt = Self {
            n_periods: np,
            n_rooms: nr,
            n_days: nd,
            periods_per_day: inst.periods_per_day(),
            assignment: Vec::with_capacity(assignment.len()),
            slot_count: vec![0; np * nr],
            course_period: vec![NONE; nc * np],
            course_day_count: vec![0; nc * nd],
            course_days: vec![0; nc],
            course_room_count: vec![0; nc * nr],
            course_rooms: vec![0; nc],
            curriculum_period_count: vec![0; inst.curricula().len() * np],
            empty_slots: (0..(np * nr) as u32).collect(),
            empty_pos: (0..(np * nr) as u32).collect(),
        };
        for (l, s) in assignment.into_iter().enumerate() {
            tt.assignment.push(s);
            tt.place(inst, l, s);
        }
        tt
    }

    pub fn assignment(&self) -> &[Slot] {
        &self.assignment
    }

    pub fn slot_of(&self, lecture: usize) -> Slot {
        self.assignment[lecture]
    }

    /// Lectures currently sharing `(period, room)`.
    #[inline]
    pub fn occupancy(&self, period: usize, room: usize) -> usize {
        self.slot_count[period * self.n_rooms + room] as usize
    }

    /// Lecture of `course` scheduled in `period`, if any.
    #[inline]
    pub fn lecture_at(&self, course: usize, period: usize) -> Option<usize> {
        match self.course_period[course * self.n_periods + period] {
            NONE => None,
            l => Some(l as usize),
        }
    }

    #[inline]
    pub fn curriculum_count(&self, curriculum: usize, period: usize) -> usize {
        self.curriculum_period_count[curriculum * self.n_periods + period] as usize
    }

    /// Slots with no lecture, in no particular order.
    pub fn empty_slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.empty_slots.iter().map(move |&s| Slot {
            period: s as usize / self.n_rooms,
            room: s as usize % self.n_rooms,
        })
    }

    pub fn n_empty_slots(&self) -> usize {
        self.empty_slots.len()
    }

    #[inline]
    pub(crate) fn empty_slot(&self, i: usize) -> Slot {
        let s = self.empty_slots[i] as usize;
        Slot { period: s / self.n_rooms, room: s % self.n_rooms }
    }

    fn place(&mut self, inst: &Instance, l: usize, s: Slot) {
        let c = inst.course_of(l);
        let si = s.period * self.n_rooms + s.room;
        self.slot_count[si] += 1;
        if self.slot_count[si] == 1 {
            let pos = self.empty_pos[si] as usize;
            let last = *self.empty_slots.last().expect("empty slot list out of sync");
            self.empty_slots.swap_remove(pos);
            if last as usize != si {
                self.empty_pos[last as usize] = pos as u32;
            }
            self.empty_pos[si] = NONE;
        }
        self.course_period[c * self.n_periods + s.period] = l as u32;
        let d = s.period / self.periods_per_day;
        let cd = &mut self.course_day_count[c * self.n_days + d];
        *cd += 1;
        if *cd == 1 {
            self.course_days[c] += 1;
        }
        let cr = &mut self.course_room_count[c * self.n_rooms + s.room];
        *cr += 1;
        if *cr == 1 {
            self.course_rooms[c] += 1;
        }
        for &q in inst.curricula_of(c) {
            self.curriculum_period_count[q * self.n_periods + s.period] += 1;
        }
    }

    fn unplace(&mut self, inst: &Instance, l: usize, s: Slot) {
        let c = inst.course_of(l);
        let si = s.period * self.n_rooms + s.room;
        self.slot_count[si] -= 1;
        if self.slot_count[si] == 0 {
            self.empty_pos[si] = self.empty_slots.len() as u32;
            self.empty_slots.push(si as u32);
        }
        self.course_period[c * self.n_periods + s.period] = NONE;
        let d = s.period / self.periods_per_day;
        let cd = &mut self.course_day_count[c * self.n_days + d];
        *cd -= 1;
        if *cd == 0 {
            self.course_days[c] -= 1;
        }
        let cr = &mut self.course_room_count[c * self.n_rooms + s.room];
        *cr -= 1;
        if *cr == 0 {
            self.course_rooms[c] -= 1;
        }
        for &q in inst.curricula_of(c) {
            self.curriculum_period_count[q * self.n_periods + s.period] -= 1;
        }
    }

    fn relocate(&mut self, inst: &Instance, l: usize, to: Slot) {
        let from = self.assignment[l];
        self.unplace(inst, l, from);
        self.assignment[l] = to;
        self.place(inst, l, to);
    }

    /// Compares every derived table against one rebuilt from the assignment.
    pub fn tables_consistent(&self, inst: &Instance) -> bool {
        let fresh = Self::build(inst, self.assignment.clone());
        let mut a = self.empty_slots.clone();
        let mut b = fresh.empty_slots.clone();
        a.sort_unstable();
        b.sort_unstable();
        let positions_ok = self
            .empty_slots
            .iter()
            .enumerate()
            .all(|(i, &s)| self.empty_pos[s as usize] as usize == i);
        a == b
            && positions_ok
            && self.slot_count == fresh.slot_count
            && self.course_period == fresh.course_period
            && self.course_day_count == fresh.course_day_count
            && self.course_days == fresh.course_days
            && self.course_room_count == fresh.course_room_count
            && self.course_rooms == fresh.course_rooms
            && self.curriculum_period_count == fresh.curriculum_period_count
    }
}

/// Random timetable respecting availability and distinct periods per course.
pub fn random_assignment(inst: &Instance, seed: u64) -> Result<Timetable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_assignment_with(inst, &mut rng)
}

pub fn random_assignment_with<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Result<Timetable> {
    if inst.n_rooms() == 0 {
        return Err(Error::Infeasible("instance has no rooms".into()));
    }
    if is_provably_infeasible(inst) {
        return Err(Error::Infeasible("some course has more lectures than available periods".into()));
    }
    let mut assignment = Vec::with_capacity(inst.n_lectures());
    let mut periods = Vec::with_capacity(inst.n_periods());
    for c in 0..inst.n_courses() {
        periods.clear();
        periods.extend((0..inst.n_periods()).filter(|&p| inst.is_available(c, p)));
        periods.shuffle(rng);
        for &p in &periods[..inst.lectures_of(c).len()] {
            assignment.push(Slot { period: p, room: rng.gen_range(0..inst.n_rooms()) });
        }
    }
    Ok(Timetable::build(inst, assignment))
}

/// Evaluates a raw assignment from scratch; shares no state with the
/// incremental tables.
pub fn assignment_cost(inst: &Instance, assignment: &[Slot], w_hard: u64) -> CostBreakdown {
    let np = inst.n_periods();
    let nr = inst.n_rooms();
    let ppd = inst.periods_per_day();

    let mut by_period: Vec<Vec<usize>> = vec![Vec::new(); np];
    for (l, s) in assignment.iter().enumerate() {
        by_period[s.period].push(l);
    }
    let mut conflicts = 0u64;
    for lectures in &by_period {
        for (i, &a) in lectures.iter().enumerate() {
            for &b in &lectures[i + 1..] {
                if inst.in_conflict(inst.course_of(a), inst.course_of(b)) {
                    conflicts += 1;
                }
            }
        }
    }

    let mut per_slot = vec![0u64; np * nr];
    for s in assignment {
        per_slot[s.period * nr + s.room] += 1;
    }
    let room_occupancy = per_slot.iter().map(|&k| k.saturating_sub(1)).sum();

    let room_capacity = assignment
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let students = inst.courses()[inst.course_of(l)].n_students;
            students.saturating_sub(inst.rooms()[s.room].capacity) as u64
        })
        .sum();

    let mut min_working_days = 0u64;
    let mut room_stability = 0u64;
    for (c, course) in inst.courses().iter().enumerate() {
        let mut days: Vec<usize> = inst.lectures_of(c).map(|l| assignment[l].period / ppd).collect();
        days.sort_unstable();
        days.dedup();
        min_working_days += course.min_working_days.saturating_sub(days.len()) as u64;
        let mut rooms: Vec<usize> = inst.lectures_of(c).map(|l| assignment[l].room).collect();
        rooms.sort_unstable();
        rooms.dedup();
        room_stability += rooms.len().saturating_sub(1) as u64;
    }

    let mut isolated_lectures = 0u64;
    let mut count = vec![0usize; np];
    for q in inst.curricula() {
        count.iter_mut().for_each(|x| *x = 0);
        for &c in &q.courses {
            for l in inst.lectures_of(c) {
                count[assignment[l].period] += 1;
            }
        }
        for p in 0..np {
            let t = p % ppd;
            let prev = t > 0 && count[p - 1] > 0;
            let next = t + 1 < ppd && count[p + 1] > 0;
            if count[p] == 1 && !prev && !next {
                isolated_lectures += 1;
            }
        }
    }

    CostBreakdown::new(
        conflicts,
        room_occupancy,
        room_capacity,
        min_working_days,
        isolated_lectures,
        room_stability,
        w_hard,
    )
}

pub fn full_cost(inst: &Instance, tt: &Timetable, w_hard: u64) -> CostBreakdown {
    assignment_cost(inst, tt.assignment(), w_hard)
}

/// Checks that `mv` keeps every timetable invariant.
pub fn check_move(inst: &Instance, tt: &Timetable, mv: &Move) -> Result<()> {
    let nl = inst.n_lectures();
    match *mv {
        Move::MoveLecture { lecture, period, room } => {
            if lecture >= nl || period >= inst.n_periods() || room >= inst.n_rooms() {
                return Err(Error::InapplicableMove("index out of range".into()));
            }
            let from = tt.slot_of(lecture);
            if from.period == period && from.room == room {
                return Err(Error::InapplicableMove("target equals the current slot".into()));
            }
            let c = inst.course_of(lecture);
            if !inst.is_available(c, period) {
                return Err(Error::InapplicableMove("course unavailable in target period".into()));
            }
            if period != from.period && tt.lecture_at(c, period).is_some() {
                return Err(Error::InapplicableMove("course already has a lecture in target period".into()));
            }
        }
        Move::SwapLectures { a, b } => {
            if a >= nl || b >= nl {
                return Err(Error::InapplicableMove("index out of range".into()));
            }
            let (ca, cb) = (inst.course_of(a), inst.course_of(b));
            if ca == cb {
                return Err(Error::InapplicableMove("swap needs lectures of distinct courses".into()));
            }
            let (sa, sb) = (tt.slot_of(a), tt.slot_of(b));
            if sa.period != sb.period {
                if !inst.is_available(ca, sb.period) || !inst.is_available(cb, sa.period) {
                    return Err(Error::InapplicableMove("swap violates availability".into()));
                }
                if tt.lecture_at(ca, sb.period).is_some() || tt.lecture_at(cb, sa.period).is_some() {
                    return Err(Error::InapplicableMove("swap puts two lectures of a course in one period".into()));
                }
            }
        }
    }
    Ok(())
}

#[inline]
fn occupancy_penalty(k: i64) -> i64 {
    (k - 1).max(0)
}

#[inline]
fn capacity_penalty(inst: &Instance, course: usize, room: usize) -> i64 {
    inst.courses()[course].n_students.saturating_sub(inst.rooms()[room].capacity) as i64
}

/// Lectures in `period` whose course conflicts with `course`.
#[inline]
fn conflicts_with(inst: &Instance, tt: &Timetable, course: usize, period: usize) -> i64 {
    inst.conflicts_of(course)
        .iter()
        .filter(|&&d| tt.course_period[d * tt.n_periods + period] != NONE)
        .count() as i64
}

fn day_change(inst: &Instance, tt: &Timetable, course: usize, from: usize, to: usize) -> i64 {
    let d0 = from / tt.periods_per_day;
    let d1 = to / tt.periods_per_day;
    if d0 == d1 {
        return 0;
    }
    let days = tt.course_days[course] as i64;
    let mut after = days;
    if tt.course_day_count[course * tt.n_days + d0] == 1 {
        after -= 1;
    }
    if tt.course_day_count[course * tt.n_days + d1] == 0 {
        after += 1;
    }
    let mwd = inst.courses()[course].min_working_days as i64;
    (mwd - after).max(0) - (mwd - days).max(0)
}

fn room_change(tt: &Timetable, course: usize, from: usize, to: usize) -> i64 {
    if from == to {
        return 0;
    }
    let mut delta = 0;
    if tt.course_room_count[course * tt.n_rooms + from] == 1 {
        delta -= 1;
    }
    if tt.course_room_count[course * tt.n_rooms + to] == 0 {
        delta += 1;
    }
    delta
}

type CountChanges = SmallVec<[(usize, usize, i32); 16]>;

fn push_change(changes: &mut CountChanges, q: usize, p: usize, d: i32) {
    if let Some(e) = changes.iter_mut().find(|e| e.0 == q && e.1 == p) {
        e.2 += d;
    } else {
        changes.push((q, p, d));
    }
}

fn isolated_change(tt: &Timetable, changes: &CountChanges) -> i64 {
    let ppd = tt.periods_per_day;
    let mut cells: SmallVec<[(usize, usize); 32]> = SmallVec::new();
    for &(q, p, d) in changes {
        if d == 0 {
            continue;
        }
        let t = p % ppd;
        if t > 0 {
            cells.push((q, p - 1));
        }
        cells.push((q, p));
        if t + 1 < ppd {
            cells.push((q, p + 1));
        }
    }
    cells.sort_unstable();
    cells.dedup();

    let before = |q: usize, p: usize| tt.curriculum_period_count[q * tt.n_periods + p] as i32;
    let after = |q: usize, p: usize| {
        before(q, p) + changes.iter().filter(|e| e.0 == q && e.1 == p).map(|e| e.2).sum::<i32>()
    };
    let isolated = |count: &dyn Fn(usize, usize) -> i32, q: usize, p: usize| -> i64 {
        let t = p % ppd;
        let lonely = count(q, p) == 1
            && (t == 0 || count(q, p - 1) == 0)
            && (t + 1 >= ppd || count(q, p + 1) == 0);
        lonely as i64
    };
    cells.iter().map(|&(q, p)| isolated(&after, q, p) - isolated(&before, q, p)).sum()
}

/// Per-component cost change of an applicable move. Does not check
/// applicability; see [`check_move`].
pub fn delta_components(inst: &Instance, tt: &Timetable, mv: &Move) -> ComponentDelta {
    let mut d = ComponentDelta::default();
    let mut changes = CountChanges::new();
    match *mv {
        Move::MoveLecture { lecture, period, room } => {
            let c = inst.course_of(lecture);
            let from = tt.slot_of(lecture);
            let k_from = tt.occupancy(from.period, from.room) as i64;
            let k_to = tt.occupancy(period, room) as i64;
            d.room_occupancy = occupancy_penalty(k_from - 1) - occupancy_penalty(k_from)
                + occupancy_penalty(k_to + 1)
                - occupancy_penalty(k_to);
            d.room_capacity = capacity_penalty(inst, c, room) - capacity_penalty(inst, c, from.room);
            d.room_stability = room_change(tt, c, from.room, room);
            if from.period != period {
                d.conflicts = conflicts_with(inst, tt, c, period) - conflicts_with(inst, tt, c, from.period);
                d.min_working_days = day_change(inst, tt, c, from.period, period);
                for &q in inst.curricula_of(c) {
                    push_change(&mut changes, q, from.period, -1);
                    push_change(&mut changes, q, period, 1);
                }
                d.isolated_lectures = isolated_change(tt, &changes);
            }
        }
        Move::SwapLectures { a, b } => {
            let (ca, cb) = (inst.course_of(a), inst.course_of(b));
            let (sa, sb) = (tt.slot_of(a), tt.slot_of(b));
            d.room_capacity = capacity_penalty(inst, ca, sb.room) + capacity_penalty(inst, cb, sa.room)
                - capacity_penalty(inst, ca, sa.room)
                - capacity_penalty(inst, cb, sb.room);
            d.room_stability = room_change(tt, ca, sa.room, sb.room) + room_change(tt, cb, sb.room, sa.room);
            if sa.period != sb.period {
                let mutual = inst.in_conflict(ca, cb) as i64;
                d.conflicts = conflicts_with(inst, tt, ca, sb.period) - mutual
                    + conflicts_with(inst, tt, cb, sa.period)
                    - mutual
                    - conflicts_with(inst, tt, ca, sa.period)
                    - conflicts_with(inst, tt, cb, sb.period);
                d.min_working_days =
                    day_change(inst, tt, ca, sa.period, sb.period) + day_change(inst, tt, cb, sb.period, sa.period);
                for &q in inst.curricula_of(ca) {
                    push_change(&mut changes, q, sa.period, -1);
                    push_change(&mut changes, q, sb.period, 1);
                }
                for &q in inst.curricula_of(cb) {
                    push_change(&mut changes, q, sb.period, -1);
                    push_change(&mut changes, q, sa.period, 1);
                }
                d.isolated_lectures = isolated_change(tt, &changes);
            }
        }
    }
    d
}

/// Weighted cost change of `mv`; `tt` is left untouched.
pub fn delta_cost(inst: &Instance, tt: &Timetable, mv: &Move, w_hard: u64) -> Result<i64> {
    check_move(inst, tt, mv)?;
    Ok(delta_components(inst, tt, mv).weighted(w_hard))
}

pub fn apply_move(inst: &Instance, tt: &mut Timetable, mv: &Move) -> Result<()> {
    check_move(inst, tt, mv)?;
    apply_move_unchecked(inst, tt, mv);
    Ok(())
}

/// Applies a move already known to be applicable.
pub fn apply_move_unchecked(inst: &Instance, tt: &mut Timetable, mv: &Move) {
    match *mv {
        Move::MoveLecture { lecture, period, room } => tt.relocate(inst, lecture, Slot { period, room }),
        Move::SwapLectures { a, b } => {
            let (sa, sb) = (tt.slot_of(a), tt.slot_of(b));
            tt.relocate(inst, a, sb);
            tt.relocate(inst, b, sa);
        }
    }
}

/// Exhaustive minimiser of the weighted cost for desk-sized instances.
///
/// Lectures of one course are interchangeable, so each course's lectures
/// are enumerated in increasing period order.
pub fn brute_force_optimum(inst: &Instance, w_hard: u64) -> Result<(Timetable, CostBreakdown)> {
    if is_provably_infeasible(inst) || inst.n_rooms() == 0 {
        return Err(Error::Infeasible("no timetable satisfies availability".into()));
    }
    let mut size: u128 = 1;
    for l in 0..inst.n_lectures() {
        let c = inst.course_of(l);
        size = size.saturating_mul((inst.n_available_periods(c) * inst.n_rooms()) as u128);
        if size > BRUTE_FORCE_LIMIT {
            return Err(Error::SpaceTooLarge { size, limit: BRUTE_FORCE_LIMIT });
        }
    }

    struct Search<'a> {
        inst: &'a Instance,
        w_hard: u64,
        current: Vec<Slot>,
        best: Option<(Vec<Slot>, CostBreakdown)>,
    }

    impl Search<'_> {
        fn go(&mut self, l: usize) {
            let inst = self.inst;
            if l == inst.n_lectures() {
                let cost = assignment_cost(inst, &self.current, self.w_hard);
                if self.best.as_ref().is_none_or(|(_, b)| cost.total < b.total) {
                    self.best = Some((self.current.clone(), cost));
                }
                return;
            }
            let c = inst.course_of(l);
            let start = if l > inst.lectures_of(c).start { self.current[l - 1].period + 1 } else { 0 };
            for p in start..inst.n_periods() {
                if !inst.is_available(c, p) {
                    continue;
                }
                for r in 0..inst.n_rooms() {
                    self.current.push(Slot { period: p, room: r });
                    self.go(l + 1);
                    self.current.pop();
                }
            }
        }
    }

    let mut search = Search { inst, w_hard, current: Vec::with_capacity(inst.n_lectures()), best: None };
    search.go(0);
    let (assignment, cost) = search
        .best
        .ok_or_else(|| Error::Infeasible("no timetable satisfies availability".into()))?;
    Ok((Timetable::build(inst, assignment), cost))
}

/// ITC-2007 solution text: `<CourseID> <RoomID> <Day> <Timeslot>` per lecture.
pub fn format_solution(inst: &Instance, tt: &Timetable) -> String {
    let ppd = inst.periods_per_day();
    let mut out = String::new();
    for (c, course) in inst.courses().iter().enumerate() {
        let mut slots: Vec<Slot> = inst.lectures_of(c).map(|l| tt.slot_of(l)).collect();
        slots.sort_unstable();
        for s in slots {
            let _ = writeln!(out, "{} {} {} {}", course.id, inst.rooms()[s.room].id, s.period / ppd, s.period % ppd);
        }
    }
    out
}

pub fn parse_solution(inst: &Instance, text: &str) -> Result<Timetable> {
    let ppd = inst.periods_per_day();
    let mut per_course: Vec<Vec<Slot>> = vec![Vec::new(); inst.n_courses()];
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Solution { line: line_no, msg };
        if toks.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", toks.len())));
        }
        let c = inst.course_index(toks[0]).ok_or_else(|| err(format!("unknown course `{}`", toks[0])))?;
        let r = inst.room_index(toks[1]).ok_or_else(|| err(format!("unknown room `{}`", toks[1])))?;
        let day: usize = toks[2].parse().map_err(|_| err(format!("bad day `{}`", toks[2])))?;
        let t: usize = toks[3].parse().map_err(|_| err(format!("bad timeslot `{}`", toks[3])))?;
        if day >= inst.n_days() || t >= ppd {
            return Err(err(format!("period ({day}, {t}) outside the grid")));
        }
        let p = day * ppd + t;
        if !inst.is_available(c, p) {
            return Err(err(format!("course `{}` is unavailable at day {day} timeslot {t}", toks[0])));
        }
        if per_course[c].iter().any(|s| s.period == p) {
            return Err(err(format!("course `{}` has two lectures at day {day} timeslot {t}", toks[0])));
        }
        per_course[c].push(Slot { period: p, room: r });
    }
    let mut assignment = Vec::with_capacity(inst.n_lectures());
    for (c, slots) in per_course.into_iter().enumerate() {
        let expected = inst.courses()[c].n_lectures;
        if slots.len() != expected {
            return Err(Error::Solution {
                line: 0,
                msg: format!(
                    "lecture count mismatch for course `{}`: expected {expected}, found {}",
                    inst.courses()[c].id,
                    slots.len()
                ),
            });
        }
        assignment.extend(slots);
    }
    Timetable::from_assignment(inst, assignment)
}
