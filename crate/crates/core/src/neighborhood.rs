//! Move sampling over the union of the MoveLecture and SwapLectures
//! neighborhoods.
//!
//! The neighborhood is picked first (SwapLectures with probability equal to
//! the swap rate), then a move is drawn uniformly among the applicable moves
//! of that neighborhood by rejection sampling. While the instance has fewer
//! lectures than (room, period) slots, MoveLecture only targets slots that
//! are currently empty.

use rand::Rng;

use crate::error::{Error, Result};
use crate::evaluation::{check_move, Move, Slot, Timetable};
use crate::instance::Instance;
use crate::scalar::Scalar;

/// Rejection-sampling retry cap per draw.
pub const MAX_ATTEMPTS: usize = 10_000;
/// Candidate spaces up to this size are enumerated instead of
/// rejection-sampled; both draw uniformly among applicable moves.
pub const ENUMERATION_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    MoveLecture,
    SwapLectures,
}

impl Neighborhood {
    pub fn other(self) -> Self {
        match self {
            Neighborhood::MoveLecture => Neighborhood::SwapLectures,
            Neighborhood::SwapLectures => Neighborhood::MoveLecture,
        }
    }
}

/// Whether MoveLecture must target empty slots on this instance.
pub fn empty_room_restricted(inst: &Instance) -> bool {
    inst.n_lectures() < inst.n_rooms() * inst.n_periods()
}

pub fn choose_neighborhood<F: Scalar, R: Rng + ?Sized>(swap_rate: F, rng: &mut R) -> Neighborhood {
    if rng.gen::<f64>() < swap_rate.as_f64() {
        Neighborhood::SwapLectures
    } else {
        Neighborhood::MoveLecture
    }
}

pub fn sample_move<F: Scalar, R: Rng + ?Sized>(
    inst: &Instance,
    tt: &Timetable,
    swap_rate: F,
    rng: &mut R,
) -> Result<Move> {
    let nb = choose_neighborhood(swap_rate, rng);
    sample_in(inst, tt, nb, rng)
}

/// Uniform draw among the applicable moves of one neighborhood.
pub fn sample_in<R: Rng + ?Sized>(inst: &Instance, tt: &Timetable, nb: Neighborhood, rng: &mut R) -> Result<Move> {
    let nl = inst.n_lectures();
    if nl == 0 {
        return Err(Error::ExhaustedNeighborhood(0));
    }
    let restricted = empty_room_restricted(inst);
    let candidates = match nb {
        Neighborhood::SwapLectures => nl * nl,
        Neighborhood::MoveLecture if restricted => nl * tt.n_empty_slots(),
        Neighborhood::MoveLecture => nl * inst.n_periods() * inst.n_rooms(),
    };
    if candidates <= ENUMERATION_LIMIT {
        let moves = applicable_moves(inst, tt, nb);
        if moves.is_empty() {
            return Err(Error::ExhaustedNeighborhood(0));
        }
        return Ok(moves[rng.gen_range(0..moves.len())]);
    }
    for _ in 0..MAX_ATTEMPTS {
        let mv = match nb {
            Neighborhood::SwapLectures => {
                let a = rng.gen_range(0..nl);
                let b = rng.gen_range(0..nl);
                if inst.course_of(a) == inst.course_of(b) {
                    continue;
                }
                Move::SwapLectures { a, b }
            }
            Neighborhood::MoveLecture => {
                let lecture = rng.gen_range(0..nl);
                // The number of empty slots does not depend on the lecture,
                // so lecture-then-slot is uniform over (lecture, slot) pairs.
                let Slot { period, room } = if restricted {
                    tt.empty_slot(rng.gen_range(0..tt.n_empty_slots()))
                } else {
                    Slot { period: rng.gen_range(0..inst.n_periods()), room: rng.gen_range(0..inst.n_rooms()) }
                };
                Move::MoveLecture { lecture, period, room }
            }
        };
        if check_move(inst, tt, &mv).is_ok() {
            return Ok(mv);
        }
    }
    Err(Error::ExhaustedNeighborhood(MAX_ATTEMPTS))
}

/// Every applicable move of `nb`, honouring the empty-room restriction.
pub fn applicable_moves(inst: &Instance, tt: &Timetable, nb: Neighborhood) -> Vec<Move> {
    let nl = inst.n_lectures();
    let mut out = Vec::new();
    match nb {
        Neighborhood::SwapLectures => {
            for a in 0..nl {
                for b in 0..nl {
                    let mv = Move::SwapLectures { a, b };
                    if inst.course_of(a) != inst.course_of(b) && check_move(inst, tt, &mv).is_ok() {
                        out.push(mv);
                    }
                }
            }
        }
        Neighborhood::MoveLecture => {
            let slots: Vec<Slot> = if empty_room_restricted(inst) {
                tt.empty_slots().collect()
            } else {
                (0..inst.n_periods())
                    .flat_map(|period| (0..inst.n_rooms()).map(move |room| Slot { period, room }))
                    .collect()
            };
            for lecture in 0..nl {
                for &Slot { period, room } in &slots {
                    let mv = Move::MoveLecture { lecture, period, room };
                    if check_move(inst, tt, &mv).is_ok() {
                        out.push(mv);
                    }
                }
            }
        }
    }
    out
}
