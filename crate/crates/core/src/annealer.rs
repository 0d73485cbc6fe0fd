//! Single-stage simulated annealing with cutoff-based geometric cooling and
//! an iteration budget.
//!
//! Each temperature level lasts until either `n_s` moves have been sampled
//! or `n_a = round(rho * n_s)` of them have been accepted. `n_s` is chosen
//! so that, without cutoffs, the temperature would reach `T_min` exactly
//! when the budget runs out; iterations saved by early cutoffs are spent at
//! the end at constant `T_min`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{apply_move_unchecked, delta_components, full_cost, random_assignment_with, CostBreakdown, Slot, Timetable};
use crate::instance::Instance;
use crate::neighborhood::{choose_neighborhood, sample_in};
use crate::scalar::Scalar;

/// Iteration budget used for full-length runs.
pub const DEFAULT_MAX_ITERATIONS: u64 = 300_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct SaParams<F = f64> {
    /// Starting temperature.
    pub t0: F,
    /// Expected minimum temperature.
    pub t_min: F,
    pub cooling_rate: F,
    /// Accepted-over-sampled ratio that triggers an early cooling step.
    pub accept_ratio: F,
    /// Probability of drawing from SwapLectures rather than MoveLecture.
    pub swap_rate: F,
    pub w_hard: u64,
    pub max_iterations: u64,
}

impl<F: Scalar> Default for SaParams<F> {
    /// The race winner: T0 = 30.25, T_min = 0.1567, rho = 0.0364, with
    /// cr = 0.99, sr = 0.43 and w_hard = 100.
    fn default() -> Self {
        Self {
            t0: F::of(30.25),
            t_min: F::of(0.1567),
            cooling_rate: F::of(0.99),
            accept_ratio: F::of(0.0364),
            swap_rate: F::of(0.43),
            w_hard: 100,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl<F: Scalar> SaParams<F> {
    pub fn with_budget(mut self, max_iterations: u64) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.t_min > F::zero()) {
            return bad("T_min must be positive");
        }
        if !(self.t0 > self.t_min) {
            return bad("T0 must exceed T_min");
        }
        if !(self.cooling_rate > F::zero() && self.cooling_rate < F::one()) {
            return bad("cooling rate must lie in (0, 1)");
        }
        if !(self.accept_ratio > F::zero() && self.accept_ratio <= F::one()) {
            return bad("accept ratio must lie in (0, 1]");
        }
        if !(self.swap_rate >= F::zero() && self.swap_rate <= F::one()) {
            return bad("swap rate must lie in [0, 1]");
        }
        if self.w_hard == 0 {
            return bad("w_hard must be positive");
        }
        if self.max_iterations == 0 {
            return bad("iteration budget must be at least 1");
        }
        Ok(())
    }
}

/// Geometric cooling steps needed to go from `T0` down to `T_min`.
pub fn cooling_steps<F: Scalar>(p: &SaParams<F>) -> Result<F> {
    p.validate()?;
    Ok((p.t0 / p.t_min).ln() / -p.cooling_rate.ln())
}

/// Moves sampled per temperature level so that `T_min` is hit exactly at
/// the end of the budget.
pub fn compute_ns<F: Scalar>(p: &SaParams<F>) -> Result<u64> {
    let steps = cooling_steps(p)?;
    let ns = (F::of(p.max_iterations as f64) / steps).round();
    Ok(ns.to_u64().unwrap_or(u64::MAX).max(1))
}

/// Accepted moves per level that trigger a cutoff (round half up, at least 1).
pub fn compute_na<F: Scalar>(p: &SaParams<F>, ns: u64) -> u64 {
    let na = (p.accept_ratio * F::of(ns as f64) + F::of(0.5)).floor();
    na.to_u64().unwrap_or(ns).clamp(1, ns)
}

/// Metropolis criterion on an integral cost change.
#[inline]
pub fn metropolis_accept<F: Scalar, R: Rng + ?Sized>(delta: i64, temperature: F, rng: &mut R) -> bool {
    if delta <= 0 {
        return true;
    }
    let p = (-F::of(delta as f64) / temperature).exp();
    F::of(rng.gen::<f64>()) < p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TraceEntry<F = f64> {
    pub iteration: u64,
    pub temperature: F,
    pub current_cost: u64,
    pub best_cost: u64,
}

#[derive(Debug, Clone, Default)]
pub struct AnnealOptions {
    /// Record one trace entry per cooling step.
    pub record_trace: bool,
    /// Wall-clock limit in addition to the iteration budget.
    pub max_duration: Option<Duration>,
}

#[derive(Debug, Clone)]
pub struct SearchResult<F = f64> {
    pub best_timetable: Timetable,
    pub best_cost: CostBreakdown,
    pub iterations_used: u64,
    pub temperature_trace: Option<Vec<TraceEntry<F>>>,
    pub feasible: bool,
    pub seed: u64,
    pub final_temperature: F,
    pub elapsed: Duration,
}

pub fn anneal<F: Scalar>(inst: &Instance, p: &SaParams<F>, seed: u64) -> Result<SearchResult<F>> {
    anneal_with(inst, p, seed, &AnnealOptions::default())
}

pub fn anneal_with<F: Scalar>(
    inst: &Instance,
    p: &SaParams<F>,
    seed: u64,
    opts: &AnnealOptions,
) -> Result<SearchResult<F>> {
    let start = Instant::now();
    p.validate()?;
    let ns = compute_ns(p)?;
    let na = compute_na(p, ns);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tt = random_assignment_with(inst, &mut rng)?;
    let mut current = full_cost(inst, &tt, p.w_hard).total as i64;
    let mut best = current;
    let mut best_assignment: Vec<Slot> = tt.assignment().to_vec();

    let mut trace = opts.record_trace.then(Vec::new);
    let mut temperature = p.t0;
    let mut at_floor = false;
    let mut sampled = 0u64;
    let mut accepted = 0u64;
    let mut iterations = 0u64;

    while iterations < p.max_iterations {
        if let Some(limit) = opts.max_duration {
            if iterations.is_multiple_of(4096) && start.elapsed() >= limit {
                break;
            }
        }
        let nb = choose_neighborhood(p.swap_rate, &mut rng);
        let mv = match sample_in(inst, &tt, nb, &mut rng) {
            Ok(mv) => mv,
            Err(Error::ExhaustedNeighborhood(_)) => match sample_in(inst, &tt, nb.other(), &mut rng) {
                Ok(mv) => mv,
                Err(Error::ExhaustedNeighborhood(_)) => {
                    log::warn!("no applicable move after {iterations} iterations; stopping early");
                    break;
                }
                Err(e) => return Err(e),
            },
            Err(e) => return Err(e),
        };
        iterations += 1;
        sampled += 1;

        let delta = delta_components(inst, &tt, &mv).weighted(p.w_hard);
        if metropolis_accept(delta, temperature, &mut rng) {
            apply_move_unchecked(inst, &mut tt, &mv);
            current += delta;
            accepted += 1;
            if current < best {
                best = current;
                best_assignment.copy_from_slice(tt.assignment());
            }
        }

        if !at_floor && (sampled >= ns || accepted >= na) {
            temperature = temperature * p.cooling_rate;
            if temperature <= p.t_min {
                temperature = p.t_min;
                at_floor = true;
            }
            sampled = 0;
            accepted = 0;
            if let Some(trace) = trace.as_mut() {
                trace.push(TraceEntry {
                    iteration: iterations,
                    temperature,
                    current_cost: current as u64,
                    best_cost: best as u64,
                });
            }
        }
    }

    let best_timetable = Timetable::from_assignment(inst, best_assignment)?;
    let best_cost = full_cost(inst, &best_timetable, p.w_hard);
    debug_assert_eq!(best_cost.total as i64, best);
    Ok(SearchResult {
        feasible: best_cost.is_feasible(),
        best_timetable,
        best_cost,
        iterations_used: iterations,
        temperature_trace: trace,
        seed,
        final_temperature: temperature,
        elapsed: start.elapsed(),
    })
}
