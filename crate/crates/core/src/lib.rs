//! Curriculum-based course timetabling (ITC-2007 formulation).
//!
//! The crate has two halves. The solver side parses instances
//! ([`instance`]), evaluates timetables exactly and incrementally
//! ([`evaluation`]), samples moves ([`neighborhood`]) and runs simulated
//! annealing with cutoff cooling ([`annealer`]). The tuning side samples
//! parameter configurations, races them, builds a per-instance
//! good-configuration matrix with FDR control and learns a feature-based
//! configuration selector from it ([`stats`], [`tuning`]).
//!
//! Real-valued code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to the common choices.

pub mod annealer;
pub mod error;
pub mod evaluation;
pub mod instance;
pub mod neighborhood;
pub mod scalar;
pub mod stats;
pub mod tuning;

pub use annealer::{anneal, anneal_with, compute_ns, metropolis_accept, AnnealOptions, SaParams, SearchResult};
pub use error::{Error, Result};
pub use evaluation::{
    apply_move, brute_force_optimum, delta_cost, format_solution, full_cost, parse_solution, random_assignment,
    CostBreakdown, Move, Slot, Timetable,
};
pub use instance::{
    conflict_pairs, extract_features, format_ctt, generate_toy_instance, parse_ctt, validate_instance, FeatureVector,
    Instance, ToySpec,
};
pub use neighborhood::sample_move;
pub use scalar::Scalar;

pub type SaParamsF64 = annealer::SaParams<f64>;
pub type SaParamsF32 = annealer::SaParams<f32>;
pub type SearchResultF64 = annealer::SearchResult<f64>;
pub type FeatureVectorF64 = instance::FeatureVector<f64>;
pub type FeatureVectorF32 = instance::FeatureVector<f32>;
pub type ConfigPointF64 = tuning::ConfigPoint<f64>;
pub type ForestF64 = tuning::Forest<f64>;
pub type ForestF32 = tuning::Forest<f32>;
pub type TestResultF64 = stats::TestResult<f64>;
