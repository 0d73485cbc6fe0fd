//! Parameter tuning: configuration sampling, racing, per-instance
//! performance assessment and feature-based configuration selection.

mod forest;
mod matrix;
mod race;
mod sampling;
mod selection;

pub use forest::{train_forest, Forest, ForestParams, Node, Tree};
pub use matrix::{build_performance_matrix, screen_instances, PerformanceMatrix, ResultTable};
pub use race::{f_race, Elimination, RaceOptions, RaceResult};
pub use sampling::{
    full_space, hammersley_points, radical_inverse, refined_space, scale_to_ranges, ConfigPoint, ParamRange,
};
pub use selection::{
    cross_validate_accuracy, permutation_importance, select_config, train_forests, ConfigModel, MODEL_FORMAT,
    MODEL_VERSION,
};
