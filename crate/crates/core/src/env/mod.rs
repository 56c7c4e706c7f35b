//! Environments: delay generators, loss sequences for both settings, dataset
//! loaders and best-in-hindsight comparators.

mod bco;
mod comparator;
mod delays;
mod mab;
mod text;

pub use bco::{
    load_regression_dataset, parse_regression, random_quadratic, synthetic_bco_functions, BcoEnvironment,
    LossFamily,
};
pub use comparator::{
    best_fixed_point, closed_form_minimizer, gradient_map_norm, minimize_projected, QuadraticForm, Solution,
    SolverOptions,
};
pub use delays::{periodic_delays, random_delays, REFERENCE_PATTERN};
pub use mab::{
    best_fixed_arm, load_ratings_dataset, parse_ratings, random_mab_losses, synthetic_mab_losses, MabEnvironment,
};
