//! Bandit convex optimization under unknown delays: DBGD with `(K+1)`-point
//! gradient estimates, feasible-set geometry, and the OGD/SOLID/FKM
//! baselines.

mod baselines;
mod dbgd;
mod gradient;
mod set;

pub use baselines::{
    fkm_gradient, fkm_step, ogd_step, sample_unit_sphere, solid_end_of_slot, Fkm, ProjectedGradient,
};
pub use dbgd::{dbgd_end_of_slot, dbgd_theorem2_params, DbgdParams, DbgdState};
pub use gradient::{estimate_gradient_multipoint, GradientEstimate, QueryValues};
pub use set::{FeasibleSet, Region};
