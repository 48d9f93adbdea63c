//! Finite-dimensional norms, their duals, and the sphere optimizer.

pub(crate) mod linalg;
mod optim;
pub mod simplex;
mod spec;

pub use optim::{
    default_grid, derive_seed, modulus_curve, modulus_of_convexity, modulus_of_convexity_from,
    parallelogram_defect, sphere_sample, ModulusCurve, ModulusEstimate, NormEvaluator,
    OptimizerBudget,
};
pub use spec::{coordinate_directions, NormKind, NormSpec};
#[allow(unused_imports)]
pub(crate) use spec::lp_vec_norm;
