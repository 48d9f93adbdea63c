//! Measurable Banach bundles and `L^p`-normed modules over finite atomic
//! measure spaces.

pub mod error;
pub mod exponent;
pub mod bundle;
pub mod criterion;
pub mod duality;
pub mod measure;
pub mod norm;
pub mod sample;
pub mod scalar;
pub mod suites;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use measure::{AtomSubset, MeasureSpace, ModuleFunction, ProbabilityReweighting, ScalarField};
pub use norm::{ModulusCurve, ModulusEstimate, NormEvaluator, NormKind, NormSpec, OptimizerBudget};
pub use scalar::Scalar;

pub type MeasureSpaceF64 = MeasureSpace<f64>;
pub type ScalarFieldF64 = ScalarField<f64>;
pub type NormSpecF64 = NormSpec<f64>;
pub type BundleF64 = bundle::Bundle<f64>;
pub type SectionF64 = bundle::Section<f64>;
pub type DualSectionF64 = duality::DualSection<f64>;

pub type MeasureSpaceF32 = MeasureSpace<f32>;
pub type ScalarFieldF32 = ScalarField<f32>;
pub type NormSpecF32 = NormSpec<f32>;
pub type BundleF32 = bundle::Bundle<f32>;
pub type SectionF32 = bundle::Section<f32>;
pub type DualSectionF32 = duality::DualSection<f32>;
