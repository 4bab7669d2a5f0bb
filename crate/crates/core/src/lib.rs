//! Optimal smoothings of sublinear functions and convex cones.
//!
//! A sublinear function `σ` (or a cone `K`) has a core of translates that fit
//! a unit quadratic (or unit ball) inside it. The min-norm point of the core
//! and its width fix the best achievable smoothness/accuracy trade-off, and
//! the extremal smoothings are built directly from them.

pub mod composite;
pub mod cone;
pub mod descriptor;
pub mod error;
pub mod figures;
pub mod function;
pub mod linalg;
pub mod numeric_core;
pub mod sampling;
pub mod simplex;
pub mod sublinear;
pub mod verify;

pub use composite::{
    accelerated_minimize, AffineMap, BenchRecord, CompositeSmoothing, MinimizeOptions, PlantedMinimax,
    SmoothMap, SoftAbsMap, Surrogate,
};
pub use cone::{
    conic_lift, cone_core, core_membership, hausdorff_estimate, Ball, BoxSet, ConeKind, ConeModel, ConicCore,
    ConvexBody, ConvexSet, HausdorffReport, Projection, SmoothedSet,
};
pub use error::{Error, Result};
pub use function::{
    compute_core, moreau_of_price, moreau_sublinear, price, FunctionalCore, Provenance, SmoothingSpec, Variant,
};
pub use numeric_core::{estimate_core, sample_normal_fan, uniqueness_probe, CoreEstimate};
pub use sublinear::{Family, SublinearFn, SupportSet};
pub use verify::CheckReport;
