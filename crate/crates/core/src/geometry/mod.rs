//! Closed-form hyperbolic geometry in the upper half-plane and upper
//! half-space models.

mod classify;
mod convex;
mod displacement;
mod isometry;
mod point;

pub use classify::{classify, classify_strict, fixed_points, IsometryClass, Kind, MinSet, TAU_PAR};
pub use convex::{
    dist_to_geodesic, geodesic_point_at, project_to_geodesic, standardizer, ConvexSet,
};
pub use displacement::{displacement, grad_displacement, sublevel_contains, TAU_ZERO};
pub use isometry::{ElementKey, Ideal, Isometry, TAU_DET};
pub use point::{dist, exp, geodesic_point, log, Model, Point, Tangent};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("height must be positive, got {0}")]
    NonPositiveHeight(f64),
    #[error("non-finite coordinate or matrix entry")]
    NonFinite,
    #[error("expected 2 (H2) or 3 (H3) coordinates, got {0}")]
    BadCoordinates(usize),
    #[error("singular matrix (|det| = {0:e})")]
    Singular(f64),
    #[error("negative determinant: orientation-reversing")]
    OrientationReversing,
    #[error("complex entries are not allowed in H2")]
    ComplexEntries,
    #[error("operands live in different models")]
    ModelMismatch,
    #[error("trace is within {0:e} of ±2: class is ambiguous")]
    AmbiguousClass(f64),
    #[error("point lies on the fixed set (displacement {0:e})")]
    OnFixedSet(f64),
    #[error("convex set is empty")]
    EmptySet,
    #[error("geodesic endpoints coincide")]
    DegenerateGeodesic,
    #[error("alternating projection did not converge in {0} sweeps")]
    NotConverged(usize),
}
