//! Invariant metrics of planar domains: Poincaré, Kobayashi, Carathéodory and
//! quasihyperbolic densities, integrated distances, geodesic witnesses and the
//! fixed-point and boundary-behaviour applications built on them.

pub mod applications;
pub mod complex;
pub mod densities;
pub mod domains;
pub mod error;
pub mod geodesy;
pub mod holomaps;
pub mod quadrature;
pub mod suites;

pub use complex::{c, Complex64, ComplexPoint, MobiusTransform, TangentVector};
pub use densities::{CandidateFamily, DensityBound, MetricKind};
pub use domains::Domain;
pub use error::{Error, Result};
pub use holomaps::HolomorphicMap;
pub use geodesy::{Curve, DistanceResult};
