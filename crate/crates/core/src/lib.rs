//! Concurrent normals of immersed compact manifolds.
//!
//! Given an immersion `M^m -> R^n`, the normals through a point `y` are the
//! critical points of the squared-distance function `x -> |x - y|^2`. This
//! crate enumerates those critical points with their Morse indices, computes
//! focal points along normal lines, walks a compactified normal line while
//! tracking bifurcations of the critical-point census, and checks the excess
//! statements (extra critical points near focal points, excess-2 and excess-4
//! witnesses, doubling for tubes) on closed-form example manifolds.
//!
//! Module map:
//!
//! - [`geometry`]: immersions with exact 2-jets, metric and second fundamental
//!   form, normal frames, builtin examples and the JSON manifest.
//! - [`morse`]: squared-distance and height functions, multi-start Newton
//!   census, brute-force oracle census.
//! - [`focal`]: focal points on a normal line, focal clouds, regularity
//!   certificates.
//! - [`walk`]: the walk along a compactified normal, event classification,
//!   the extra-critical-point check and the excess witnesses.
//! - [`tube`]: tubes over space curves and the doubling check.
//! - [`export`]: CSV and SVG writers.

pub mod error;
pub mod exec;
pub mod export;
pub mod focal;
pub mod geometry;
pub mod linalg;
pub mod morse;
pub mod tube;
pub mod walk;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use focal::{focal_cloud, focal_points, regularity, FocalPoint, FocalSet, NormalLine};
pub use geometry::{builtin, ImmersionSpec, Jet2, Manifest, NormalFrame};
pub use morse::{
    brute_force_census, find_critical_points, linear_census, sq_dist_jet, Census,
    CriticalPoint, SolverConfig,
};
pub use tube::{tube_spec, verify_doubling};
pub use walk::{verify_lemma, verify_theorem, walk, WalkConfig};

/// Crate version, embedded in every exported artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
