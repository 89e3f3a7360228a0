//! Computational geometry of connected Lie groups of dimension at most three,
//! equipped with left-invariant Riemannian metrics.
//!
//! The crate is organized around a small catalog of groups (tori, Heisenberg
//! groups, the Euclidean motion groups and their covers, solvable semidirect
//! products `R^2 ⋊_A R`, and the rotation groups). On top of the exact group
//! algebra it provides:
//!
//! * left-invariant metric tensors, curve lengths, sectional curvature and
//!   volume densities ([`metric`]),
//! * geodesic integration, point-to-point distance estimation, ball volumes
//!   and growth exponents ([`geodesy`]),
//! * Gromov hyperbolicity estimates, hyperbolic-plane embeddings and
//!   quasi-geodesic experiments ([`invariants`]),
//! * the quasi-isometry classification oracle and relation lattice
//!   ([`classify`]),
//! * executable verification of the explicit isometry and quasi-isometry
//!   constructions ([`constructions`]).
//!
//! All sampling routines are deterministic: randomness flows from a single
//! 64-bit seed through counter-based splitting, so results do not depend on
//! thread scheduling. The `parallel` feature (on by default) runs the Monte
//! Carlo inner loops on rayon; disabling it falls back to sequential
//! execution with bit-identical output.

pub mod catalog;
pub mod classify;
pub mod constructions;
mod diffgeo;
pub mod error;
#[doc(hidden)]
pub mod exec;
pub mod geodesy;
pub mod invariants;
pub mod metric;
pub mod rng;

pub use catalog::{Chart, Family, GroupElement, GroupSpec, LieAlgebraData};
pub use classify::{ClassLabel, QiConstants, RelationLevel, RelationVerdict};
pub use error::{GeomError, Result};
pub use geodesy::{Curve, DistanceBudget, GrowthReport, GrowthType};
pub use invariants::{H2Point, HyperbolicityReport};
pub use metric::{FrameMetric, Metric, MetricAtPoint};
