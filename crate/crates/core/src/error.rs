//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum GeomError {
    /// The group has no coordinate chart (classification-only families).
    #[error("group {0} has no coordinate chart")]
    UnsupportedChart(String),
    /// Element coordinates do not match the chart of the group.
    #[error("bad element: {0}")]
    BadElement(String),
    /// A group spec string failed to parse or carries invalid parameters.
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    /// The requested pair of groups is not one of the supported coverings.
    #[error("{0} -> {1} is not a supported covering projection")]
    NotACovering(String, String),
    /// Two tangent vectors do not span a plane.
    #[error("tangent plane is degenerate")]
    DegeneratePlane,
    #[error("degenerate endpoints: {0}")]
    DegenerateEndpoints(String),
    /// A geodesic left the configured coordinate bound during integration.
    #[error("geodesic escaped the coordinate bound {0:e}")]
    IntegrationEscape(f64),
    #[error("no admissible path found within the search budget")]
    NoPathFound,
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("matrix parameter cannot be reduced to a catalog family")]
    Unclassifiable,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
