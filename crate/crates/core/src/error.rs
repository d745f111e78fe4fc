use thiserror::Error;

/// Errors raised by the metric computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A point lies outside the domain where the operation is defined.
    #[error("point {0} lies outside the domain")]
    OutsideDomain(String),

    /// A denominator fell below the numeric threshold.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A holomorphic map hit a pole.
    #[error("pole encountered at {0}")]
    Pole(String),

    /// Malformed domain description (self-intersecting boundary, bad radius...).
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// Malformed map description.
    #[error("invalid map: {0}")]
    InvalidMap(String),

    /// Several boundary points realise the boundary distance.
    #[error("nearest boundary point is not unique near {0}")]
    Ambiguous(String),

    /// The point is not on the boundary.
    #[error("point {0} is not on the boundary")]
    OffBoundary(String),

    /// Curvature estimates were not finite or degenerate.
    #[error("curvature estimate failed: {0}")]
    Curvature(String),

    /// The metric is not available on this domain.
    #[error("metric {metric} is not available on {domain}")]
    MetricUnavailable { metric: String, domain: String },

    /// Numerics produced a lower bound above the upper bound.
    #[error("bracket inversion: lower {lower} > upper {upper}")]
    BracketInversion { lower: f64, upper: f64 },

    #[error("candidate family is empty")]
    EmptyFamily,

    /// The map is not a self-map of the unit disc.
    #[error("map is not a self-map of the disc (boundary sup {0})")]
    NotSelfMap(f64),

    /// The image of the map is not relatively compact in the disc.
    #[error("image of the map is not relatively compact in the disc (boundary sup {0})")]
    ImageNotCompact(f64),

    #[error("curve leaves the domain at {0}")]
    CurveExitsDomain(String),

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64 },

    /// Grid too coarse to connect the requested points.
    #[error("graded grid does not connect the endpoints")]
    DisconnectedGrid,

    #[error("iteration cap of {0} exceeded")]
    IterationCap(usize),

    /// The orbit does not escape toward the boundary.
    #[error("orbit does not approach the boundary: {0}")]
    OrbitNotEscaping(String),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract input, as opposed to
    /// numeric failures during a computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::OutsideDomain(_)
                | Error::InvalidDomain(_)
                | Error::InvalidMap(_)
                | Error::OffBoundary(_)
                | Error::MetricUnavailable { .. }
                | Error::EmptyFamily
                | Error::NotSelfMap(_)
                | Error::ImageNotCompact(_)
                | Error::OrbitNotEscaping(_)
        )
    }

    /// Stable snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Precondition(_) => "precondition",
            Error::OutsideDomain(_) => "outside_domain",
            Error::Numeric(_) => "numeric",
            Error::Pole(_) => "pole",
            Error::InvalidDomain(_) => "invalid_domain",
            Error::InvalidMap(_) => "invalid_map",
            Error::Ambiguous(_) => "ambiguous",
            Error::OffBoundary(_) => "off_boundary",
            Error::Curvature(_) => "curvature",
            Error::MetricUnavailable { .. } => "metric_unavailable",
            Error::BracketInversion { .. } => "bracket_inversion",
            Error::EmptyFamily => "empty_family",
            Error::NotSelfMap(_) => "not_self_map",
            Error::ImageNotCompact(_) => "image_not_compact",
            Error::CurveExitsDomain(_) => "curve_exits_domain",
            Error::QuadratureNonConvergence { .. } => "quadrature_non_convergence",
            Error::DisconnectedGrid => "disconnected_grid",
            Error::IterationCap(_) => "iteration_cap",
            Error::OrbitNotEscaping(_) => "orbit_not_escaping",
        }
    }

    pub(crate) fn outside(z: num_complex::Complex64) -> Self {
        Error::OutsideDomain(fmt_point(z))
    }
}

pub(crate) fn fmt_point(z: num_complex::Complex64) -> String {
    format!("({}, {})", z.re, z.im)
}

pub type Result<T> = std::result::Result<T, Error>;
