use thiserror::Error;

/// Everything that can go wrong in this crate. Variants map onto the
/// preconditions of the individual operations; numerical failures
/// (kernels, exhausted refinement) are kept apart from bad input so the
/// CLI can assign them distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field does not match geometry: expected {expected} components, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("rough gauge field: {0}")]
    RoughField(String),
    #[error("no Clifford representation for {0}")]
    Clifford(String),
    #[error("family parameter t = {0} outside [-1, 1]")]
    ParameterOutOfRange(f64),
    #[error("degenerate domain wall: {0}")]
    DegenerateWall(String),
    #[error("link at site {site}, direction {dir} is not real (phase {phase})")]
    ComplexLink { site: usize, dir: usize, phase: f64 },
    #[error("operator is not flagged hermitian")]
    NotHermitian,
    #[error("hermiticity defect {0:e} exceeds tolerance")]
    HermiticityDefect(f64),
    #[error("dimension {dim} exceeds dense cap {cap}")]
    DimensionOverCap { dim: usize, cap: usize },
    #[error("eigen residual {residual:e} exceeds {tolerance:e}")]
    EigenResidual { residual: f64, tolerance: f64 },
    #[error("operator has a kernel: smallest |eigenvalue| {0:e}")]
    Kernel(f64),
    #[error("kernel at endpoint t = {t}: smallest |eigenvalue| {min_abs:e}")]
    EndpointKernel { t: f64, min_abs: f64 },
    #[error("eta difference {0} is odd")]
    OddEtaDifference(i64),
    #[error("refinement exhausted on [{lo}, {hi}]: best certificate margin {margin:e}")]
    RefinementExhausted { lo: f64, hi: f64, margin: f64 },
    #[error("singular endpoint at t = {t}: smallest singular value {sigma_min:e}")]
    SingularEndpoint { t: f64, sigma_min: f64 },
    #[error("boundary operator has a kernel: holonomy {0} is a multiple of 2 pi")]
    BoundaryKernel(f64),
    #[error("transport is not representable: {0}")]
    Transport(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics on valid input, as opposed to
    /// rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Kernel(_)
                | Error::EndpointKernel { .. }
                | Error::OddEtaDifference(_)
                | Error::RefinementExhausted { .. }
                | Error::SingularEndpoint { .. }
                | Error::BoundaryKernel(_)
                | Error::EigenResidual { .. }
                | Error::HermiticityDefect(_)
                | Error::RoughField(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
