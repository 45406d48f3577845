use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The grid does not resolve the boundary curve.
    #[error("geometry resolution: {0}")]
    GeometryResolution(String),

    #[error("degenerate normal at ({0}, {1}): |grad psi| below 1e-10")]
    DegenerateNormal(f64, f64),

    /// The boundary curve is too close to the edge of the auxiliary box.
    #[error("domain margin: {0}")]
    DomainMargin(String),

    #[error("empty interior: no grid node falls inside the domain")]
    EmptyInterior,

    #[error("pairing: {0}")]
    Pairing(String),

    #[error("extrapolation stencil: {0}")]
    ExtrapolationStencil(String),

    /// Derivative of a piecewise basis requested exactly at a breakpoint.
    #[error("basis derivative evaluated at a breakpoint (offset {0})")]
    Breakpoint(f64),

    /// A basis node covering a collocation point is missing from zeta.
    #[error("basis coverage: {0}")]
    Coverage(String),

    #[error("assembly invariant violated: {0}")]
    Assembly(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("stencil range: {0}")]
    StencilRange(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
