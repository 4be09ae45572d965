use thiserror::Error;

/// Errors produced by mesh construction, assembly and the eigensolvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quadrature/basis order: {0}")]
    InvalidOrder(String),
    #[error("degenerate geometry map: det J = {det} at sample point")]
    DegenerateMap { det: f64 },
    #[error("degenerate element {element}: det J = {det} at sample point")]
    DegenerateElement { element: usize, det: f64 },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("mesh topology error: {0}")]
    NonConforming(String),
    #[error("mesh generation error: {0}")]
    Generation(String),
    #[error("unsupported mesh: {0}")]
    UnsupportedMesh(String),
    #[error("quadrature/integrand condition violated: {0}")]
    ConditionViolation(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("metric matrix not positive definite on the deflation complement")]
    MetricNotPositiveDefinite,
    #[error("degenerate system: {0}")]
    DegenerateSystem(String),
    #[error("unsupported face configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("nodal values of the pressure-to-velocity map disagree across elements: {0}")]
    InconsistentNodalValues(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh file error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
