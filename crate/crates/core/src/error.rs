use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or state violated its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// `a = 1` removes the inhibition term from the uniform map.
    #[error("singular parameter: a = 1 has no change of variable to the generic map")]
    SingularParameter,

    #[error("no positive fixed point for r = {r} (requires r > 1)")]
    NoPositiveFixedPoint { r: f64 },

    #[error("insufficient data: need at least {needed} tail samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("gini coefficient undefined for zero-mean sample")]
    UndefinedGini,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
