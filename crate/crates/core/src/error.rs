use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pointwise values of delta(x)-type potentials are undefined")]
    DistributionalVariant,
    #[error("delta-comb potentials are only handled by the lattice backend")]
    CombRequiresLattice,
    #[error("incidence too close to grazing (|sin theta0| = {0})")]
    GrazingIncidence(f64),
    #[error("operator is numerically singular (condition estimate {0:.3e})")]
    SingularOperator(f64),
    #[error("slice refinement missed tol {tol:.1e} after {doublings} doublings (last change {change:.3e})")]
    NoConvergence { tol: f64, doublings: u32, change: f64 },
    #[error("potentials of different dimensionality cannot be combined")]
    DimensionMismatch,
    #[error("operators live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not supported for this potential family")]
    UnsupportedFamily(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier used by the CLI and the C interface.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DistributionalVariant => "DistributionalVariant",
            Error::CombRequiresLattice => "CombRequiresLattice",
            Error::GrazingIncidence(_) => "GrazingIncidence",
            Error::SingularOperator(_) => "SingularOperator",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch => "DimensionMismatch",
            Error::GridMismatch => "GridMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::UnsupportedFamily(_) => "UnsupportedFamily",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
