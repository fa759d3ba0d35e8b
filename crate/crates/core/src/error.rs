use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("propagator evaluated on the diagonal (x = 0)")]
    Diagonal,
    #[error("quadrature did not converge: estimated error {estimate:e}, target {target:e}")]
    NonConvergence { estimate: f64, target: f64 },
    #[error("expansion ratio r/rho = {0} is not below 1")]
    DivergentRatio(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
