use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Every lattice mode was excluded by the κ-ball (or the Nyquist mask).
    #[error("empty grid: no lattice mode survives |k| >= {kappa}")]
    EmptyGrid { kappa: f64 },
    #[error("singular mode: zero-frequency content at lattice index {index}")]
    SingularMode { index: usize },
    #[error("unstable time step: dt = {dt} exceeds the bound {bound}")]
    Unstable { dt: f64, bound: f64 },
    #[error("shape mismatch: {0}")]
    Mismatch(String),
    #[error("undefined ratio: photon number is zero")]
    UndefinedRatio,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
