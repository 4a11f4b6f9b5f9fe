use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error(
        "steady state is not unique: two smallest |Re λ| are {smallest:.3e} and {second:.3e}"
    )]
    DegenerateSteadyState { smallest: f64, second: f64 },

    #[error("steady-state residual {0:.3e} exceeds tolerance")]
    SteadyStateResidual(f64),

    #[error("state has a negative eigenvalue {0:.3e} beyond round-off")]
    NegativeEigenvalue(f64),

    #[error("eigen-solver failed to converge")]
    EigenSolver,

    #[error("derivative has support outside the state's support (entry {entry:.3e} at λi+λj={denominator:.3e})")]
    RankDeficient { entry: f64, denominator: f64 },

    #[error("quantum Fisher information vanishes")]
    ZeroQfi,

    #[error("momentum grid does not resolve the pointer wavefunction (mass {0:.12})")]
    GridUnresolved(f64),

    #[error("states live on different grids")]
    GridMismatch,

    #[error("distribution normalisation off by {0:.3e}")]
    Normalization(f64),

    #[error("negative density {0:.3e} beyond round-off")]
    NegativeDensity(f64),

    #[error("POVM completeness violated by {0:.3e}")]
    Completeness(f64),

    #[error("Fock truncation tail mass {0:.3e} too large")]
    TruncationTail(f64),

    #[error("root bracketing failed: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
