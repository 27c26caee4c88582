use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown Cartan series `{0}` (expected one of A, B, C, D)")]
    UnknownSeries(String),
    #[error("rank {rank} is not valid for series {series}")]
    InvalidRank { series: char, rank: usize },
    #[error("matrix is not a finite-type Cartan matrix: {0}")]
    NotFiniteType(String),
    #[error("exact algebra realization is only available for type A (got rank-{0} {1})")]
    UnsupportedType(usize, String),
    #[error("rank/level mismatch: ({0}, {1}) vs ({2}, {3})")]
    Shape(usize, usize, usize, usize),
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("element is not principal nilpotent: {0}")]
    NotPrincipal(String),
    #[error("invariant spec (power {power}, index {index}) out of range: {reason}")]
    SpecOutOfRange {
        power: usize,
        index: usize,
        reason: String,
    },
    #[error("ad-nilpotent series did not terminate after {0} terms")]
    NotNilpotent(usize),
    #[error("state invalid: {0}")]
    InvalidState(String),
    #[error("positivity lost at t = {time}: {coordinate} = {value:e}")]
    PositivityLoss {
        time: f64,
        coordinate: String,
        value: f64,
    },
    #[error("non-finite value at t = {0}")]
    NonFinite(f64),
    #[error("invalid integrator settings: {0}")]
    Integrator(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("{0}")]
    Format(String),
}

impl Error {
    /// Runtime failures of a simulation, as opposed to bad input.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::PositivityLoss { .. } | Error::NonFinite(_) | Error::NotNilpotent(_)
        )
    }
}
