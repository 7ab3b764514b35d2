use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no sign change of the characteristic function on (sqrt 2, {qmax})")]
    NoBracket { qmax: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("cosh overflow: |Re lambda| = {0} exceeds 300")]
    Overflow(f64),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error("v-grid too coarse: {0} points, need at least 16")]
    GridTooCoarse(usize),
    #[error("resolvent near singular: |N(lambda, c)| = {0:e}")]
    NearSingular(f64),
    #[error("tail contribution {tail:e} exceeds 1e-3 of the weighted norm {norm:e}")]
    TailTooFat { tail: f64, norm: f64 },
    #[error("Picard iteration is not contracting (ratio {ratio}) for 5 consecutive steps")]
    NoContraction { ratio: f64 },
    #[error("phase condition leaves the arcsin domain: |Theta/I| = {0}")]
    ArcsinDomain(f64),
    #[error("matching residual at tau = 0 is {0:e}")]
    JumpTooLarge(f64),
    #[error("chain integration unstable at t = {0}")]
    Instability(f64),
}

impl Error {
    /// Short variant name, used by front ends to surface the failure class.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NoBracket { .. } => "NoBracket",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::Overflow(_) => "Overflow",
            Error::Postcondition(_) => "Postcondition",
            Error::GridTooCoarse(_) => "GridTooCoarse",
            Error::NearSingular(_) => "NearSingular",
            Error::TailTooFat { .. } => "TailTooFat",
            Error::NoContraction { .. } => "NoContraction",
            Error::ArcsinDomain(_) => "ArcsinDomain",
            Error::JumpTooLarge(_) => "JumpTooLarge",
            Error::Instability(_) => "Instability",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
