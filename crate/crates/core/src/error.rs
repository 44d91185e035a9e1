use thiserror::Error;

/// Errors raised while building models or running the solvers.
///
/// Everything except [`Error::Numerical`] and [`Error::Io`] is an input problem: the caller
/// handed over data that violates a model invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a flux needs at least three breakpoints, got {0}")]
    TooFewBreakpoints(usize),

    #[error("flux breakpoints must be strictly increasing in density (breakpoint {index} at {rho})")]
    UnorderedBreakpoints { index: usize, rho: f64 },

    #[error("flux must vanish at the ends of its domain, got f({rho}) = {value}")]
    NonzeroEndpoint { rho: f64, value: f64 },

    #[error("flux is negative at breakpoint {index} (f = {value})")]
    NegativeFlux { index: usize, value: f64 },

    #[error(
        "segments {left} and {right} break strict concavity: slope {left_slope} is not larger than {right_slope}"
    )]
    NotConcave {
        left: usize,
        right: usize,
        left_slope: f64,
        right_slope: f64,
    },

    #[error("segment {segment} is flat at the maximum; the maximizer must be unique")]
    FlatMaximum { segment: usize },

    #[error("density {rho} lies outside the domain [{a}, {b}]")]
    OutOfDomain { rho: f64, a: f64, b: f64 },

    #[error("entropy derivative is not nondecreasing near {at}")]
    NonMonotoneEntropy { at: f64 },

    #[error("entropy derivative must cover [{a}, {b}] exactly")]
    EntropyDomainMismatch { a: f64, b: f64 },

    #[error("a junction needs at least one incoming and one outgoing road")]
    MissingRoads,

    #[error("road id `{0}` is used more than once")]
    DuplicateRoad(String),

    #[error("fluxes at zero density are not balanced across the junction (residual {0})")]
    IncompatibleFluxes(f64),

    #[error("road `{0}`: entropy is not dissipation compatible (its minimum must sit at the flux maximizer)")]
    NotDissipationCompatible(String),

    #[error("expected {expected} road values, got {got}")]
    WrongLength { expected: usize, got: usize },

    #[error("brute force search supports at most 4 roads, got {0}")]
    OracleScale(usize),

    #[error("normalized objective is not concave on piece {piece}")]
    NotConcaveObjective { piece: usize },

    #[error("time step {dt} violates the CFL bound {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("i/o: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }

    pub fn config(field: impl Into<String>, reason: impl ToString) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
