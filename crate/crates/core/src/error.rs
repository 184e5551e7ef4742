use thiserror::Error;

/// Errors produced by the crossing-speed library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site {site} outside window [{start}, {end}]")]
    OutsideWindow { site: i64, start: i64, end: i64 },

    #[error("parse error: {0}")]
    Parse(String),

    /// The log-domain crossing probability left the representable range.
    #[error("crossing probability underflow at site {site}")]
    Singular { site: i64 },

    /// The left part of the environment does not hold enough obstacles to
    /// meet the requested truncation tolerance.
    #[error("window too short: {found} obstacles left of origin, bracket width {width:e} > tolerance {tolerance:e}")]
    WindowTooShort { found: usize, width: f64, tolerance: f64 },

    /// No obstacle in the window: the conditioned crossing time has no
    /// stationary limit.
    #[error("no obstacle left of origin; crossing expectation does not converge")]
    NonConvergent,

    #[error("enumeration cap exceeded: y = {y} > {cap}")]
    CapExceeded { y: u64, cap: u64 },

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("empty bracket: lower {lo} > upper {hi}")]
    EmptyBracket { lo: f64, hi: f64 },

    #[error("unreliable estimate: {0}")]
    Unreliable(String),

    #[error("path did not reach target within {0} steps")]
    StepCap(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
