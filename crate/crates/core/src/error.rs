use thiserror::Error;

/// Errors produced by the numerical kernels.
///
/// Variants split into two families: input validation (bad arguments,
/// malformed files, violated preconditions) and numerical failure
/// (non-convergence, blow-up, contamination). [`Error::is_numerical`]
/// tells them apart so front ends can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectral point z = 0 is not admissible")]
    ZeroSpectralPoint,

    #[error("{what}: value {value} lies outside the supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("grid point {value} is within margin {margin} of the excluded point {excluded}")]
    MarginViolation {
        value: f64,
        excluded: f64,
        margin: f64,
    },

    #[error("profile is not decayed to its boundary values: {0}")]
    NotDecayed(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{stage} did not converge: {detail}")]
    NonConvergence { stage: &'static str, detail: String },

    #[error("solution blew up near s = {location}: {detail}")]
    BlowUp { location: f64, detail: String },

    #[error("boundary contamination at t = {time}: edge amplitude {amplitude:e} exceeds {tolerance:e}")]
    Contamination {
        time: f64,
        amplitude: f64,
        tolerance: f64,
    },

    #[error("time step {dt} violates the stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// `true` for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_numerical(),
            _ => matches!(
                self,
                Error::NonConvergence { .. } | Error::BlowUp { .. } | Error::Contamination { .. }
            ),
        }
    }

    /// Name of the pipeline stage that failed, if known.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            Error::NonConvergence { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
