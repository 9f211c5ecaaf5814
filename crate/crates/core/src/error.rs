use std::path::PathBuf;

/// Everything that can go wrong in this crate.
///
/// Variants split into two families: input validation (bad states, bad
/// configurations, out-of-range arguments) and numerical failure (a solver
/// that does not converge, a metric that never crosses its threshold). The
/// command-line runner maps the first family to exit code 2 and the second
/// to exit code 3, see [`Error::is_numerical`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid site charge {value} at site {site}; charges must be -1, 0 or +1")]
    InvalidCharge { site: usize, value: i64 },

    #[error("cannot parse spin string: unexpected character {0:?}")]
    ParseSpin(char),

    #[error("height field step of {step} between h_{} and h_{index}; steps must be -1, 0 or +1", index - 1)]
    HeightStep { index: usize, step: i64 },

    #[error("height field must start at h_0 = 0, found {0}")]
    HeightOrigin(i64),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("sector is empty")]
    EmptySector,

    #[error("state is not a member of the sector")]
    NotInSector,

    #[error("target (Q, P) = ({q}, {p}) lies outside the interior of the realizable region")]
    Infeasible { q: i64, p: i64 },

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("metric never crossed threshold {threshold} within the recorded times")]
    NotCrossed { threshold: f64 },

    #[error("negative radicand {value} in width metric exceeds the noise tolerance {tolerance}")]
    NegativeRadicand { value: f64, tolerance: f64 },

    #[error("adaptive quadrature did not reach tolerance {tolerance:e}")]
    Quadrature { tolerance: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Config(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// True for solver and measurement failures, false for bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. }
            | Error::NotCrossed { .. }
            | Error::NegativeRadicand { .. }
            | Error::Quadrature { .. } => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
