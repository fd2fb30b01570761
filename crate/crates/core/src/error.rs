use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage, used to tag failures surfaced by the orchestrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Dyads,
    Metrics,
    Mixture,
    Network,
    Report,
    Synth,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Dyads => "dyads",
            Stage::Metrics => "metrics",
            Stage::Mixture => "mixture",
            Stage::Network => "network",
            Stage::Report => "report",
            Stage::Synth => "synth",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error in {source_name}: {message}")]
    Format { source_name: String, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("degenerate trip {vessel_id}/{trip_id}: span of {span_seconds} s holds no grid step of {step_seconds} s")]
    DegenerateTrip {
        vessel_id: String,
        trip_id: String,
        span_seconds: i64,
        step_seconds: i64,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("observation {index} is an outlier: every component density underflows")]
    Outlier { index: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at(self, stage: Stage) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 configuration, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Format { .. } | Error::Data(_) | Error::DegenerateTrip { .. } | Error::Io { .. } => 2,
            Error::Numeric(_) | Error::Outlier { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}
