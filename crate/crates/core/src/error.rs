use thiserror::Error;

/// Errors raised while loading or validating a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// The text does not match the schema (bad TOML, unknown key, wrong type).
    #[error("config schema error: {0}")]
    Schema(String),
    /// The text parsed but one or more invariants failed. Every failure is listed.
    #[error("config validation failed:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

/// Out-of-domain parameters for a sampling or analytic routine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{name} = {value} is outside {domain}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("pooling gain is undefined for a zero deadline")]
    UndefinedGain,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("instance too large for exact solver: {0}")]
    TooLarge(String),
}

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error("decision dimensions do not match configuration: {0}")]
    Dimension(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("improvement is undefined for a non-positive baseline ({0})")]
    UndefinedBaseline(f64),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("arrival trace csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("arrival trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("arrival trace row {row}: {message}")]
    Row { row: usize, message: String },
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("plot input is missing column `{0}`")]
    MissingColumn(String),
    #[error("plot csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("plot io: {0}")]
    Io(#[from] std::io::Error),
}

/// Top-level error for simulation runs and the experiment harness.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown figure family `{0}`")]
    UnknownFamily(String),
    #[error("{0}")]
    Usage(String),
}
