use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("column '{0}' not found in header")]
    MissingColumn(String),

    #[error("cannot parse '{value}' as a finite number at data row {row}, column '{column}'")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("duplicate variable name '{0}'")]
    DuplicateVariable(String),

    #[error("data set has {0} observations, at least {1} are required")]
    TooFewObservations(usize, usize),

    #[error("invalid segmentation: cannot split {n} observations into {k} segments")]
    InvalidSegmentation { n: usize, k: usize },

    #[error("invalid split: ratio {ratio} of {n} observations leaves a side with fewer than 2 rows")]
    InvalidSplit { n: usize, ratio: f64 },

    #[error("component count {a} out of range 1..={a_max}")]
    InvalidComponents { a: usize, a_max: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("singular design matrix")]
    SingularDesign,

    #[error("metric error: {0}")]
    Metric(String),

    #[error("invalid distribution parameters: {0}")]
    DistributionParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("infeasible geometry: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
