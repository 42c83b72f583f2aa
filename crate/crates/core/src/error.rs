use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("singular diagonal block {block}")]
    SingularBlock { block: usize },

    #[error("singular element block on element {element}")]
    SingularElement { element: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("element {element} has nonpositive area {area:e} after deformation")]
    InvertedElement { element: usize, area: f64 },

    #[error("boundary facet {facet} has no boundary tag")]
    UntaggedBoundary { facet: usize },

    #[error("refinement closure exceeded the element budget of {budget}")]
    RefinementBudget { budget: usize },

    #[error("coarsening stagnated at level {level} with {rows} rows")]
    CoarseningStagnation { level: usize, rows: usize },

    #[error("missing relaxation data: {0}")]
    MissingRelaxationData(String),

    #[error("BiCGSTAB breakdown after restart at iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("parse error in {what}: {message}")]
    Parse { what: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
