use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("occupation {0:?} has no N-qudit interpretation")]
    NotInterpretable(Vec<usize>),

    #[error("term with occupation {occupation:?} is not post-selected but has amplitude {magnitude:e}")]
    ProjectionMissing { occupation: Vec<usize>, magnitude: f64 },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("local operator {index} deviates from unitarity by {deviation:e}")]
    InvalidLocal { index: usize, deviation: f64 },

    #[error("matrix is unphysical: singular value {singular_value} exceeds 1")]
    Unphysical { singular_value: f64 },

    #[error("unknown device `{0}`")]
    UnknownDevice(String),

    #[error("conditioning outcome has zero probability")]
    ImpossibleCondition,

    #[error("rank of the zero tensor is undefined")]
    UndefinedRank,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
