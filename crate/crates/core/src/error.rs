use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("no trainable entries: every hop channel is saturated")]
    NoTrainableEntries,

    #[error("non-finite gradient in parameter block `{0}`")]
    NonFiniteGradient(String),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("stale forward trace: parameters changed since the forward pass")]
    StaleTrace,

    #[error("checkpoint version mismatch: file has version {found}, this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),

    #[error("hop {0} is not predicted by the checkpoint")]
    UnknownHop(usize),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input (files, flags, parameters) as opposed
    /// to violated internal invariants.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NonFiniteGradient(_)
                | Error::NonFiniteLoss { .. }
                | Error::StaleTrace
                | Error::Shape(_)
        )
    }
}
