use thiserror::Error;

use crate::reduction::GroupKey;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Gaussian term: {0}")]
    InvalidTerm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel expansion failed certification: max error {max_error:.3e} at r = {at_r:.3e} exceeds {tolerance:.3e}")]
    Certification {
        max_error: f64,
        at_r: f64,
        tolerance: f64,
    },

    #[error(
        "reduction lost positive definiteness (pivot {pivot:.3e} after {rank} skeleton terms)"
    )]
    Reduction { pivot: f64, rank: usize },

    #[error("reduction failed in group {key}: {source}")]
    GroupReduction {
        key: GroupKey,
        #[source]
        source: Box<Error>,
    },

    #[error("orbital Gram matrix is degenerate (smallest eigenvalue {0:.3e})")]
    DegenerateOrbitals(f64),

    #[error("orbital energy {energy:.10} of orbital {orbital} is not negative")]
    UnboundOrbital { orbital: usize, energy: f64 },

    #[error("no convergence after {iterations} iterations (last change {last_change:.3e})")]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
