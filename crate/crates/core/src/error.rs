use thiserror::Error;

use crate::sewing::SewCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("need at least two distinct probe points, found {0}")]
    InsufficientProbes(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("subdivision endpoints differ: ({0}, {1}) vs ({2}, {3})")]
    EndpointMismatch(f64, f64, f64, f64),

    #[error("the trivial subdivision cannot be coarsened")]
    CannotCoarsen,

    #[error("subdivision is not a refinement of the coarser one")]
    NotARefinement,

    #[error("zeta({0}) diverges; argument must exceed 1")]
    Divergence(f64),

    #[error("invalid regularity data: {0}")]
    InvalidHoelder(String),

    #[error("expected {expected} mode regularity data, got {found}")]
    WrongMode { expected: &'static str, found: &'static str },

    #[error("inadmissible regularity: {0}")]
    InadmissibleRegularity(String),

    #[error("sewing did not reach tol {tol:e} within {max_level} levels")]
    NotConverged {
        tol: f64,
        max_level: u32,
        certificate: Box<SewCertificate>,
    },

    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("paths cannot be concatenated: {0}")]
    Concat(String),

    #[error("declared Lipschitz norm {declared} violated by net step {observed}")]
    DeclaredLipschitzViolated { declared: f64, observed: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
