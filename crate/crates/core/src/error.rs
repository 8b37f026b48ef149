use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("boundary contamination: {0}")]
    BoundaryContamination(String),

    #[error("ellipticity lost: kinetic coefficient {value:.3e} at x = {x:.6}")]
    Ellipticity { x: f64, value: f64 },

    #[error("dimension error: requested {requested}, available {available}")]
    Dimension { requested: usize, available: usize },

    #[error("non-finite input at index {0}")]
    NonFinite(usize),

    #[error("numerical failure at index {index}: {reason}")]
    Numerical { index: usize, reason: String },

    #[error("exact identity failed for {what}: computed {computed}, closed form {expected}")]
    Discrepancy {
        what: String,
        computed: String,
        expected: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: worst cell [{lo:.6e}, {hi:.6e}] error {error:.3e}")]
    Quadrature { lo: f64, hi: f64, error: f64 },

    #[error("problem too large: {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("at eta = {eta}: {source}")]
    AtEta {
        eta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_eta(self, eta: f64) -> Self {
        Error::AtEta {
            eta,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
