use thiserror::Error;

/// Errors raised by the library.
///
/// `Config` covers bad parameters and malformed input (CLI exit code 2);
/// everything else is a domain failure (exit code 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ellipticity violated at node ({i}, {j}): smallest eigenvalue {min_eig:.3e} < 1/Lambda = {bound:.3e}")]
    Ellipticity {
        i: usize,
        j: usize,
        min_eig: f64,
        bound: f64,
    },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e}); operator may be close to singular")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("operator is numerically singular (pivot ratio {pivot_ratio:.3e}); 0 is too close to a Dirichlet eigenvalue")]
    Singular { pivot_ratio: f64 },

    #[error("Gram matrix is numerically singular ({floored} of {total} eigenvalues below floor); use a positive regularization weight")]
    SingularGram { floored: usize, total: usize },

    #[error("arity mismatch: {kind} expects {expected} fields, got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
