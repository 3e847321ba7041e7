use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error at node {node}: {msg}")]
    Domain { node: usize, msg: String },

    #[error("radial profile not admissible: {0}")]
    NotAdmissible(String),

    #[error("singular radial ODE at r = {r}: {msg}")]
    SingularOde { r: f64, msg: String },

    #[error("integrability check failed: {what} residual {residual:e} exceeds {tol:e}")]
    Integrability {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("rejected input: {what} residual {residual:e} exceeds {tol:e}")]
    Rejected {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("{what} did not converge: {msg}")]
    NoConvergence { what: &'static str, msg: String },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
