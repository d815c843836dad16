use thiserror::Error;

/// Errors raised by the models, numerics and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("requested DC power {p_dc} W is at or above the rectifier ceiling {p_max} W")]
    Saturation { p_dc: f64, p_max: f64 },

    #[error("linear harvester with zero efficiency cannot deliver {p_dc} W")]
    NoInverse { p_dc: f64 },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("function evaluated to NaN at x = {x}")]
    Evaluation { x: f64 },

    #[error("singular 2x2 system (determinant {det:e})")]
    Singular { det: f64 },

    #[error("optimal cooperative powers are not unique (beta^2 b c = {value})")]
    NonUnique { value: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
