use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameter: {0}")]
    InvalidParams(String),

    #[error("tail function is not strictly decreasing at n = {n}: T(n) = {t_n}, T(n+1) = {t_next}")]
    NonMonotoneTail { n: u64, t_n: f64, t_next: f64 },

    #[error("series truncation cannot reach tolerance {tol:e}: need about {required_terms} terms (limit {limit})")]
    TruncationUnreachable {
        tol: f64,
        required_terms: u64,
        limit: u64,
    },

    #[error("root bracketing failed after {doublings} doublings for target {target}")]
    NoBracket { target: f64, doublings: u32 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("1 - lambda vanishes near theta = {theta} (u = {u}, b = {b}); aperiodicity violated?")]
    NearZeroDenominator { u: f64, b: f64, theta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
