use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An expression evaluated to a non-finite value.
    #[error("non-finite value of `{what}` at t = {t}")]
    Domain { what: String, t: f64 },

    #[error("derivative order {have} is too small, {needed} required")]
    Order { needed: usize, have: usize },

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("matriciant is numerically singular at t = {t} (|det| = {det:e})")]
    SingularMatriciant { t: f64, det: f64 },

    #[error("iteration did not converge within {iterations} steps (last increment {increment:e})")]
    Convergence { iterations: usize, increment: f64 },

    #[error("problem is not well-posed{}", fmt_eps(.eps))]
    NotWellPosed { eps: Option<f64> },

    #[error("limit problem has a nontrivial kernel (dimension {kernel_dim})")]
    ConditionZero { kernel_dim: usize },

    #[error("parse error in `{block}`: {message}")]
    Parse { block: String, message: String },

    #[error("dimension error in `{block}`: {detail}")]
    Dimension { block: String, detail: String },

    #[error("{0}")]
    Io(String),
}

fn fmt_eps(eps: &Option<f64>) -> String {
    match eps {
        Some(e) => format!(" at eps = {e}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(block: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            block: block.into(),
            message: message.into(),
        }
    }

    pub(crate) fn dimension(block: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Dimension {
            block: block.into(),
            detail: detail.into(),
        }
    }
}
