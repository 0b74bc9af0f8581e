use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is singular or not finite")]
    Singular,

    #[error("not a member of {group}: residual {residual:e} exceeds tolerance {tol:e}")]
    NotMember { group: String, residual: f64, tol: f64 },

    #[error("matrix logarithm undefined: eigenvalue {re}{im:+}i lies on the closed negative real axis")]
    LogUndefined { re: f64, im: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    #[error("no integration chart available for {0}")]
    NoChart(String),

    #[error("integrand is not finite at chart point {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("truncation failed: {0}")]
    Truncation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("ill-conditioned spectrum: eigenvalues {a} and {b} are {gap:e} apart, inside the ambiguous band ({lo:e}, {hi:e}]")]
    IllConditioned {
        a: String,
        b: String,
        gap: f64,
        lo: f64,
        hi: f64,
    },

    #[error("matrix is not unipotent: |(u-1)^n| = {0:e}")]
    NotUnipotent(f64),

    #[error("representation average does not settle under radius extension: change {change:e} exceeds error budget {budget:e}")]
    Divergence { change: f64, budget: f64 },
}
