//! Error and warning types shared across the toolkit.
//!
//! Hard errors abort a computation. Warnings are advisory diagnostics
//! (cancellation, stagnating tails, near-degenerate roots) that callers may
//! escalate; they are carried alongside results rather than raised.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "seed solution vanishes on the interval (min |f| = {min_abs:.3e}, max |f| = {max_abs:.3e}); \
         the formal-power weights (f^2)^(+-1) become singular; shrink the interval or shift q \
         by a complex constant"
    )]
    SeedVanishes { min_abs: f64, max_abs: f64 },

    #[error("polynomial order {n} exceeds {max}: coefficients overflow double range")]
    OrderTooLarge { n: usize, max: usize },

    #[error("argument lies on the cut [-1,1] of the Legendre Q function (z = {re}+{im}i)")]
    OnCut { re: f64, im: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is rank deficient at column {col} (|r| = {diag:.3e} < {threshold:.3e})")]
    RankDeficient { col: usize, diag: f64, threshold: f64 },

    #[error(
        "collocation basis is numerically degenerate at column {col}; lower the number of \
         basis members"
    )]
    BasisDegenerate { col: usize },

    #[error("step size underflow in ODE integration (required step {step:.3e} < 1e-12 at x = {x})")]
    StepUnderflow { step: f64, x: f64 },

    #[error(
        "eigenvalue scan too coarse: brackets at omega = {omega_a} and {omega_b} are closer \
         than 3 scan steps; increase scan density"
    )]
    ScanTooCoarse { omega_a: f64, omega_b: f64 },

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Advisory diagnostics produced during kernel construction and root finding.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Coefficient magnitudes do not decrease over the tail-estimation window:
    /// the truncation order is too low or q is too rough.
    TailStagnant { order: usize },
    /// A computed coefficient is below the cancellation floor of its own
    /// partial sums; its digits are untrustworthy.
    Cancellation { n: usize, magnitude: f64, floor: f64 },
    /// |omega| exceeds the reliable range 2*sqrt(N) of the truncated
    /// Fourier-Hermite series.
    Magnitude { omega_abs: f64, limit: f64 },
    /// Two roots closer than the deduplication threshold were merged.
    NearDegenerate { omega: f64, spacing: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::TailStagnant { order } => write!(
                f,
                "tail stagnant: coefficient magnitudes not decreasing past order {order}"
            ),
            Warning::Cancellation { n, magnitude, floor } => write!(
                f,
                "cancellation at order {n}: |coefficient| = {magnitude:.3e} below floor {floor:.3e}"
            ),
            Warning::Magnitude { omega_abs, limit } => write!(
                f,
                "|omega| = {omega_abs:.3e} exceeds reliable range {limit:.3e} of the truncated series"
            ),
            Warning::NearDegenerate { omega, spacing } => write!(
                f,
                "near-degenerate roots at omega = {omega} (spacing {spacing:.3e}) merged"
            ),
        }
    }
}
