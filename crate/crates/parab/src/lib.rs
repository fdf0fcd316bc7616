//! Rigorous integration of periodic 1D parabolic PDEs with computer-checkable
//! error certificates.
//!
//! The library integrates initial value problems of the form
//!
//! ```text
//! ∂u/∂t = (-1)^{J+1} ∂^{2J}u/∂x^{2J} + Σ_{j=0}^{2J-1} ∂^j/∂x^j [ g_j(u) ]
//! ```
//!
//! on the 2π-torus (polynomial nonlinearities `g_j`), producing an
//! approximate solution together with a *proof* — carried out in interval
//! arithmetic on this machine — that the true solution with the same initial
//! data stays within an explicit sup-norm distance of the approximation on
//! every time subdomain. Near a stable equilibrium the final time step can be
//! taken to `t = +∞`, yielding an enclosure of the steady state, a basin
//! radius around it, and a certified spectral gap.
//!
//! Workflow: [`solver`] produces a floating-point approximate solution
//! (`solve`), [`linop`]/[`bounds`]/[`certify`] turn it into verified radii
//! (`prove`), and [`io`] reads/writes the on-disk artifacts. The `examples/`
//! directory demonstrates every major capability end to end; the thin `parab`
//! binary exposes the same pipeline as `solve | prove | report | check`
//! subcommands.
//!
//! Nothing in the proof path trusts the floating-point solver: approximate
//! data is promoted to point intervals and all inequalities are re-derived
//! with outward rounding.

pub mod bounds;
pub mod certify;
pub mod cheb;
pub mod expint;
pub mod grid;
pub mod interval;
pub mod io;
pub mod linop;
pub(crate) mod lapack;
pub mod mat;
pub mod problem;
pub mod seq;
pub mod solver;

pub use interval::{CInterval, Interval};

/// Errors produced by the proof pipeline and the I/O layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid argument combination (mismatched weights, bad orders, ...).
    #[error("usage: {0}")]
    Usage(String),
    /// Mathematically undefined request (division by zero interval, ...).
    #[error("domain: {0}")]
    Domain(String),
    /// Malformed text in a config, certificate or decimal literal.
    #[error("format: {0}")]
    Format(String),
    /// An interpolation-error model could not produce a finite bound (the
    /// caller should retry with a higher interpolation order).
    #[error("bound failure: {0}")]
    BoundFailure(String),
    /// The floating-point solver failed to converge.
    #[error("solver failure on domain {domain}: {reason}")]
    SolverFailure { domain: usize, reason: String },
    /// Numeric diagonalization was too ill-conditioned to enclose Q^{-1}.
    #[error("diagonalization failure on domain {domain}: {reason}")]
    Diagonalization { domain: usize, reason: String },
    /// The radii inequalities could not be verified.
    #[error("contraction failure on domain {domain}: {reason}")]
    ContractFailure { domain: usize, reason: String },
    /// The infinite-time step requires a strictly stable linearization.
    #[error("stability: {0}")]
    Stability(String),
    /// No verifiable basin radius around the steady state.
    #[error("basin: {0}")]
    Basin(String),
    /// No verifiable spectral gap below zero.
    #[error("spectral gap: {0}")]
    Gap(String),
    /// Certificate self-check failed.
    #[error("certificate check: {0}")]
    CertCheck(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the `parab` binary: 0 = verified,
    /// 2 = config/usage error, 3 = contraction failure, 4 = stability.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Format(_) | Error::Domain(_) | Error::Io(_) => 2,
            Error::BoundFailure(_)
            | Error::SolverFailure { .. }
            | Error::Diagonalization { .. }
            | Error::ContractFailure { .. }
            | Error::CertCheck(_) => 3,
            Error::Stability(_) | Error::Basin(_) | Error::Gap(_) => 4,
        }
    }
}
