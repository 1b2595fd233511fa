//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter failed its admissibility check.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A run configuration is missing a field that the selected mode needs,
    /// or holds a value that cannot be used.
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// `K² = m·1` failed beyond tolerance, i.e. the generator lost the
    /// algebraic structure the closed-form propagator relies on.
    #[error("propagator structure violation: max|K² − m·1| = {defect:.3e} exceeds {tol:.3e}")]
    StructureViolation { defect: f64, tol: f64 },

    /// The ordered-product oracle was asked to take steps too coarse for its
    /// local error bound.
    #[error("oracle step too coarse: ‖M‖·dτ = {m_dt:.3e} > 0.1; increase `steps`")]
    OracleStepTooCoarse { m_dt: f64 },

    /// Halving the quadrature grid moved the result by more than the
    /// configured tolerance.
    #[error(
        "quadrature not converged: halving the grid (κ·dτ = {dt:.3e}) changes the result by \
         {rel_change:.3e} relative (tolerance {tol:.3e}); refine `grid_dt` or shorten the window"
    )]
    QuadratureNotConverged { dt: f64, rel_change: f64, tol: f64 },

    /// The classical steady state has several coexisting branches; all real
    /// positive roots of the cubic in |α_s|² are reported.
    #[error("classical steady state is bistable: |α_s|² roots {roots:?}")]
    Bistable { roots: Vec<f64> },

    /// The fixed point for the classical amplitude did not settle.
    #[error("classical steady state did not converge after {iterations} iterations")]
    SteadyStateNoConvergence { iterations: usize },

    /// The fluctuation expansion has no stationary covariance at these
    /// parameters (a Routh–Hurwitz condition is violated).
    #[error("drift is unstable (s₁ = {s1:.6e}, s₂ = {s2:.6e}); no stationary covariance")]
    UnstableDrift { s1: f64, s2: f64 },

    /// A covariance matrix violates the uncertainty bound beyond numerical
    /// tolerance.
    #[error("unphysical covariance: smallest symplectic eigenvalue {nu_min:.6e} < 1/2")]
    UnphysicalCovariance { nu_min: f64 },

    /// The Fock-space truncation swallowed visible population even after
    /// the automatic doublings.
    #[error("Fock truncation at N = {n_max} still holds tail population {tail:.3e}")]
    TruncationOverflow { n_max: usize, tail: f64 },

    /// Underlying I/O failure while reading configs or writing outputs.
    #[error("{context}: {message}")]
    Io { context: String, message: String },
}

impl Error {
    pub fn io(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Error::Io { context: context.into(), message: err.to_string() }
    }
}
