//! Gaussian dynamics of a driven optomechanical cavity, solved in the
//! displaced frame where the drive enters as a time-dependent bilinear
//! coupling.
//!
//! The state of the cavity mode and the mechanical mode is tracked through
//! the 4×4 covariance matrix of the quadratures `(x_c, p_c, x_m, p_m)`
//! (vacuum variance 1/2). The homogeneous part of the evolution is the
//! closed-form propagator `Φ(t, τ) = exp K(t, τ)` built on the identity
//! `K² = m·1`; the reservoir part is the colored-noise covariance `V₂`
//! assembled by double quadrature over the exponentially windowed noise
//! kernels. Entanglement is measured by the logarithmic negativity of the
//! partial transpose.
//!
//! Module map:
//! - [`model`]: system parameters, drive profiles, cavity displacement `D(τ)`;
//! - [`propagator`]: generator coefficients, `K` integral, closed-form `Φ`,
//!   and the ordered-product integration oracle;
//! - [`noise`]: reservoir kernels, Monte Carlo kernel checks, the `V₂`
//!   double quadrature, and the driven mean trajectory;
//! - [`entanglement`]: covariance bookkeeping, logarithmic negativity,
//!   time traces, and sudden-death/revival detection;
//! - [`baseline`]: the steady-state fluctuation expansion around the
//!   classical amplitude (drift/diffusion, Routh–Hurwitz, Lyapunov solve)
//!   used as the comparison approach;
//! - [`thermal`]: an independent Fock-space birth–death oracle for the
//!   damped mechanical mode;
//! - [`config`] / [`runner`] / [`report`]: flat key-value run configs,
//!   figure presets, sweep orchestration, CSV/manifest output.

pub mod baseline;
pub mod config;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod propagator;
pub mod report;
pub mod runner;
pub mod thermal;

pub use error::Error;
pub use model::{DriveProfile, SystemParams};
