//! Fluctuation-expansion comparison baseline: classical steady state,
//! Routh–Hurwitz stability, and the Lyapunov steady covariance.
//!
//! The standard approach linearizes around the classical steady state
//! `α_s = E/(κ + iΔ)` with the radiation-pressure-shifted detuning
//! `Δ = Δ₀ − g²|α_s|²/ω_m` and effective coupling `G = √2·g·|α_s|`, then
//! reads the stationary fluctuation covariance off the drift–diffusion
//! (Lyapunov) equation. Its validity is gated by the stability conditions
//! `s₁ > 0`, `s₂ > 0`; the drift-matrix spectrum is kept alongside as an
//! independent cross-check.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::linalg::{cubic_real_roots, drift_eigenvalues, solve_lyapunov};
use crate::model::SystemParams;

/// Relative tolerance of the fixed-point iteration for `|α_s|²`.
pub const STEADY_STATE_TOL: f64 = 1e-12;

/// Iteration cap for the classical fixed point.
pub const STEADY_STATE_MAX_ITERS: usize = 10_000;

/// Classical steady state of the driven cavity with the mirror following.
#[derive(Debug, Clone)]
pub struct ClassicalSteadyState {
    /// Stationary cavity amplitude `α_s = E/(κ + iΔ)`.
    pub alpha_s: C64,
    /// Effective linearized coupling `G = √2·g·|α_s|`.
    pub g_eff: f64,
    /// Radiation-pressure-shifted detuning `Δ = Δ₀ − g²|α_s|²/ω_m`.
    pub delta: f64,
    /// The shift `g²|α_s|²/ω_m` itself.
    pub radiation_shift: f64,
    /// Stationary intensity `|α_s|²`.
    pub intensity: f64,
    /// All real roots of the equivalent cubic in `|α_s|²`.
    pub cubic_roots: Vec<f64>,
    /// More than one distinct positive intensity root coexists.
    pub bistable: bool,
    /// Fixed-point iterations actually used.
    pub iterations: usize,
}

/// Routh–Hurwitz stability report with the spectral cross-check.
#[derive(Debug, Clone, Copy)]
pub struct StabilityReport {
    /// First stability polynomial (sign decides; magnitude has mixed units).
    pub s1: f64,
    /// Second stability polynomial `ω_m(κ² + Δ²) − G²Δ`.
    pub s2: f64,
    /// `s₁ > 0` and `s₂ > 0`.
    pub stable: bool,
    /// Largest real part of the drift spectrum (negative iff stable).
    pub drift_eigen_max_real: f64,
}

/// Coefficients of the intensity cubic
/// `(g⁴/ω_m²)u³ − (2Δ₀g²/ω_m)u² + (κ² + Δ₀²)u − E² = 0` for `u = |α_s|²`.
fn intensity_cubic(params: &SystemParams, e: f64) -> (f64, f64, f64, f64) {
    let shift = params.g * params.g / params.omega_m;
    (
        shift * shift,
        -2.0 * params.delta0 * shift,
        params.kappa * params.kappa + params.delta0 * params.delta0,
        -e * e,
    )
}

fn distinct_positive(roots: &[f64]) -> usize {
    let mut pos: Vec<f64> = roots.iter().copied().filter(|&r| r > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for r in pos {
        if r - last > 1e-6 * r.abs().max(1e-300) {
            count += 1;
        }
        last = r;
    }
    count
}

/// Solves the coupled pair `α_s = E/(κ + iΔ)`, `Δ = Δ₀ − g²|α_s|²/ω_m` by a
/// damped fixed point on the branch continuously connected to `g → 0`.
///
/// All real roots of the equivalent intensity cubic ride along; more than
/// one distinct positive root marks the point bistable rather than silently
/// picking a branch. Non-convergence reports bistability (with the roots)
/// when that is the cause, otherwise the iteration failure itself.
pub fn classical_steady_state(
    params: &SystemParams,
    e: f64,
) -> Result<ClassicalSteadyState, Error> {
    params.validate()?;
    if !e.is_finite() || e < 0.0 {
        return Err(Error::InvalidParameter {
            field: "e",
            reason: format!("drive amplitude must be finite and ≥ 0, got {e}"),
        });
    }

    let (c3, c2, c1, c0) = intensity_cubic(params, e);
    let cubic_roots = cubic_real_roots(c3, c2, c1, c0);
    let bistable = distinct_positive(&cubic_roots) > 1;

    let k2 = params.kappa * params.kappa;
    let shift_per_u = params.g * params.g / params.omega_m;
    let delta_of = |u: f64| params.delta0 - shift_per_u * u;
    let next = |u: f64| {
        let d = delta_of(u);
        e * e / (k2 + d * d)
    };

    // Damped fixed point from the g → 0 intensity.
    let beta = 0.7;
    let mut u = e * e / (k2 + params.delta0 * params.delta0);
    let mut iterations = STEADY_STATE_MAX_ITERS;
    for i in 0..STEADY_STATE_MAX_ITERS {
        let u_new = (1.0 - beta) * u + beta * next(u);
        let done = (u_new - u).abs() <= STEADY_STATE_TOL * u_new.abs().max(1e-300);
        u = u_new;
        if done {
            iterations = i + 1;
            break;
        }
    }
    if iterations == STEADY_STATE_MAX_ITERS {
        let positive: Vec<f64> = cubic_roots.iter().copied().filter(|&r| r > 0.0).collect();
        return if bistable {
            Err(Error::Bistable { roots: positive })
        } else {
            Err(Error::SteadyStateNoConvergence { iterations })
        };
    }

    let delta = delta_of(u);
    let alpha_s = C64::new(e, 0.0) / C64::new(params.kappa, delta);
    Ok(ClassicalSteadyState {
        alpha_s,
        g_eff: std::f64::consts::SQRT_2 * params.g * alpha_s.norm(),
        delta,
        radiation_shift: shift_per_u * u,
        intensity: u,
        cubic_roots,
        bistable,
        iterations,
    })
}

/// Linearized drift matrix of the fluctuation quadratures
/// `(δx_c, δp_c, δx_m, δp_m)` around the classical steady state.
pub fn drift_matrix(params: &SystemParams, g_eff: f64, delta: f64) -> Matrix4<f64> {
    let (k, w, gm) = (params.kappa, params.omega_m, params.gamma_m);
    Matrix4::new(
        -k, delta, 0.0, 0.0, //
        -delta, -k, g_eff, 0.0, //
        0.0, 0.0, 0.0, w, //
        g_eff, 0.0, -w, -gm,
    )
}

/// Diffusion matrix of the fluctuation Langevin equations: vacuum cavity
/// input (`κ` per quadrature at vacuum variance 1/2) and Brownian momentum
/// noise `γ_m(2n_th + 1)`; normalization fixed by the `G = 0` equilibrium.
pub fn diffusion_matrix(params: &SystemParams) -> Matrix4<f64> {
    let cavity = params.kappa * (2.0 * params.n_c + 1.0);
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        cavity,
        cavity,
        0.0,
        params.gamma_m * (2.0 * params.n_th + 1.0),
    ))
}

/// Stability of an already-computed steady state: the printed `s₁`, `s₂`
/// polynomials next to the drift-spectrum cross-check.
pub fn stability_from(params: &SystemParams, steady: &ClassicalSteadyState) -> StabilityReport {
    let (k, w, gm) = (params.kappa, params.omega_m, params.gamma_m);
    let (d, g2) = (steady.delta, steady.g_eff * steady.g_eff);
    let k2 = k * k;

    let s1 = 2.0 * gm * k
        * ((k2 + (w - d) * (w - d)) * (k2 + (w + d) * (w + d))
            + gm * ((gm + 2.0 * k) * (k2 + d * d) + 2.0 * k * w * w))
        + d * w * g2 * (gm + 2.0 * k) * (gm + 2.0 * k);
    let s2 = w * (k2 + d * d) - g2 * d;

    let eigs = drift_eigenvalues(&drift_matrix(params, steady.g_eff, steady.delta));
    let drift_eigen_max_real = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);

    StabilityReport { s1, s2, stable: s1 > 0.0 && s2 > 0.0, drift_eigen_max_real }
}

/// Classical steady state plus Routh–Hurwitz stability in one call.
pub fn routh_hurwitz(params: &SystemParams, e: f64) -> Result<StabilityReport, Error> {
    let steady = classical_steady_state(params, e)?;
    Ok(stability_from(params, &steady))
}

/// Stationary fluctuation covariance from the continuous Lyapunov equation
/// `A·V + V·Aᵀ = −D`; refuses parameters outside the stability region.
pub fn baseline_steady_covariance(
    params: &SystemParams,
    e: f64,
) -> Result<Matrix4<f64>, Error> {
    let steady = classical_steady_state(params, e)?;
    let report = stability_from(params, &steady);
    if !report.stable {
        return Err(Error::UnstableDrift { s1: report.s1, s2: report.s2 });
    }
    let a = drift_matrix(params, steady.g_eff, steady.delta);
    let d = diffusion_matrix(params);
    let (v, _residual) = solve_lyapunov(&a, &d)?;
    Ok(v)
}

/// Baseline cavity photon fluctuation number `(V₀₀ + V₁₁ − 1)/2` at the
/// fluctuation-expansion steady state.
pub fn baseline_cavity_fluctuation(params: &SystemParams, e: f64) -> Result<f64, Error> {
    Ok(crate::entanglement::cavity_fluctuation_number(&baseline_steady_covariance(params, e)?))
}

/// Drive amplitude where `s₁` changes sign in `[e_lo, e_hi]`, by bisection;
/// the bracket must straddle the stability boundary.
pub fn stability_boundary_drive(
    params: &SystemParams,
    e_lo: f64,
    e_hi: f64,
) -> Result<f64, Error> {
    let s1_of = |e: f64| -> Result<f64, Error> { Ok(routh_hurwitz(params, e)?.s1) };
    let (mut lo, mut hi) = (e_lo, e_hi);
    let (s_lo, s_hi) = (s1_of(lo)?, s1_of(hi)?);
    if s_lo.signum() == s_hi.signum() {
        return Err(Error::InvalidParameter {
            field: "e_lo..e_hi",
            reason: format!(
                "bracket does not straddle the stability boundary (s₁: {s_lo:.3e} and {s_hi:.3e})"
            ),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if s1_of(mid)?.signum() == s_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
