//! System parameters, drive profiles, and the displaced cavity amplitude
//! `D(τ)`.
//!
//! Everything runs in cavity units: `κ` is the unit of rate, so times are
//! `κt` and all other rates are ratios against `κ`. The mechanical mode is
//! assumed deep in the resolved high-Q regime (`ω_m/γ_m ≫ 1`); leaving it is
//! legal but produces a warning, since the reservoir reduction keeps only
//! the leading order in `γ_m/ω_m`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Error;

/// Static parameters of one cavity mode coupled to one mechanical mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Single-photon optomechanical coupling.
    pub g: f64,
    /// Cavity amplitude decay rate; the unit of rate, normally 1.
    pub kappa: f64,
    /// Mechanical amplitude decay rate.
    pub gamma_m: f64,
    /// Mechanical frequency.
    pub omega_m: f64,
    /// Pump–cavity detuning `Δ₀ = ω_c − ω₀`; negative is blue-detuned.
    pub delta0: f64,
    /// Initial thermal occupation of the mechanical mode.
    pub n_m: f64,
    /// Occupation of the mechanical reservoir (defaults to `n_m`).
    pub n_th: f64,
    /// Occupation of the optical reservoir; 0 at optical frequencies.
    pub n_c: f64,
}

impl SystemParams {
    /// Parameters in cavity units (`κ = 1`), mechanical bath thermalized at
    /// the initial occupation `n_m`.
    pub fn cavity_units(g: f64, omega_m: f64, gamma_m: f64, delta0: f64, n_m: f64) -> Self {
        Self { g, kappa: 1.0, gamma_m, omega_m, delta0, n_m, n_th: n_m, n_c: 0.0 }
    }

    /// Check admissibility; hard errors only, advisory conditions go through
    /// [`SystemParams::warnings`].
    pub fn validate(&self) -> Result<(), Error> {
        let positive: [(&'static str, f64); 3] =
            [("kappa", self.kappa), ("gamma_m", self.gamma_m), ("omega_m", self.omega_m)];
        for (field, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        let nonneg: [(&'static str, f64); 4] =
            [("g", self.g), ("n_m", self.n_m), ("n_th", self.n_th), ("n_c", self.n_c)];
        for (field, value) in nonneg {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be nonnegative and finite, got {value}"),
                });
            }
        }
        if !self.delta0.is_finite() {
            return Err(Error::InvalidParameter {
                field: "delta0",
                reason: format!("must be finite, got {}", self.delta0),
            });
        }
        Ok(())
    }

    /// Advisory conditions: parameter choices that are admissible but leave
    /// the regime the reservoir reduction was derived for.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let q = self.omega_m / self.gamma_m;
        if q < 100.0 {
            w.push(format!(
                "mechanical quality factor ω_m/γ_m = {q:.3e} < 100; the high-Q reservoir \
                 reduction is marginal here"
            ));
        }
        w
    }

    /// Mechanical quality factor `ω_m/γ_m`.
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }
}

/// Envelope of the classical cavity drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveProfile {
    /// Constant amplitude `E` for all `t ≥ 0`.
    Cw { e: f64 },
    /// Half-Gaussian envelope `E·exp(−Δω²t²)` switched on at `t = 0` with
    /// its peak at the switch-on instant.
    GaussianPulse { e: f64, bandwidth: f64 },
}

impl DriveProfile {
    /// Drive amplitude `E(t)`; zero before switch-on.
    pub fn amplitude(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            DriveProfile::Cw { e } => e,
            DriveProfile::GaussianPulse { e, bandwidth } => e * (-(bandwidth * t).powi(2)).exp(),
        }
    }

    /// Peak amplitude `E`.
    pub fn peak(&self) -> f64 {
        match *self {
            DriveProfile::Cw { e } | DriveProfile::GaussianPulse { e, .. } => e,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let e = self.peak();
        if !(e >= 0.0) || !e.is_finite() {
            return Err(Error::InvalidParameter {
                field: "drive.e",
                reason: format!("must be nonnegative and finite, got {e}"),
            });
        }
        if let DriveProfile::GaussianPulse { bandwidth, .. } = *self {
            if !(bandwidth > 0.0) || !bandwidth.is_finite() {
                return Err(Error::InvalidParameter {
                    field: "drive.bandwidth",
                    reason: format!("must be positive and finite, got {bandwidth}"),
                });
            }
        }
        Ok(())
    }
}

// 8-point Gauss–Legendre rule on [−1, 1].
const GL8_NODES: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// `∫_a^b E(t')·e^{iΔ₀t'}·e^{−κ(τ−t')/2} dt'` by 8-point Gauss–Legendre on
/// `n` equal panels. All exponents are nonpositive for `t' ≤ τ`, so the
/// integrand never overflows.
fn displacement_integral(
    params: &SystemParams,
    drive: &DriveProfile,
    tau: f64,
    a: f64,
    b: f64,
    panels: usize,
) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut panel = C64::new(0.0, 0.0);
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            let tp = mid + 0.5 * h * x;
            let phase = C64::new(-0.5 * params.kappa * (tau - tp), params.delta0 * tp);
            panel += w * drive.amplitude(tp) * phase.exp();
        }
        acc += 0.5 * h * panel;
    }
    acc
}

/// Displaced cavity amplitude
/// `D(τ) = ∫₀^τ dt' E(t')·e^{iΔ₀t'}·e^{−κ(τ−t')/2}`.
///
/// For a constant drive this is the closed form
/// `E·(e^{iΔ₀τ} − e^{−κτ/2})/(iΔ₀ + κ/2)`; pulses go through composite
/// Gauss–Legendre quadrature on panels no wider than `min(1/κ, 1/Δω)/8`,
/// refined until two successive panel doublings agree to 1e−9 relative.
pub fn displacement(params: &SystemParams, drive: &DriveProfile, tau: f64) -> C64 {
    if tau <= 0.0 {
        return C64::new(0.0, 0.0);
    }
    match *drive {
        DriveProfile::Cw { e } => {
            let denom = C64::new(0.5 * params.kappa, params.delta0);
            let num = C64::new(0.0, params.delta0 * tau).exp()
                - C64::new(-0.5 * params.kappa * tau, 0.0).exp();
            e * num / denom
        }
        DriveProfile::GaussianPulse { bandwidth, .. } => {
            let width = (1.0 / params.kappa).min(1.0 / bandwidth) / 8.0;
            let mut panels = (tau / width).ceil() as usize;
            let mut prev = displacement_integral(params, drive, tau, 0.0, tau, panels);
            for _ in 0..8 {
                panels *= 2;
                let next = displacement_integral(params, drive, tau, 0.0, tau, panels);
                let delta = (next - prev).norm();
                prev = next;
                if delta <= 1e-9 * prev.norm().max(1e-300) {
                    break;
                }
            }
            prev
        }
    }
}

/// `D` on a uniform grid `τ_k = k·dτ`, `k = 0..=n`.
///
/// The constant drive uses the closed form at every node; pulses use the
/// exact one-step recurrence `D(τ+dτ) = e^{−κ·dτ/2}·D(τ) + (local panel)`,
/// which keeps every exponent nonpositive regardless of window length.
pub fn displacement_grid(
    params: &SystemParams,
    drive: &DriveProfile,
    dt: f64,
    n: usize,
) -> Vec<C64> {
    match *drive {
        DriveProfile::Cw { .. } => {
            (0..=n).map(|k| displacement(params, drive, k as f64 * dt)).collect()
        }
        DriveProfile::GaussianPulse { .. } => {
            let mut out = Vec::with_capacity(n + 1);
            let mut d = C64::new(0.0, 0.0);
            out.push(d);
            let decay = (-0.5 * params.kappa * dt).exp();
            for k in 0..n {
                let (lo, hi) = (k as f64 * dt, (k + 1) as f64 * dt);
                d = decay * d + displacement_integral(params, drive, hi, lo, hi, 1);
                out.push(d);
            }
            out
        }
    }
}

/// The displacement as originally written against an outer time `t ≥ τ`:
/// the doubly-decayed drive integral plus the commutator-kernel term
/// `∫₀^τ dt' Γ_c(t', τ)·E(t')·e^{iΔ₀t'}` with
/// `Γ_c = e^{−κ(τ−t')/2} − e^{−κ(t−τ)/2}·e^{−κ(t−t')/2}`.
///
/// The two terms combine so that every `t`-dependence cancels;
/// [`displacement`] implements the reduced form, and this evaluator exists
/// to let tests verify the cancellation numerically at distinct `t`.
pub fn displacement_unreduced(
    params: &SystemParams,
    drive: &DriveProfile,
    tau: f64,
    outer_t: f64,
) -> C64 {
    if tau <= 0.0 {
        return C64::new(0.0, 0.0);
    }
    let k = params.kappa;
    let panel_width = match *drive {
        DriveProfile::Cw { .. } => 1.0 / (8.0 * k),
        DriveProfile::GaussianPulse { bandwidth, .. } => (1.0 / k).min(1.0 / bandwidth) / 8.0,
    };
    let panels = (tau / panel_width).ceil().max(16.0) as usize * 2;
    let h = tau / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        let mut panel = C64::new(0.0, 0.0);
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            let tp = mid + 0.5 * h * x;
            let drive_phase = drive.amplitude(tp) * C64::new(0.0, params.delta0 * tp).exp();
            let term1 = (-0.5 * k * (outer_t - tau)).exp() * (-0.5 * k * (outer_t - tp)).exp();
            let gamma_c = (-0.5 * k * (tau - tp)).exp()
                - (-0.5 * k * (outer_t - tau)).exp() * (-0.5 * k * (outer_t - tp)).exp();
            panel += w * drive_phase * (term1 + gamma_c);
        }
        acc += 0.5 * h * panel;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> SystemParams {
        SystemParams::cavity_units(1e-6, 2.5, 2.5e-7, -2.5, 0.0)
    }

    #[test]
    fn validation_accepts_reference_parameters_and_rejects_bad_rates() {
        assert!(params().validate().is_ok());
        let mut bad = params();
        bad.omega_m = 0.0;
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidParameter { field: "omega_m", .. })
        ));
        let mut bad = params();
        bad.n_m = -1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn low_quality_factor_warns_but_validates() {
        let mut p = params();
        p.gamma_m = p.omega_m / 50.0;
        assert!(p.validate().is_ok());
        assert_eq!(p.warnings().len(), 1);
        assert!(params().warnings().is_empty());
    }

    #[test]
    fn cw_displacement_matches_direct_quadrature() {
        let p = params();
        let drive = DriveProfile::Cw { e: 3e5 };
        for tau in [0.3, 1.0, 4.0, 12.0] {
            let closed = displacement(&p, &drive, tau);
            let panels = (tau * 200.0) as usize;
            let quad = displacement_integral(&p, &drive, tau, 0.0, tau, panels);
            assert!((closed - quad).norm() <= 1e-9 * closed.norm());
        }
    }

    #[test]
    fn resonant_cw_displacement_saturates_at_two_e_over_kappa() {
        let mut p = params();
        p.delta0 = 0.0;
        let drive = DriveProfile::Cw { e: 3e5 };
        let d = displacement(&p, &drive, 40.0);
        assert_abs_diff_eq!(d.re, 2.0 * 3e5, epsilon = 1e-6 * 3e5);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-9 * 3e5);
    }

    #[test]
    fn cw_displacement_modulus_saturates_to_lorentzian_value() {
        let p = params();
        let e = 3e5;
        let drive = DriveProfile::Cw { e };
        let want = e / (0.25 * p.kappa * p.kappa + p.delta0 * p.delta0).sqrt();
        let got = displacement(&p, &drive, 60.0).norm();
        assert_abs_diff_eq!(got, want, epsilon = 1e-8 * want);
    }

    #[test]
    fn displacement_is_linear_in_drive_amplitude() {
        let p = params();
        let d1 = displacement(&p, &DriveProfile::Cw { e: 1.0 }, 3.7);
        let d2 = displacement(&p, &DriveProfile::Cw { e: 2.0e5 }, 3.7);
        assert!((2.0e5 * d1 - d2).norm() <= 1e-12 * d2.norm());
    }

    #[test]
    fn zero_drive_gives_zero_displacement() {
        let p = params();
        for drive in
            [DriveProfile::Cw { e: 0.0 }, DriveProfile::GaussianPulse { e: 0.0, bandwidth: 2.5 }]
        {
            assert_eq!(displacement(&p, &drive, 5.0), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn pulse_amplitude_decays_as_printed() {
        let drive = DriveProfile::GaussianPulse { e: 2e6, bandwidth: 2.5 };
        assert_abs_diff_eq!(drive.amplitude(0.0), 2e6, epsilon = 0.0);
        assert_abs_diff_eq!(drive.amplitude(1.0), 2e6 * (-6.25f64).exp(), epsilon = 1e-9);
        assert_eq!(drive.amplitude(-0.5), 0.0);
    }

    #[test]
    fn pulse_displacement_matches_fine_reference_quadrature() {
        let p = params();
        let drive = DriveProfile::GaussianPulse { e: 2e6, bandwidth: 2.5 };
        for tau in [0.2, 0.9, 2.5, 8.0] {
            let fast = displacement(&p, &drive, tau);
            let reference = displacement_integral(&p, &drive, tau, 0.0, tau, 4000);
            assert!(
                (fast - reference).norm() <= 1e-8 * reference.norm().max(1.0),
                "tau = {tau}: {fast} vs {reference}"
            );
        }
    }

    #[test]
    fn displacement_grid_agrees_with_pointwise_evaluation() {
        let p = params();
        let dt = 5e-3;
        let n = 600;
        for drive in
            [DriveProfile::Cw { e: 3e5 }, DriveProfile::GaussianPulse { e: 2e6, bandwidth: 2.5 }]
        {
            let grid = displacement_grid(&p, &drive, dt, n);
            assert_eq!(grid.len(), n + 1);
            for k in [1, 7, 150, 599, 600] {
                let want = displacement(&p, &drive, k as f64 * dt);
                let got = grid[k];
                assert!(
                    (got - want).norm() <= 1e-8 * want.norm().max(1e-12),
                    "k = {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn unreduced_two_term_form_is_outer_time_independent() {
        let p = params();
        for drive in
            [DriveProfile::Cw { e: 3e5 }, DriveProfile::GaussianPulse { e: 2e6, bandwidth: 2.5 }]
        {
            for tau in [0.8, 3.0, 9.0] {
                let at_t1 = displacement_unreduced(&p, &drive, tau, tau);
                let at_t2 = displacement_unreduced(&p, &drive, tau, tau + 7.3);
                let reduced = displacement(&p, &drive, tau);
                let scale = reduced.norm();
                assert!((at_t1 - at_t2).norm() <= 1e-10 * scale, "t-dependence at tau = {tau}");
                assert!((at_t1 - reduced).norm() <= 1e-7 * scale, "reduction at tau = {tau}");
            }
        }
    }
}
