//! Acceptance suite: one measured pass/fail line per pinned criterion.
//!
//! Every criterion is evaluated at its published tolerance; the suite
//! prints one line per criterion and fails at the end if any criterion
//! missed its pin, listing the measured values so a red line documents
//! the distance faithfully instead of hiding it.

use std::fmt::Write as _;

use nalgebra::Matrix4;

use optomech::baseline::{
    baseline_cavity_fluctuation, baseline_steady_covariance, routh_hurwitz,
};
use optomech::config::preset;
use optomech::entanglement::{
    cavity_fluctuation_number, covariance_direct_integration, entanglement_trace, evolve_state,
    initial_covariance, log_negativity, trace_features, EvolutionMode, TraceFeatures,
};
use optomech::linalg::{rel_frob_diff, symplectic_defect};
use optomech::noise::{covariance_noise_with, kernel_monte_carlo, NoiseOptions};
use optomech::propagator::{
    closed_form_propagator, default_oracle_steps, product_integration_propagator, propagator_grid,
};
use optomech::thermal::{fitted_relaxation_rate, relax_occupation_with};
use optomech::{DriveProfile, SystemParams};

const LN2: f64 = core::f64::consts::LN_2;

struct Criterion {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn params_at(delta_units: f64) -> SystemParams {
    SystemParams::cavity_units(1e-6, 2.5, 2.5e-7, delta_units * 2.5, 0.0)
}

fn quiet_opts() -> NoiseOptions {
    NoiseOptions { check_convergence: false, ..NoiseOptions::default() }
}

fn full_trace(delta_units: f64, e: f64) -> (Vec<f64>, TraceFeatures) {
    let trace = entanglement_trace(
        &params_at(delta_units),
        &DriveProfile::Cw { e },
        15.0,
        600,
        EvolutionMode::Full,
        &quiet_opts(),
    )
    .expect("trace");
    let features = trace_features(&trace);
    (trace.log_negativities, features)
}

/// Strong-drive trace: the default quadrature grid is marginal at
/// E/κ = 2e6, so these run on a finer grid with the convergence check
/// armed, certifying every sample.
fn strong_trace(delta_units: f64, e: f64) -> TraceFeatures {
    let opts = NoiseOptions { grid_dt: 1e-3, ..NoiseOptions::default() };
    trace_features(
        &entanglement_trace(
            &params_at(delta_units),
            &DriveProfile::Cw { e },
            15.0,
            600,
            EvolutionMode::Full,
            &opts,
        )
        .expect("trace"),
    )
}

/// First zero of E_N under the exact-ordering covariance equation of
/// motion, or `None` if the trace survives to `t_max` (the hunt stops
/// early once the covariance scale would overwhelm the eigenvalue
/// arithmetic near the entanglement floor).
fn direct_ode_death(params: &SystemParams, drive: &DriveProfile, t_max: f64) -> Option<f64> {
    let samples = (t_max / 0.0125).round() as usize;
    let mut prev = 0.0f64;
    for i in 1..=samples {
        let t = t_max * i as f64 / samples as f64;
        let v = covariance_direct_integration(params, drive, t, 2e-4).expect("ode");
        if v.abs().max() > 1e8 {
            return None;
        }
        let e_n = log_negativity(&v).expect("E_N");
        if i > 1 && prev > 1e-9 && e_n <= 1e-9 {
            return Some(t);
        }
        prev = e_n;
    }
    None
}

/// 1. The closed-form propagator stays symplectic over every drive preset.
fn criterion_1() -> Criterion {
    let mut worst: f64 = 0.0;
    let mut scan = |params: &SystemParams, drive: &DriveProfile| {
        let grid = propagator_grid(params, drive, 15.0, 1e-3).expect("grid");
        for phi in &grid.phis {
            worst = worst.max(symplectic_defect(phi));
        }
    };
    for &delta in &[-0.5, -1.0, -1.5, -2.0, 0.5, 1.0, 1.5, 2.0] {
        scan(&params_at(delta), &DriveProfile::Cw { e: 3e5 });
        scan(&params_at(delta), &DriveProfile::Cw { e: 2e6 });
        scan(&params_at(delta), &DriveProfile::GaussianPulse { e: 2e6, bandwidth: 2.5 });
    }
    Criterion {
        id: 1,
        name: "closed-form propagator symplectic across drive presets",
        pass: worst < 1e-8,
        detail: format!("max ‖Φ·J·Φᵀ − J‖ = {worst:.3e} (tolerance 1e-8)"),
    }
}

/// 2. Closed form against the ordered-product oracle at the strong-drive
/// presets, pinned at 1e-4; a 10×-drive error report is always generated.
fn criterion_2() -> Criterion {
    let mut worst: f64 = 0.0;
    let mut report = String::new();
    for &e in &[3e5, 2e6] {
        for &delta in &[-0.5, -1.0, -1.5, -2.0] {
            let params = params_at(delta);
            let at = |amp: f64| -> f64 {
                let drive = DriveProfile::Cw { e: amp };
                let closed = closed_form_propagator(&params, &drive, 15.0, 0.0).expect("closed");
                // The generator norm grows with the displacement, so the
                // oracle step count must scale with the drive amplitude.
                let steps = default_oracle_steps(&params, 15.0, 0.0)
                    * ((amp / 1e6).ceil().max(1.0) as usize);
                let oracle = product_integration_propagator(&params, &drive, 15.0, 0.0, steps)
                    .expect("oracle");
                rel_frob_diff(&closed.matrix, &oracle.matrix)
            };
            let err = at(e);
            let err_10x = at(10.0 * e);
            worst = worst.max(err);
            let _ = write!(
                report,
                "\n    E/κ = {e:.0e}, Δ₀/ω_m = {delta:+.1}: rel. error = {err:.3e} (10× drive: {err_10x:.3e})"
            );
        }
    }
    Criterion {
        id: 2,
        name: "closed form vs time-ordered oracle within 1e-4 at κt = 15",
        pass: worst < 1e-4,
        detail: format!("worst rel. Frobenius error = {worst:.3e} (tolerance 1e-4){report}"),
    }
}

/// 3. Blue-detuned evolution at E/κ = 3e5: ≤1% late-window drift for all
/// four detunings and the κt = 15 maximum at the two-mode-squeezing
/// resonance.
fn criterion_3() -> Criterion {
    let detunings = [-0.5, -1.0, -1.5, -2.0];
    let mut finals = Vec::new();
    let mut drifts = Vec::new();
    let mut report = String::new();
    for &delta in &detunings {
        let (values, features) = full_trace(delta, 3e5);
        finals.push(*values.last().unwrap());
        drifts.push(features.plateau_drift);
        let _ = write!(
            report,
            "\n    Δ₀/ω_m = {delta:+.1}: drift = {:.3e}, E_N(15) = {:.4}",
            features.plateau_drift,
            values.last().unwrap()
        );
    }
    // Exact-ordering reference for the resonant curve: direct integration
    // of the covariance equation of motion over the same late window.
    let p = params_at(-1.0);
    let d = DriveProfile::Cw { e: 3e5 };
    let v12 = covariance_direct_integration(&p, &d, 12.0, 1e-3).expect("ode");
    let v15 = covariance_direct_integration(&p, &d, 15.0, 1e-3).expect("ode");
    let (e12, e15) =
        (log_negativity(&v12).expect("E_N"), log_negativity(&v15).expect("E_N"));
    let _ = write!(
        report,
        "\n    exact-ordering reference at Δ₀ = -ω_m: E_N 12→15 = {e12:.4}→{e15:.4} \
         (drift {:.3e}); the late window is still on the backaction-heating slope",
        (e12 - e15).abs() / (0.5 * (e12 + e15))
    );
    let drift_ok = drifts.iter().all(|&d| d <= 0.01);
    let resonant_max = finals[1] >= finals[0] && finals[1] >= finals[2] && finals[1] >= finals[3];
    Criterion {
        id: 3,
        name: "blue-detuned plateau ≤1% with the κt = 15 maximum at Δ₀ = -ω_m",
        pass: drift_ok && resonant_max,
        detail: format!(
            "drift ≤ 1e-2 for all four detunings: {drift_ok}; resonant curve is the κt = 15 \
             maximum: {resonant_max}{report}"
        ),
    }
}

/// 4. Strong blue drive (E/κ = 2e6): the resonant steady value beats the
/// ln 2 bound of the stationary expansion, and Δ₀ = -0.5 ω_m dies.
fn criterion_4() -> Criterion {
    let resonant = strong_trace(-1.0, 2e6);
    let half = strong_trace(-0.5, 2e6);
    let beats = resonant.steady_value > LN2;
    let dies = half.death_time.is_some();
    Criterion {
        id: 4,
        name: "strong drive beats ln 2 at resonance and kills Δ₀ = -0.5 ω_m",
        pass: beats && dies,
        detail: format!(
            "steady E_N at Δ₀ = -ω_m = {:.4} (ln 2 = {LN2:.4}); Δ₀ = -0.5 ω_m death: {}",
            resonant.steady_value,
            half.death_time.map_or("none".to_string(), |t| format!("κt = {t:.2}")),
        ),
    }
}

/// 5. Strong red drive: death comes earliest at the beam-splitter
/// resonance Δ₀ = +ω_m, and Δ₀ = 1.5 ω_m revives at least once.
fn criterion_5() -> Criterion {
    let detunings = [0.5, 1.0, 1.5, 2.0];
    let mut deaths = Vec::new();
    let mut revival_at_15 = false;
    let mut report = String::new();
    for &delta in &detunings {
        let features = strong_trace(delta, 2e6);
        let death = features.death_time;
        if (delta - 1.5).abs() < 1e-12 {
            revival_at_15 = features.dead_intervals.iter().any(|d| d.revival.is_some());
        }
        // Exact-ordering reference: death time under direct integration of
        // the covariance equation of motion.
        let ode_death = direct_ode_death(&params_at(delta), &DriveProfile::Cw { e: 2e6 }, 5.0);
        let _ = write!(
            report,
            "\n    Δ₀/ω_m = {delta:+.1}: death = {}, revivals = {}, exact-ordering death = {}",
            death.map_or("none".to_string(), |t| format!("{t:.3}")),
            features.dead_intervals.iter().filter(|d| d.revival.is_some()).count(),
            ode_death.map_or("none ≤ 5".to_string(), |t| format!("{t:.3}")),
        );
        deaths.push(death);
    }
    let earliest_at_resonance = match deaths[1] {
        Some(t1) => deaths
            .iter()
            .enumerate()
            .all(|(i, d)| i == 1 || d.map_or(true, |t| t1 <= t)),
        None => false,
    };
    Criterion {
        id: 5,
        name: "red-detuned death earliest at Δ₀ = +ω_m with revival at 1.5 ω_m",
        pass: earliest_at_resonance && revival_at_15,
        detail: format!(
            "earliest death at the beam-splitter resonance: {earliest_at_resonance}; \
             revival at 1.5 ω_m: {revival_at_15}{report}"
        ),
    }
}

/// 6. End-of-window E_N vs drive intensity has an interior maximum for
/// every scanned detuning.
fn criterion_6() -> Criterion {
    let mut all_interior = true;
    let mut report = String::new();
    for name in ["fig4c", "fig4d"] {
        let config = preset(name).expect("preset");
        let (lo, hi) = (config.sweep_min, config.sweep_max);
        let opts = NoiseOptions { grid_dt: config.grid_dt_kappa, ..NoiseOptions::default() };
        let n = 17;
        for &delta in config.curve_deltas_over_omega_m.as_deref().expect("curves") {
            let params = params_at(delta);
            let mut best = (0usize, f64::MIN);
            for i in 0..n {
                let e = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
                let state =
                    evolve_state(&params, &DriveProfile::Cw { e }, 15.0, EvolutionMode::Full, &opts)
                        .expect("evolve");
                let e_n = log_negativity(&state.covariance).expect("E_N");
                if e_n > best.1 {
                    best = (i, e_n);
                }
            }
            let interior = best.0 > 0 && best.0 < n - 1;
            all_interior &= interior;
            let e_best = lo * (hi / lo).powf(best.0 as f64 / (n - 1) as f64);
            let _ = write!(
                report,
                "\n    Δ₀/ω_m = {delta:+.1} over E/κ ∈ [{lo:.0e}, {hi:.0e}]: max E_N = {:.4} \
                 at E/κ = {e_best:.2e} ({})",
                best.1,
                if interior { "interior" } else { "edge" },
            );
        }
    }
    Criterion {
        id: 6,
        name: "drive-intensity scan peaks in the interior for every detuning",
        pass: all_interior,
        detail: format!("interior maximum for all plotted detunings: {all_interior}{report}"),
    }
}

/// 7. Noise-free evolution never dies for any of the eight detunings.
fn criterion_7() -> Criterion {
    let mut deaths = Vec::new();
    for &delta in &[-0.5, -1.0, -1.5, -2.0, 0.5, 1.0, 1.5, 2.0] {
        let trace = entanglement_trace(
            &params_at(delta),
            &DriveProfile::Cw { e: 2e6 },
            15.0,
            600,
            EvolutionMode::NoiseFree,
            &quiet_opts(),
        )
        .expect("trace");
        let features = trace_features(&trace);
        if features.death_time.is_some() {
            deaths.push(format!("Δ₀/ω_m = {delta:+.1}"));
        }
    }
    Criterion {
        id: 7,
        name: "noise-free traces survive the window at all eight detunings",
        pass: deaths.is_empty(),
        detail: if deaths.is_empty() {
            "no sudden death without reservoir noise".to_string()
        } else {
            format!("unexpected deaths at: {}", deaths.join(", "))
        },
    }
}

/// 8. Stability chart: s₂ > 0 everywhere, an s₁ sign boundary exists, and
/// the Routh–Hurwitz verdict matches the drift eigenvalues off-boundary.
fn criterion_8() -> Criterion {
    let mut s2_min = f64::MAX;
    let (mut stable_points, mut unstable_points, mut disagreements, mut total) = (0, 0, 0, 0);
    let mut no_unique_steady = 0;
    for i in 0..=40 {
        let delta = -2.0 + 0.1 * i as f64;
        let params = params_at(delta);
        for j in 0..25 {
            let e = 1e2 * (2e6_f64 / 1e2).powf(j as f64 / 24.0);
            // Points without a unique steady state (bistable corner at
            // strong red drive) have no linearization to judge.
            let Ok(report) = routh_hurwitz(&params, e) else {
                no_unique_steady += 1;
                continue;
            };
            s2_min = s2_min.min(report.s2);
            if report.stable {
                stable_points += 1;
            } else {
                unstable_points += 1;
            }
            // Near the boundary the eigenvalue sign is numerically soft.
            if report.s1.abs() > 1e-6 {
                total += 1;
                if report.stable != (report.drift_eigen_max_real < 0.0) {
                    disagreements += 1;
                }
            }
        }
    }
    let pass = s2_min > 0.0 && stable_points > 0 && unstable_points > 0 && disagreements == 0;
    Criterion {
        id: 8,
        name: "stability chart: s₂ > 0, boundary present, verdicts agree with eigenvalues",
        pass,
        detail: format!(
            "min s₂ = {s2_min:.3e}; stable/unstable points = {stable_points}/{unstable_points}; \
             verdict disagreements = {disagreements} of {total} off-boundary points; \
             points without a unique steady state = {no_unique_steady}"
        ),
    }
}

/// 9. Stationary-expansion bound: E_N ≤ ln 2 at stable resonant points,
/// and the uncoupled limit reproduces the thermal covariance exactly.
fn criterion_9() -> Criterion {
    let params = params_at(-1.0);
    let mut worst_en: f64 = 0.0;
    let mut stable_count = 0;
    for i in 0..25 {
        let e = 10f64 * (1.3e3_f64 / 10.0).powf(i as f64 / 24.0);
        let report = routh_hurwitz(&params, e).expect("steady state");
        if !report.stable {
            continue;
        }
        stable_count += 1;
        let v = baseline_steady_covariance(&params, e).expect("covariance");
        worst_en = worst_en.max(log_negativity(&v).expect("E_N"));
    }
    let mut anchor = params_at(-1.0);
    anchor.n_m = 4.0;
    anchor.n_th = 4.0;
    let v0 = baseline_steady_covariance(&anchor, 0.0).expect("uncoupled");
    let anchor_err = (v0 - initial_covariance(4.0)).abs().max();
    let pass = worst_en <= LN2 + 1e-3 && anchor_err < 1e-10 && stable_count > 0;
    Criterion {
        id: 9,
        name: "stationary expansion bounded by ln 2 and anchored at zero coupling",
        pass,
        detail: format!(
            "max E_N over {stable_count} stable resonant points = {worst_en:.4} \
             (bound {:.4}); uncoupled-limit deviation = {anchor_err:.3e} (tolerance 1e-10)",
            LN2 + 1e-3
        ),
    }
}

/// 10. The evolved and stationary approaches measurably disagree: E_N over
/// the stable red range, and cavity fluctuation numbers diverging with E.
fn criterion_10() -> Criterion {
    let mut max_diff: f64 = 0.0;
    for i in 0..36 {
        let delta = 0.25 + (2.0 - 0.25) * i as f64 / 35.0;
        let params = params_at(delta);
        let report = routh_hurwitz(&params, 3e5).expect("steady state");
        if !report.stable {
            continue;
        }
        let state = evolve_state(
            &params,
            &DriveProfile::Cw { e: 3e5 },
            15.0,
            EvolutionMode::Full,
            &quiet_opts(),
        )
        .expect("evolve");
        let evolved = log_negativity(&state.covariance).expect("E_N");
        let steady =
            log_negativity(&baseline_steady_covariance(&params, 3e5).expect("cov")).expect("E_N");
        max_diff = max_diff.max((evolved - steady).abs());
    }

    let fluct_gap = |e: f64| -> f64 {
        let params = params_at(1.0);
        let state = evolve_state(
            &params,
            &DriveProfile::Cw { e },
            15.0,
            EvolutionMode::Full,
            &quiet_opts(),
        )
        .expect("evolve");
        (cavity_fluctuation_number(&state.covariance)
            - baseline_cavity_fluctuation(&params, e).expect("fluct"))
        .abs()
    };
    let (gap_lo, gap_hi) = (fluct_gap(5e4), fluct_gap(2e6));
    let pass = max_diff > 1e-2 && gap_hi > 10.0 * gap_lo && gap_hi > 1.0;
    Criterion {
        id: 10,
        name: "evolved and stationary approaches measurably disagree",
        pass,
        detail: format!(
            "max |ΔE_N| over stable red detunings = {max_diff:.3e} (floor 1e-2); cavity \
             fluctuation gap {gap_lo:.3e} → {gap_hi:.3e} as E/κ rises 5e4 → 2e6"
        ),
    }
}

/// 11. Noise kernels: Monte Carlo within 5 SE at ≥ 1e4 samples, and the
/// reservoir quadrature passes its half-resolution convergence check.
fn criterion_11() -> Criterion {
    let mc = kernel_monte_carlo(1.0, 0.5, 5.0, 25, 20_000, 400, 7);
    let mut worst_change: f64 = 0.0;
    for &delta in &[-0.5, -1.0, -1.5, -2.0] {
        let opts = NoiseOptions::default(); // convergence check armed
        let noise = covariance_noise_with(
            &params_at(delta),
            &DriveProfile::Cw { e: 3e5 },
            15.0,
            &opts,
        )
        .expect("converged quadrature");
        worst_change = worst_change.max(noise.rel_change.unwrap_or(f64::NAN));
    }
    let pass = mc.max_se_deviation < 5.0 && worst_change < 1e-3;
    Criterion {
        id: 11,
        name: "kernel Monte Carlo within 5 SE and quadrature Richardson-converged",
        pass,
        detail: format!(
            "Monte Carlo worst deviation = {:.2} SE (tolerance 5); worst half-resolution \
             change = {worst_change:.3e} (tolerance 1e-3)",
            mc.max_se_deviation
        ),
    }
}

/// 12. Thermal oracle: equilibrium is stationary to 1e-10 and the measured
/// relaxation exponent is reported against the printed half-rate form.
fn criterion_12() -> Criterion {
    let gamma = 2.5e-7;
    let eq = relax_occupation_with(4.3, 4.3, gamma, 3.0 / gamma, 200).expect("equilibrium");
    let drift = (eq.occupation - 4.3).abs();
    let rate = fitted_relaxation_rate(10.0, 2.0, gamma, 2.0 / gamma).expect("fit");
    let full_dev = (rate - gamma).abs() / gamma;
    let half_dev = (rate - 0.5 * gamma).abs() / gamma;
    let pass = drift < 1e-10 && full_dev < 1e-6;
    Criterion {
        id: 12,
        name: "thermal reservoir stationary at equilibrium, relaxation exponent measured",
        pass,
        detail: format!(
            "equilibrium occupation drift = {drift:.3e} (tolerance 1e-10); fitted exponent \
             = {:.6}·γ_m (deviation from full rate {full_dev:.1e}, from the half-rate \
             closed form {half_dev:.3})",
            rate / gamma
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<Criterion> = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
    ];

    let mut failed = Vec::new();
    for c in &criteria {
        println!(
            "[{}] criterion {:>2} — {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
        if !c.pass {
            failed.push(c.id);
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    assert!(
        failed.is_empty(),
        "acceptance criteria not met at their pinned tolerances: {failed:?} \
         (measured distances printed above)"
    );
}

// The partial-transpose symplectic floor: sanity-pin the measure itself so
// a regression in the entanglement arithmetic cannot silently skew every
// criterion above.
#[test]
fn log_negativity_matches_two_mode_squeezing() {
    let r: f64 = 0.7;
    let (ch, sh) = ((2.0 * r).cosh() * 0.5, (2.0 * r).sinh() * 0.5);
    let v = Matrix4::new(
        ch, 0.0, sh, 0.0, //
        0.0, ch, 0.0, -sh, //
        sh, 0.0, ch, 0.0, //
        0.0, -sh, 0.0, ch,
    );
    let e = log_negativity(&v).expect("E_N");
    assert!((e - 2.0 * r).abs() < 1e-10, "E_N = {e}, expected {}", 2.0 * r);
}
