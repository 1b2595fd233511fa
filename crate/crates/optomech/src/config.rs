//! Run configuration: flat key-value files, CLI overrides, and the built-in
//! table of figure presets with caption-pinned parameters.
//!
//! All rates are expressed relative to the cavity linewidth (κ ≡ 1): drive
//! and coupling strengths as `·_over_kappa`, detunings in units of the
//! mechanical frequency, times as `κ·t`. A configuration resolves into the
//! [`SystemParams`]/[`DriveProfile`] pair consumed by the physics modules.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::entanglement::{DEFAULT_TRACE_SAMPLES, ESD_ZERO, PLATEAU_WINDOW_FRACTION};
use crate::error::Error;
use crate::model::{DriveProfile, SystemParams};
use crate::noise::{DEFAULT_V2_CONVERGENCE_TOL, DEFAULT_V2_GRID_DT};
use crate::propagator::DEFAULT_K_GRID_DT;

/// Which covariance pieces a run evolves, or which comparison it performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    /// Coherent part plus accumulated noise covariance.
    Full,
    /// Coherent part only (noise channels silenced).
    NoiseFree,
    /// Steady state of the linearized-fluctuation model.
    Baseline,
    /// Full evolution at the window end side by side with the baseline.
    Compare,
}

impl RunMode {
    /// Kebab-case name as written in config files and CLI flags.
    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::NoiseFree => "noise-free",
            Self::Baseline => "baseline",
            Self::Compare => "compare",
        }
    }
}

impl std::str::FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full" => Ok(Self::Full),
            "noise-free" => Ok(Self::NoiseFree),
            "baseline" => Ok(Self::Baseline),
            "compare" => Ok(Self::Compare),
            other => Err(Error::Config {
                field: "mode".into(),
                reason: format!(
                    "unknown mode `{other}` (expected full, noise-free, baseline, or compare)"
                ),
            }),
        }
    }
}

/// Drive envelope shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveKind {
    /// Constant-amplitude drive switched on at t = 0.
    Cw,
    /// Gaussian pulse `E·exp(−(Δω·t)²)` centered on the window start.
    Pulse,
}

/// Axis swept by the `sweep` subcommand (and grid-style figures).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// No sweep: a single time trace (or single baseline report).
    None,
    /// Detuning of the drive, in units of the mechanical frequency.
    Detuning,
    /// Drive amplitude over κ.
    Intensity,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "none" => Ok(Self::None),
            "detuning" => Ok(Self::Detuning),
            "intensity" => Ok(Self::Intensity),
            other => Err(Error::Config {
                field: "sweep".into(),
                reason: format!("unknown axis `{other}` (expected detuning or intensity)"),
            }),
        }
    }
}

/// Complete description of one invocation: physics parameters, drive,
/// window, sweep axis, curve families, output, and numerical knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Evolution / comparison mode.
    pub mode: RunMode,
    /// Optomechanical coupling over κ.
    pub g_over_kappa: f64,
    /// Mechanical frequency over κ.
    pub omega_m_over_kappa: f64,
    /// Mechanical quality ratio ω_m/γ_m.
    pub omega_m_over_gamma_m: f64,
    /// Initial mechanical occupation.
    pub n_m: f64,
    /// Mechanical reservoir occupation; defaults to `n_m` when absent.
    pub n_th: Option<f64>,
    /// Drive envelope shape.
    pub drive: DriveKind,
    /// Drive amplitude over κ.
    pub e_over_kappa: f64,
    /// Gaussian pulse bandwidth over κ (required when `drive = "pulse"`).
    pub pulse_bandwidth_over_kappa: Option<f64>,
    /// Drive detuning in units of the mechanical frequency.
    pub delta0_over_omega_m: f64,
    /// Per-curve detunings (units of ω_m); overrides the scalar detuning.
    pub curve_deltas_over_omega_m: Option<Vec<f64>>,
    /// Per-curve evolution modes (for mixed families on one figure).
    pub curve_modes: Option<Vec<RunMode>>,
    /// Per-curve initial mechanical occupations.
    pub curve_occupations: Option<Vec<f64>>,
    /// Per-curve labels used in file names and summaries.
    pub curve_labels: Option<Vec<String>>,
    /// Window end in units of 1/κ.
    pub t_max_kappa: f64,
    /// Uniform sample count over the window (endpoints included).
    pub samples: usize,
    /// Sweep axis.
    pub sweep: SweepAxis,
    /// Sweep start (detuning: units of ω_m; intensity: E/κ).
    pub sweep_min: f64,
    /// Sweep end.
    pub sweep_max: f64,
    /// Number of sweep points (≥ 1; endpoints included when ≥ 2).
    pub sweep_steps: usize,
    /// Logarithmic sweep spacing (requires a positive range).
    pub sweep_log: bool,
    /// Quadrature grid spacing κ·dτ for the noise covariance.
    pub grid_dt_kappa: f64,
    /// Integration grid spacing κ·dτ for the propagator generator.
    pub k_grid_dt_kappa: f64,
    /// Relative tolerance for the grid-halving convergence check.
    pub convergence_tol: f64,
    /// Output directory for CSV files and the manifest.
    pub out_dir: String,
    /// Seed for the Monte Carlo checks of the `validate` subcommand.
    pub seed: u64,
    /// Threshold below which the entanglement is considered dead.
    pub esd_zero: f64,
    /// Trailing fraction of the window scanned for the steady plateau.
    pub plateau_window_fraction: f64,
    /// Allowed relative drift over the plateau window.
    pub plateau_drift_limit: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: RunMode::Full,
            g_over_kappa: 1e-6,
            omega_m_over_kappa: 2.5,
            omega_m_over_gamma_m: 1e7,
            n_m: 0.0,
            n_th: None,
            drive: DriveKind::Cw,
            e_over_kappa: 3e5,
            pulse_bandwidth_over_kappa: None,
            delta0_over_omega_m: -1.0,
            curve_deltas_over_omega_m: None,
            curve_modes: None,
            curve_occupations: None,
            curve_labels: None,
            t_max_kappa: 15.0,
            samples: DEFAULT_TRACE_SAMPLES,
            sweep: SweepAxis::None,
            sweep_min: 0.0,
            sweep_max: 0.0,
            sweep_steps: 1,
            sweep_log: false,
            grid_dt_kappa: DEFAULT_V2_GRID_DT,
            k_grid_dt_kappa: DEFAULT_K_GRID_DT,
            convergence_tol: DEFAULT_V2_CONVERGENCE_TOL,
            out_dir: "out".into(),
            seed: 7,
            esd_zero: ESD_ZERO,
            plateau_window_fraction: PLATEAU_WINDOW_FRACTION,
            plateau_drift_limit: 0.01,
        }
    }
}

/// Flag-level overrides applied on top of a loaded configuration.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    /// `--mode`.
    pub mode: Option<RunMode>,
    /// `--out`.
    pub out_dir: Option<String>,
    /// `--grid-dt`.
    pub grid_dt: Option<f64>,
    /// `--samples`.
    pub samples: Option<usize>,
    /// `--seed`.
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Parse a flat key-value configuration document.
    pub fn from_toml_str(text: &str) -> Result<Self, Error> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config {
            field: "(document)".into(),
            reason: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Load and validate a configuration file.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml_str(&text)
    }

    /// Apply command-line flag overrides (flags beat file values).
    pub fn apply_overrides(&mut self, overrides: &CliOverrides) {
        if let Some(mode) = overrides.mode {
            self.mode = mode;
        }
        if let Some(out) = &overrides.out_dir {
            self.out_dir = out.clone();
        }
        if let Some(dt) = overrides.grid_dt {
            self.grid_dt_kappa = dt;
        }
        if let Some(samples) = overrides.samples {
            self.samples = samples;
        }
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
    }

    /// Field-by-field validation; errors name the offending key.
    pub fn validate(&self) -> Result<(), Error> {
        let positive: [(&'static str, f64); 6] = [
            ("g_over_kappa", self.g_over_kappa),
            ("omega_m_over_kappa", self.omega_m_over_kappa),
            ("omega_m_over_gamma_m", self.omega_m_over_gamma_m),
            ("t_max_kappa", self.t_max_kappa),
            ("grid_dt_kappa", self.grid_dt_kappa),
            ("k_grid_dt_kappa", self.k_grid_dt_kappa),
        ];
        for (field, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        let nonnegative: [(&'static str, f64); 3] = [
            ("e_over_kappa", self.e_over_kappa),
            ("n_m", self.n_m),
            ("n_th", self.n_th.unwrap_or(self.n_m)),
        ];
        for (field, value) in nonnegative {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and ≥ 0, got {value}"),
                });
            }
        }
        if !self.delta0_over_omega_m.is_finite() {
            return Err(Error::InvalidParameter {
                field: "delta0_over_omega_m",
                reason: "must be finite".into(),
            });
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: format!("need at least 2 samples, got {}", self.samples),
            });
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::InvalidParameter {
                field: "convergence_tol",
                reason: "must be finite and > 0".into(),
            });
        }
        if !(self.esd_zero.is_finite() && self.esd_zero > 0.0) {
            return Err(Error::InvalidParameter {
                field: "esd_zero",
                reason: "must be finite and > 0".into(),
            });
        }
        if !(self.plateau_window_fraction > 0.0 && self.plateau_window_fraction < 1.0) {
            return Err(Error::InvalidParameter {
                field: "plateau_window_fraction",
                reason: "must lie strictly between 0 and 1".into(),
            });
        }
        if !(self.plateau_drift_limit.is_finite() && self.plateau_drift_limit > 0.0) {
            return Err(Error::InvalidParameter {
                field: "plateau_drift_limit",
                reason: "must be finite and > 0".into(),
            });
        }

        match self.drive {
            DriveKind::Pulse => match self.pulse_bandwidth_over_kappa {
                Some(b) if b.is_finite() && b > 0.0 => {}
                Some(b) => {
                    return Err(Error::InvalidParameter {
                        field: "pulse_bandwidth_over_kappa",
                        reason: format!("must be finite and > 0, got {b}"),
                    });
                }
                None => {
                    return Err(Error::InvalidParameter {
                        field: "pulse_bandwidth_over_kappa",
                        reason: "required when drive = \"pulse\"".into(),
                    });
                }
            },
            DriveKind::Cw => {}
        }
        if matches!(self.mode, RunMode::Baseline | RunMode::Compare)
            && self.drive == DriveKind::Pulse
        {
            return Err(Error::InvalidParameter {
                field: "drive",
                reason: "baseline/compare modes need a CW drive (no steady state under a pulse)"
                    .into(),
            });
        }

        if self.sweep != SweepAxis::None {
            if self.sweep_steps == 0 {
                return Err(Error::InvalidParameter {
                    field: "sweep_steps",
                    reason: "must be ≥ 1".into(),
                });
            }
            if !(self.sweep_min.is_finite() && self.sweep_max.is_finite()) {
                return Err(Error::InvalidParameter {
                    field: "sweep_min",
                    reason: "sweep range must be finite".into(),
                });
            }
            if self.sweep_steps > 1 && self.sweep_min >= self.sweep_max {
                return Err(Error::InvalidParameter {
                    field: "sweep_min",
                    reason: format!(
                        "range [{}, {}] is empty",
                        self.sweep_min, self.sweep_max
                    ),
                });
            }
            if self.sweep_log && self.sweep_min <= 0.0 {
                return Err(Error::InvalidParameter {
                    field: "sweep_log",
                    reason: "log spacing needs sweep_min > 0".into(),
                });
            }
            if self.sweep == SweepAxis::Intensity && self.sweep_min < 0.0 {
                return Err(Error::InvalidParameter {
                    field: "sweep_min",
                    reason: "drive amplitudes must be ≥ 0".into(),
                });
            }
        }

        let n_curves = self.curve_count();
        for (field, len) in [
            (
                "curve_deltas_over_omega_m",
                self.curve_deltas_over_omega_m.as_ref().map(Vec::len),
            ),
            ("curve_modes", self.curve_modes.as_ref().map(Vec::len)),
            (
                "curve_occupations",
                self.curve_occupations.as_ref().map(Vec::len),
            ),
            ("curve_labels", self.curve_labels.as_ref().map(Vec::len)),
        ] {
            match len {
                Some(0) => {
                    return Err(Error::InvalidParameter {
                        field,
                        reason: "curve list must not be empty".into(),
                    });
                }
                Some(l) if l != n_curves => {
                    return Err(Error::InvalidParameter {
                        field,
                        reason: format!("curve lists disagree in length ({l} vs {n_curves})"),
                    });
                }
                _ => {}
            }
        }
        if self.sweep == SweepAxis::Detuning && self.curve_deltas_over_omega_m.is_some() {
            return Err(Error::InvalidParameter {
                field: "curve_deltas_over_omega_m",
                reason: "detuning is already the sweep axis".into(),
            });
        }
        if let Some(modes) = &self.curve_modes {
            if modes
                .iter()
                .any(|m| matches!(m, RunMode::Baseline | RunMode::Compare))
            {
                return Err(Error::InvalidParameter {
                    field: "curve_modes",
                    reason: "per-curve modes must be full or noise-free".into(),
                });
            }
        }
        if let Some(occs) = &self.curve_occupations {
            if let Some(&bad) = occs.iter().find(|o| !o.is_finite() || **o < 0.0) {
                return Err(Error::InvalidParameter {
                    field: "curve_occupations",
                    reason: format!("occupations must be finite and ≥ 0, got {bad}"),
                });
            }
        }
        Ok(())
    }

    /// Number of curves in the family described by the curve lists.
    pub fn curve_count(&self) -> usize {
        [
            self.curve_deltas_over_omega_m.as_ref().map(Vec::len),
            self.curve_modes.as_ref().map(Vec::len),
            self.curve_occupations.as_ref().map(Vec::len),
            self.curve_labels.as_ref().map(Vec::len),
        ]
        .into_iter()
        .flatten()
        .max()
        .unwrap_or(1)
    }

    /// Resolve the physics parameters for one curve, with optional
    /// sweep-point overrides for the detuning (units of ω_m).
    pub fn system_params(
        &self,
        curve: usize,
        delta_override: Option<f64>,
    ) -> Result<SystemParams, Error> {
        let omega_m = self.omega_m_over_kappa;
        let gamma_m = omega_m / self.omega_m_over_gamma_m;
        let delta_units = delta_override.unwrap_or_else(|| {
            self.curve_deltas_over_omega_m
                .as_ref()
                .and_then(|d| d.get(curve).copied())
                .unwrap_or(self.delta0_over_omega_m)
        });
        let n_m = self
            .curve_occupations
            .as_ref()
            .and_then(|o| o.get(curve).copied())
            .unwrap_or(self.n_m);
        let mut params = SystemParams::cavity_units(
            self.g_over_kappa,
            omega_m,
            gamma_m,
            delta_units * omega_m,
            n_m,
        );
        if let Some(n_th) = self.n_th {
            params.n_th = n_th;
        }
        params.validate()?;
        Ok(params)
    }

    /// Resolve the drive profile, with an optional amplitude override
    /// (units of κ) for intensity sweeps.
    pub fn drive_profile(&self, e_override: Option<f64>) -> Result<DriveProfile, Error> {
        let e = e_override.unwrap_or(self.e_over_kappa);
        let drive = match self.drive {
            DriveKind::Cw => DriveProfile::Cw { e },
            DriveKind::Pulse => DriveProfile::GaussianPulse {
                e,
                bandwidth: self.pulse_bandwidth_over_kappa.unwrap_or(0.0),
            },
        };
        drive.validate()?;
        Ok(drive)
    }

    /// Evolution mode for one curve (per-curve override, else the run mode;
    /// comparison runs evolve their trace in full mode).
    pub fn curve_mode(&self, curve: usize) -> RunMode {
        self.curve_modes
            .as_ref()
            .and_then(|m| m.get(curve).copied())
            .unwrap_or(match self.mode {
                RunMode::Compare => RunMode::Full,
                other => other,
            })
    }

    /// Label for one curve: explicit label, else derived from what varies.
    pub fn curve_label(&self, curve: usize) -> String {
        if let Some(labels) = &self.curve_labels {
            if let Some(l) = labels.get(curve) {
                return l.clone();
            }
        }
        let mut parts = Vec::new();
        if let Some(deltas) = &self.curve_deltas_over_omega_m {
            parts.push(format!("delta_{}", compact_number(deltas[curve])));
        }
        if let Some(modes) = &self.curve_modes {
            parts.push(modes[curve].name().replace('-', "_"));
        }
        if let Some(occs) = &self.curve_occupations {
            parts.push(format!("nm_{}", compact_number(occs[curve])));
        }
        if parts.is_empty() {
            parts.push(format!("curve_{curve}"));
        }
        parts.join("_")
    }

    /// Sweep-axis values in ascending order (log-spaced when requested).
    pub fn sweep_values(&self) -> Vec<f64> {
        if self.sweep == SweepAxis::None {
            return Vec::new();
        }
        if self.sweep_steps == 1 {
            return vec![self.sweep_min];
        }
        let n = self.sweep_steps;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if self.sweep_log {
                    self.sweep_min * (self.sweep_max / self.sweep_min).powf(f)
                } else {
                    self.sweep_min + f * (self.sweep_max - self.sweep_min)
                }
            })
            .collect()
    }

    /// Uniform sample times over the window, endpoints included.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n)
            .map(|i| self.t_max_kappa * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// File-name-friendly rendering of a numeric parameter value.
fn compact_number(x: f64) -> String {
    let s = format!("{x}");
    s.replace('-', "m").replace('.', "p")
}

/// Names of all built-in figure presets, in publication order.
pub const PRESET_NAMES: [&str; 16] = [
    "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig4d", "fig5a", "fig5b",
    "fig6", "fig7a", "fig7b", "fig8", "figC1a", "figC1b",
];

/// Configuration text of every checked-in preset, compiled into the binary
/// so that the shipped files are the single source of truth.
pub const PRESET_SOURCES: [(&str, &str); 16] = [
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig4a", include_str!("../presets/fig4a.toml")),
    ("fig4b", include_str!("../presets/fig4b.toml")),
    ("fig4c", include_str!("../presets/fig4c.toml")),
    ("fig4d", include_str!("../presets/fig4d.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7a", include_str!("../presets/fig7a.toml")),
    ("fig7b", include_str!("../presets/fig7b.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("figC1a", include_str!("../presets/figC1a.toml")),
    ("figC1b", include_str!("../presets/figC1b.toml")),
];

/// Expanded configuration for a named figure preset.
pub fn preset(name: &str) -> Result<RunConfig, Error> {
    let source = PRESET_SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::Config {
            field: "figure".into(),
            reason: format!(
                "unknown figure preset `{name}` (expected one of {})",
                PRESET_NAMES.join(", ")
            ),
        })?;
    RunConfig::from_toml_str(source)
}
