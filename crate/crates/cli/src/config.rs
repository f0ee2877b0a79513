//! Run configuration: JSON config files with CLI-flag overrides (flags win).
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityParams {
    pub alpha: f64,
    pub grid_size: usize,
    pub k_max: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Also run the Ulam oracle at this many cells and report the L1 gap.
    pub ulam_cells: Option<usize>,
    pub ulam_sub_samples: usize,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            grid_size: 1024,
            k_max: 10_000,
            tol: 1e-10,
            max_iter: 2000,
            ulam_cells: None,
            ulam_sub_samples: 128,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailsParams {
    pub alpha: f64,
    pub grid_size: usize,
    pub k_max: usize,
    pub tol: f64,
    pub window_lo: usize,
    pub window_hi: usize,
    pub points: usize,
    pub kac_n_max: usize,
}

impl Default for TailsParams {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            grid_size: 1024,
            k_max: 10_000,
            tol: 1e-10,
            window_lo: 100,
            window_hi: 10_000,
            points: 40,
            kac_n_max: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSpec {
    /// Builtin tag (`x`, `x2`, `sqrt`, `cos2pi`) or an expression in `x`.
    pub expression: String,
    /// Declared Hölder data for expression potentials (ignored for builtins).
    pub eta: f64,
    pub c: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            expression: "x".into(),
            eta: 1.0,
            c: 1.0,
        }
    }
}

impl PotentialSpec {
    pub fn build(&self) -> lsv_core::Result<lsv_core::Potential> {
        match lsv_core::Potential::builtin(&self.expression) {
            Ok(p) => Ok(p),
            Err(_) => lsv_core::Potential::from_expression(&self.expression, self.eta, self.c),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResponseParams {
    /// Geometric grid `1 - 2^{-j}` for j in `j_lo..=j_hi` unless `alphas` is
    /// given explicitly.
    pub j_lo: u32,
    pub j_hi: u32,
    pub alphas: Option<Vec<f64>>,
    pub potential: PotentialSpec,
    pub grid_size: usize,
    pub k_max: usize,
    pub tol: f64,
    pub fit_window_lo: usize,
    pub fit_window_hi: usize,
    pub kac_n_max: usize,
}

impl Default for ResponseParams {
    fn default() -> Self {
        Self {
            j_lo: 4,
            j_hi: 10,
            alphas: None,
            potential: PotentialSpec::default(),
            grid_size: 1024,
            k_max: 10_000,
            tol: 1e-10,
            fit_window_lo: 100,
            fit_window_hi: 10_000,
            kac_n_max: 100_000,
        }
    }
}

impl ResponseParams {
    pub fn response_config(&self) -> lsv_core::ResponseConfig {
        lsv_core::ResponseConfig {
            grid_size: self.grid_size,
            k_max: self.k_max,
            density_tol: self.tol,
            max_iter: 2000,
            fit_window: (self.fit_window_lo, self.fit_window_hi),
            fit_points: 40,
            kac_n_max: self.kac_n_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateMode {
    Birkhoff,
    Occupation,
    Esslim,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateParams {
    pub mode: SimulateMode,
    pub alpha: f64,
    pub n_steps: usize,
    pub n_orbits: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub initial_law: lsv_core::InitialLaw,
    pub potential: PotentialSpec,
    /// Occupation radius (occupation mode).
    pub radius: f64,
    /// Alpha grid and step schedule (esslim mode).
    pub esslim_alphas: Vec<f64>,
    pub esslim_schedule: Vec<usize>,
    /// Analytic target for the esslim table; when absent it is computed from
    /// the response pipeline at defaults.
    pub esslim_target: Option<f64>,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            mode: SimulateMode::Birkhoff,
            alpha: 0.8,
            n_steps: 1_000_000,
            n_orbits: 64,
            burn_in: 1000,
            seed: 1,
            initial_law: lsv_core::InitialLaw::UnitInterval,
            potential: PotentialSpec::default(),
            radius: 0.05,
            esslim_alphas: vec![0.9375, 0.96875, 0.984375],
            esslim_schedule: vec![100_000, 1_000_000],
            esslim_target: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZetaParams {
    pub s: Vec<f64>,
}

impl Default for ZetaParams {
    fn default() -> Self {
        Self { s: vec![2.0] }
    }
}

/// Validated-range checks shared by subcommands.
pub fn check_positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {v}"))
    }
}

pub fn load<T: for<'de> Deserialize<'de> + Default>(path: Option<&str>) -> Result<T, String> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| format!("cannot read config `{p}`: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("bad config `{p}`: {e}"))
        }
    }
}
