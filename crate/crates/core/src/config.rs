//! Problem and scheme description.

use serde::{Deserialize, Serialize};

use crate::control::Forcing;
use crate::error::{Error, Result, Violation};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Backward Euler with geometry and convection lagged to the start of the step.
    #[default]
    SemiImplicitEuler,
    /// Midpoint-rule step, geometry and convection re-coupled by fixed-point iteration.
    CrankNicolsonPicard,
}

/// Initial fluid velocity.
///
/// Profiles given as functions are sampled at the physical positions of the
/// reference nodes. The wall values are zeroed and the particle node is
/// overwritten with `g0` afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Zero,
    Constant { value: f64 },
    /// `amplitude * sin(mode * π * y)`
    Sine { amplitude: f64, mode: f64 },
    /// `amplitude * (1 - y²)`
    Parabola { amplitude: f64 },
    /// Nodal values on the reference grid, `2 n_cells + 1` entries.
    Samples { values: Vec<f64> },
    /// Take the profile from the manufactured solution in `forcing`.
    Manufactured,
}

impl InitialProfile {
    /// Value at physical point `y`. `None` for nodal or manufactured profiles.
    pub fn eval(&self, y: f64) -> Option<f64> {
        match *self {
            InitialProfile::Zero => Some(0.0),
            InitialProfile::Constant { value } => Some(value),
            InitialProfile::Sine { amplitude, mode } => {
                Some(amplitude * (mode * std::f64::consts::PI * y).sin())
            }
            InitialProfile::Parabola { amplitude } => Some(amplitude * (1.0 - y * y)),
            InitialProfile::Samples { .. } | InitialProfile::Manufactured => None,
        }
    }
}

/// Full description of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Feedback gain.
    #[serde(rename = "K")]
    pub k: f64,
    /// Target position.
    pub h1: f64,
    pub h0: f64,
    pub g0: f64,
    pub v0: InitialProfile,
    /// Cells on each side of the particle.
    pub n_cells: usize,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_max")]
    pub picard_max: usize,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub forcing: Option<Forcing>,
}

fn default_picard_tol() -> f64 {
    1e-12
}

fn default_picard_max() -> usize {
    50
}

impl SimConfig {
    /// A config with the given gain, positions and velocities, using the
    /// desk-scale defaults `n_cells = 64`, `dt = 1e-3`, `t_final = 1`.
    pub fn new(k: f64, h1: f64, h0: f64, g0: f64, v0: InitialProfile) -> Self {
        Self {
            k,
            h1,
            h0,
            g0,
            v0,
            n_cells: 64,
            dt: 1e-3,
            t_final: 1.0,
            picard_tol: default_picard_tol(),
            picard_max: default_picard_max(),
            scheme: Scheme::default(),
            forcing: None,
        }
    }

    pub fn with_grid(mut self, n_cells: usize, dt: f64, t_final: f64) -> Self {
        self.n_cells = n_cells;
        self.dt = dt;
        self.t_final = t_final;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }
}

/// A config that has passed [`validate_config`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    cfg: SimConfig,
    steps: usize,
}

impl ValidatedConfig {
    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Number of time steps; the run ends at `steps * dt`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn into_inner(self) -> SimConfig {
        self.cfg
    }
}

impl std::ops::Deref for ValidatedConfig {
    type Target = SimConfig;

    fn deref(&self) -> &SimConfig {
        &self.cfg
    }
}

fn strictly_inside(x: f64) -> bool {
    x.is_finite() && x > -1.0 && x < 1.0
}

/// Checks every config invariant, collecting all violations.
pub fn validate_config(cfg: SimConfig) -> Result<ValidatedConfig> {
    let mut errs = Vec::new();

    if !(cfg.k.is_finite() && cfg.k >= 0.0) {
        errs.push(Violation::new("K", "K ≥ 0 required"));
    }
    if !strictly_inside(cfg.h0) {
        errs.push(Violation::new("h0", "h0 must lie strictly inside (−1,1)"));
    }
    if !strictly_inside(cfg.h1) {
        errs.push(Violation::new("h1", "h1 must lie strictly inside (−1,1)"));
    }
    if !cfg.g0.is_finite() {
        errs.push(Violation::new("g0", "g0 must be finite"));
    }
    if cfg.n_cells < 4 {
        errs.push(Violation::new("n_cells", "n_cells ≥ 4 required"));
    }
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        errs.push(Violation::new("dt", "dt > 0 required"));
    }
    if !(cfg.t_final.is_finite() && cfg.t_final > 0.0) {
        errs.push(Violation::new("t_final", "t_final > 0 required"));
    } else if cfg.dt > 0.0 && cfg.t_final < cfg.dt {
        errs.push(Violation::new("t_final", "t_final ≥ dt required"));
    }
    if !(cfg.picard_tol.is_finite() && cfg.picard_tol > 0.0) {
        errs.push(Violation::new("picard_tol", "picard_tol > 0 required"));
    }
    if cfg.picard_max < 1 {
        errs.push(Violation::new("picard_max", "picard_max ≥ 1 required"));
    }

    match &cfg.v0 {
        InitialProfile::Samples { values } => {
            if values.len() != 2 * cfg.n_cells + 1 {
                errs.push(Violation::new(
                    "v0",
                    format!(
                        "expected {} nodal samples, got {}",
                        2 * cfg.n_cells + 1,
                        values.len()
                    ),
                ));
            }
        }
        InitialProfile::Manufactured if cfg.forcing.is_none() => {
            errs.push(Violation::new(
                "v0",
                "manufactured initial profile requires a forcing",
            ));
        }
        InitialProfile::Sine { amplitude, mode } if !(amplitude.is_finite() && mode.is_finite()) => {
            errs.push(Violation::new("v0", "sine parameters must be finite"));
        }
        _ => {}
    }

    if let Some(forcing) = &cfg.forcing {
        if let Err(msg) = forcing.validate() {
            errs.push(Violation::new("forcing", msg));
        } else {
            let (h_star, g_star) = (forcing.position(0.0), forcing.velocity(0.0));
            if (cfg.h0 - h_star).abs() > 1e-12 || (cfg.g0 - g_star).abs() > 1e-12 {
                errs.push(Violation::new(
                    "forcing",
                    format!("h0, g0 must match the manufactured solution at t = 0 ({h_star}, {g_star})"),
                ));
            }
            if cfg.v0 != InitialProfile::Manufactured {
                errs.push(Violation::new(
                    "v0",
                    "a forced run must start from the manufactured profile",
                ));
            }
        }
    }

    if !errs.is_empty() {
        return Err(Error::InvalidConfig(errs));
    }
    let steps = ((cfg.t_final / cfg.dt).round() as usize).max(1);
    Ok(ValidatedConfig { cfg, steps })
}
