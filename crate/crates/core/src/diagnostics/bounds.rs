//! Collision corridor and the constants of the decay estimates.

use crate::config::ValidatedConfig;
use crate::error::{Error, Result};
use crate::state::{initialize_state, Trajectory};

use super::functionals::fluid_l2_squared;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilityConstants {
    /// `‖v0‖² + g0² + K (h1 − h0)²`
    pub q: f64,
    /// `10 (Q + √Q)`
    pub c: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Decay rate of `V_ε`, and of the energy envelope.
    pub eta: f64,
}

/// Initial energy `Q` of a configuration, measured on the initialized state.
pub fn initial_energy(cfg: &ValidatedConfig) -> Result<f64> {
    let s = initialize_state(cfg)?;
    let d = cfg.h1 - cfg.h0;
    Ok(fluid_l2_squared(&s) + s.g * s.g + cfg.k * d * d)
}

/// `ε` and `η` for gain `k` and corridor half-width `alpha`.
pub fn eps_eta(k: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, 1]")));
    }
    if k < 0.0 || !k.is_finite() {
        return Err(Error::Domain(format!("K = {k} must be finite and non-negative")));
    }
    if k == 0.0 {
        return Ok((0.0, 0.25));
    }
    let base = 34.0 + 2.0 / (k * alpha * alpha);
    let eps = 1.0 / (16.0 * base);
    let eta = 0.25 * (1.0 / base).min(3.0 * k * eps / 4.0);
    Ok((eps, eta))
}

pub fn stability_constants(cfg: &ValidatedConfig, alpha: f64) -> Result<StabilityConstants> {
    let (eps, eta) = eps_eta(cfg.k, alpha)?;
    let q = initial_energy(cfg)?;
    Ok(StabilityConstants {
        q,
        c: corridor_constant(q),
        alpha,
        eps,
        eta,
    })
}

pub fn corridor_constant(q: f64) -> f64 {
    10.0 * (q + q.sqrt())
}

/// The corridor `[-1 + κ1(t), 1 − κ2(t)]` of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corridor {
    pub h0: f64,
    pub k: f64,
    pub c: f64,
}

impl Corridor {
    pub fn new(h0: f64, k: f64, q: f64) -> Self {
        Self {
            h0,
            k,
            c: corridor_constant(q),
        }
    }

    pub fn from_config(cfg: &ValidatedConfig) -> Result<Self> {
        Ok(Self::new(cfg.h0, cfg.k, initial_energy(cfg)?))
    }

    pub fn kappas(&self, t: f64) -> (f64, f64) {
        let growth = (self.c + 2.0 * self.k * t).exp();
        let (jl, jr) = (1.0 + self.h0, 1.0 - self.h0);
        let k1 = 2.0 / (1.0 + (jr / jl).max(2.0) * growth);
        let k2 = 2.0 / (1.0 + (jl / jr).max(2.0) * growth);
        (k1, k2)
    }

    pub fn contains(&self, t: f64, h: f64) -> bool {
        let (k1, k2) = self.kappas(t);
        -1.0 + k1 <= h && h <= 1.0 - k2
    }
}

/// `(κ1(t), κ2(t))` for a configuration.
pub fn kappa_bounds(cfg: &ValidatedConfig, t: f64) -> Result<(f64, f64)> {
    Ok(Corridor::from_config(cfg)?.kappas(t))
}

/// Smallest distance from the particle to a wall along the trajectory.
pub fn empirical_alpha(traj: &Trajectory) -> f64 {
    traj.states
        .iter()
        .map(|s| (1.0 - s.h).min(1.0 + s.h))
        .fold(1.0, f64::min)
}
