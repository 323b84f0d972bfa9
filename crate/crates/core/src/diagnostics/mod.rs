//! Functionals, bounds and decay checks evaluated on trajectories.

mod bounds;
mod decay;
mod functionals;
mod weak;

pub use bounds::{
    corridor_constant, eps_eta, empirical_alpha, initial_energy, kappa_bounds, stability_constants, Corridor,
    StabilityConstants,
};
pub use decay::{decay_fit, h_star_estimate, DecayFit, Envelope, HStarReport, ENVELOPE_SLACK};
pub use functionals::{
    energy_split, compute_a1_a2, compute_dissipation, compute_energy, compute_jump, compute_p,
    fluid_l2_squared, lyapunov_v, max_lyapunov_eps, EnergySplit,
};
pub use weak::{max_weak_residual, standard_family, weak_residual, Profile, TestFunction, TimeFactor};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ValidatedConfig;
use crate::error::{Error, Result};
use crate::state::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub E: f64,
    pub P: f64,
    pub A1: f64,
    pub A2: f64,
    pub V_eps: f64,
    pub jump: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub u: f64,
    pub W1: f64,
    pub W2: f64,
    pub D: f64,
}

/// `E(t) + 2∫₀ᵗ∫ v_y² − E(0)` at every sample, and its largest magnitude.
pub fn energy_identity_residual(traj: &Trajectory, k: f64, h1: f64) -> (Vec<f64>, f64) {
    let e0 = compute_energy(traj.first(), k, h1);
    let series: Vec<f64> = traj
        .states
        .iter()
        .zip(&traj.dissipation_cum)
        .map(|(s, d)| compute_energy(s, k, h1) + d - e0)
        .collect();
    let max = series.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    (series, max)
}

/// Per-sample diagnostics. `eps` weights the Lyapunov perturbation and must
/// be admissible for `cfg.k`.
pub fn evaluate_trajectory(traj: &Trajectory, cfg: &ValidatedConfig, eps: f64) -> Result<Vec<DiagnosticsRecord>> {
    let corridor = Corridor::from_config(cfg)?;
    let (k, h1) = (cfg.k, cfg.h1);
    lyapunov_v(traj.first(), eps, k, h1)?;
    traj.states
        .par_iter()
        .zip(traj.controls.par_iter())
        .map(|(s, &u)| {
            let (a1, a2) = compute_a1_a2(s);
            let (kappa1, kappa2) = corridor.kappas(s.t);
            let f = energy_split(s, k, h1);
            let rec = DiagnosticsRecord {
                t: s.t,
                E: compute_energy(s, k, h1),
                P: compute_p(s),
                A1: a1,
                A2: a2,
                V_eps: lyapunov_v(s, eps, k, h1)?,
                jump: compute_jump(s),
                kappa1,
                kappa2,
                u,
                W1: f.w1,
                W2: f.w2,
                D: f.d,
            };
            let finite = [rec.E, rec.P, rec.A1, rec.A2, rec.V_eps, rec.jump, rec.D]
                .iter()
                .all(|x| x.is_finite());
            if finite {
                Ok(rec)
            } else {
                Err(Error::Quadrature { t: s.t })
            }
        })
        .collect()
}

/// `ε` used for a trajectory: the constructed value at the empirical
/// corridor half-width, or 0 without feedback.
pub fn trajectory_constants(traj: &Trajectory, cfg: &ValidatedConfig) -> Result<StabilityConstants> {
    stability_constants(cfg, empirical_alpha(traj))
}
