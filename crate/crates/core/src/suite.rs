//! The acceptance suite: ten pass/fail checks with fixed scenarios and
//! tolerances, shared by the test harness and the `verify` command.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{validate_config, InitialProfile, Scheme, SimConfig, ValidatedConfig};
use crate::control::{Bubble, Forcing};
use crate::diagnostics::{
    compute_energy, decay_fit, empirical_alpha, energy_identity_residual, evaluate_trajectory, h_star_estimate,
    max_weak_residual, stability_constants, standard_family, DiagnosticsRecord, Envelope, StabilityConstants,
};
use crate::discretization::run_simulation;
use crate::error::Result;
use crate::state::{initialize_state, Trajectory};
use crate::verification::{convergence_order, mms_study, run_study, with_resolution, Refinement};

/// Base resolution of every suite scenario.
pub const BASE_CELLS: usize = 64;
pub const BASE_DT: f64 = 1e-3;
pub const BASE_T_FINAL: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name,
            passed,
            detail,
        }
    }

    fn errored(id: u8, name: &'static str, err: crate::Error) -> Self {
        Self::new(id, name, false, format!("error: {err}"))
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] criterion {:>2} ({}): {}", self.id, self.name, self.detail)
    }
}

/// A named scenario of the suite.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub cfg: ValidatedConfig,
}

fn sine_data(k: f64, h1: f64, h0: f64, g0: f64) -> SimConfig {
    SimConfig::new(k, h1, h0, g0, InitialProfile::Sine { amplitude: 1.0, mode: 1.0 })
        .with_grid(BASE_CELLS, BASE_DT, BASE_T_FINAL)
}

fn validated(cfg: SimConfig) -> ValidatedConfig {
    validate_config(cfg).expect("suite scenarios are valid")
}

/// `v0 = sin(πy)`, `g0 = 0.5`, `h0 = 0.2`, `h1 = 0`.
pub fn base_scenario(k: f64) -> ValidatedConfig {
    validated(sine_data(k, 0.0, 0.2, 0.5))
}

/// Every unforced scenario of the suite.
pub fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario { name: "base K=0", cfg: base_scenario(0.0) },
        Scenario { name: "base K=1", cfg: base_scenario(1.0) },
        Scenario { name: "near wall K=0", cfg: validated(sine_data(0.0, 0.0, 0.7, 1.0)) },
        Scenario { name: "near wall K=1", cfg: validated(sine_data(1.0, 0.0, 0.7, 1.0)) },
        Scenario { name: "cross K=2", cfg: validated(sine_data(2.0, -0.5, 0.7, 1.0)) },
        Scenario { name: "cross K=5", cfg: validated(sine_data(5.0, 0.5, -0.6, -1.5)) },
    ]
}

/// A completed scenario run with its diagnostics.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub name: &'static str,
    pub cfg: ValidatedConfig,
    pub traj: Trajectory,
    pub constants: StabilityConstants,
    pub records: Vec<DiagnosticsRecord>,
}

pub fn evaluate(name: &'static str, cfg: &ValidatedConfig) -> Result<Evaluated> {
    let traj = run_simulation(cfg)?;
    let constants = stability_constants(cfg, empirical_alpha(&traj))?;
    let records = evaluate_trajectory(&traj, cfg, constants.eps)?;
    Ok(Evaluated {
        name,
        cfg: cfg.clone(),
        traj,
        constants,
        records,
    })
}

fn evaluate_all(list: &[Scenario]) -> Result<Vec<Evaluated>> {
    list.par_iter().map(|s| evaluate(s.name, &s.cfg)).collect()
}

fn times_and_energy(records: &[DiagnosticsRecord]) -> (Vec<f64>, Vec<f64>) {
    records.iter().map(|r| (r.t, r.E)).unzip()
}

const ENERGY_IDENTITY: &str = "energy identity";

/// Energy identity at `dt = 1e-4`, and its first-order decrease in `dt`.
pub fn criterion_1() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for k in [0.0, 1.0] {
            let cfg = base_scenario(k);
            let study = run_study(Refinement::Temporal.levels(BASE_CELLS, 4e-4, 3), |n, dt| {
                let traj = run_simulation(&with_resolution(&cfg, n, dt)?)?;
                let e0 = compute_energy(traj.first(), k, cfg.h1);
                Ok(energy_identity_residual(&traj, k, cfg.h1).1 / e0)
            })?;
            let finest = *study.errors.last().expect("three levels");
            let order = convergence_order(&study)?;
            ok &= finest <= 1e-3 && order >= 0.9;
            detail.push(format!(
                "K={k}: max|r|/E0 = {finest:.3e} at dt=1e-4 (tol 1e-3), order {order:.3} (min 0.9)"
            ));
        }
        Ok((ok, detail.join("; ")))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(1, ENERGY_IDENTITY, ok, d),
        Err(e) => CriterionReport::errored(1, ENERGY_IDENTITY, e),
    }
}

const ZERO_GAIN_DECAY: &str = "K = 0 energy decay";

/// `E(t) ≤ E(0) e^{−t/4}` without feedback, and a fitted rate ≥ 1/4.
pub fn criterion_2() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let ev = evaluate("base K=0", &base_scenario(0.0))?;
        let (t, e) = times_and_energy(&ev.records);
        let fit = decay_fit(&t, &e, Some(Envelope::new(e[0], 0.25)))?;
        Ok((
            fit.violations == 0 && fit.rate >= 0.25,
            format!(
                "{} envelope violations over {} samples, fitted rate {:.4} (min 0.25)",
                fit.violations,
                t.len(),
                fit.rate
            ),
        ))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(2, ZERO_GAIN_DECAY, ok, d),
        Err(e) => CriterionReport::errored(2, ZERO_GAIN_DECAY, e),
    }
}

const PARTICLE_LIMIT: &str = "K = 0 particle limit";

/// `|h(t) − h(t_final)|² ≤ e^{−t/4}(‖v0‖² + g0²)` on `[0, t_final − 10]`.
pub fn criterion_3() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let traj = run_simulation(&base_scenario(0.0))?;
        let r = h_star_estimate(&traj, 0.0)?;
        Ok((
            r.violations == 0,
            format!(
                "h* = {:.6}, {} violations on [0, {}]; separately, the (sqrt(E0)/8) e^(-t/8) bound has {} violations and 8 sqrt(E0) e^(-t/8) has {}",
                r.h_star, r.violations, r.checked_until, r.display_violations, r.corrected_display_violations
            ),
        ))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(3, PARTICLE_LIMIT, ok, d),
        Err(e) => CriterionReport::errored(3, PARTICLE_LIMIT, e),
    }
}

const FEEDBACK_DECAY: &str = "K > 0 energy decay";

/// `E(t) ≤ 16 E(0) e^{−η t}` with `K = 1`, and `|h(t_final) − h1| ≤ 1e-3`.
pub fn criterion_4() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let ev = evaluate("base K=1", &base_scenario(1.0))?;
        let (t, e) = times_and_energy(&ev.records);
        let eta = ev.constants.eta;
        let fit = decay_fit(&t, &e, Some(Envelope::new(16.0 * e[0], eta)))?;
        let gap = (ev.traj.last().h - ev.cfg.h1).abs();
        Ok((
            fit.violations == 0 && gap <= 1e-3,
            format!(
                "alpha = {:.4}, eta = {:.4e}, {} envelope violations, empirical rate {:.4}, |h(T) - h1| = {gap:.3e} (tol 1e-3)",
                ev.constants.alpha, eta, fit.violations, fit.rate
            ),
        ))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(4, FEEDBACK_DECAY, ok, d),
        Err(e) => CriterionReport::errored(4, FEEDBACK_DECAY, e),
    }
}

const CORRIDOR: &str = "collision corridor";

/// `−1 + κ1(t) ≤ h(t) ≤ 1 − κ2(t)` along every scenario, none aborting.
pub fn criterion_5() -> CriterionReport {
    let list = scenarios();
    let outcomes: Vec<(String, Result<usize>)> = list
        .par_iter()
        .map(|s| {
            let r = evaluate(s.name, &s.cfg).map(|ev| {
                ev.records
                    .iter()
                    .zip(&ev.traj.states)
                    .filter(|(r, st)| !(-1.0 + r.kappa1 <= st.h && st.h <= 1.0 - r.kappa2))
                    .count()
            });
            (s.name.to_string(), r)
        })
        .collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, r) in outcomes {
        match r {
            Ok(v) => {
                ok &= v == 0;
                detail.push(format!("{name}: {v}"));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("{name}: {e}"));
            }
        }
    }
    CriterionReport::new(5, CORRIDOR, ok, format!("violations per run: {}", detail.join(", ")))
}

const SANDWICH: &str = "Lyapunov sandwich";

/// `E/4 ≤ V_ε ≤ 2E` and `V_ε(t) ≤ V_ε(0) e^{−η t}` on the `K = 1` runs.
pub fn criterion_6() -> CriterionReport {
    let list: Vec<Scenario> = scenarios().into_iter().filter(|s| s.cfg.k == 1.0).collect();
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for ev in evaluate_all(&list)? {
            let sandwich = ev
                .records
                .iter()
                .filter(|r| !(0.25 * r.E <= r.V_eps && r.V_eps <= 2.0 * r.E))
                .count();
            let env = Envelope::new(ev.records[0].V_eps, ev.constants.eta);
            let decay = ev.records.iter().filter(|r| env.violated_by(r.t, r.V_eps)).count();
            ok &= sandwich == 0 && decay == 0;
            detail.push(format!(
                "{}: eps = {:.4e}, sandwich violations {sandwich}, decay violations {decay}",
                ev.name, ev.constants.eps
            ));
        }
        Ok((ok, detail.join("; ")))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(6, SANDWICH, ok, d),
        Err(e) => CriterionReport::errored(6, SANDWICH, e),
    }
}

const CHAIN: &str = "inequality chain";

/// `|A2| ≤ 4∫v_y²` and `g² ≤ 2∫v_y²` at every sample of every scenario.
pub fn criterion_7() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for ev in evaluate_all(&scenarios())? {
            let a2 = ev.records.iter().filter(|r| r.A2.abs() > 4.0 * r.D).count();
            let trace = ev
                .records
                .iter()
                .zip(&ev.traj.states)
                .filter(|(r, s)| s.g * s.g > 2.0 * r.D)
                .count();
            ok &= a2 == 0 && trace == 0;
            detail.push(format!("{}: {a2}/{trace}", ev.name));
        }
        Ok((ok, format!("A2/trace violations per run: {}", detail.join(", "))))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(7, CHAIN, ok, d),
        Err(e) => CriterionReport::errored(7, CHAIN, e),
    }
}

const WEAK_FORM: &str = "weak-form conformance";

/// Weak residual over the standard family `≤ 1e-2 E(0)` at the base
/// resolution, decreasing at order ≥ 0.9 under uniform refinement.
pub fn criterion_8() -> CriterionReport {
    let family = standard_family();
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for k in [0.0, 1.0] {
            let cfg = base_scenario(k);
            let e0 = compute_energy(&initialize_state(&cfg)?, k, cfg.h1);
            let study = run_study(Refinement::Uniform.levels(BASE_CELLS / 2, 2.0 * BASE_DT, 3), |n, dt| {
                max_weak_residual(&run_simulation(&with_resolution(&cfg, n, dt)?)?, &family)
            })?;
            let base = study.errors[1] / e0;
            let order = convergence_order(&study)?;
            ok &= base <= 1e-2 && order >= 0.9;
            detail.push(format!(
                "K={k}: max residual/E0 = {base:.3e} (tol 1e-2), order {order:.3} (min 0.9)"
            ));
        }
        Ok((ok, detail.join("; ")))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(8, WEAK_FORM, ok, d),
        Err(e) => CriterionReport::errored(8, WEAK_FORM, e),
    }
}

/// Manufactured oscillating-particle solution used by the convergence
/// checks, on `[0, 1]`.
pub fn mms_scenario(scheme: Scheme, n_cells: usize, dt: f64) -> ValidatedConfig {
    let forcing = Forcing::OscillatingParticle {
        amplitude: 0.3,
        frequency: 2.0,
        bubble_amplitude: 0.5,
        bubble: Bubble::Sine,
    };
    let mut c = SimConfig::new(1.0, 0.0, forcing.position(0.0), forcing.velocity(0.0), InitialProfile::Manufactured)
        .with_grid(n_cells, dt, 1.0)
        .with_scheme(scheme);
    c.forcing = Some(forcing);
    validated(c)
}

const MMS: &str = "manufactured-solution convergence";

/// Spatial order ≥ 1.8 (Crank-Nicolson, `dt ∝ Δξ²`) and temporal order
/// ≥ 0.9 (semi-implicit Euler, `n_cells` and `dt` refined together).
pub fn criterion_9() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let spatial = mms_study(&mms_scenario(Scheme::CrankNicolsonPicard, 8, 4e-3), Refinement::Diffusive, 3)?;
        let temporal = mms_study(&mms_scenario(Scheme::SemiImplicitEuler, 16, 2e-2), Refinement::Uniform, 3)?;
        let (s, t) = (convergence_order(&spatial)?, convergence_order(&temporal)?);
        Ok((
            s >= 1.8 && t >= 0.9,
            format!(
                "spatial order {s:.3} (min 1.8, errors {:.3e} -> {:.3e}), temporal order {t:.3} (min 0.9, errors {:.3e} -> {:.3e})",
                spatial.errors[0], spatial.errors[2], temporal.errors[0], temporal.errors[2]
            ),
        ))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(9, MMS, ok, d),
        Err(e) => CriterionReport::errored(9, MMS, e),
    }
}

const EQUILIBRIUM: &str = "equilibrium fixed point";

/// `v0 = 0`, `g0 = 0`, `h0 = h1`, `K = 5` stays put for 10⁴ steps.
pub fn criterion_10() -> CriterionReport {
    let run = || -> Result<(bool, String)> {
        let cfg = validated(SimConfig::new(5.0, 0.3, 0.3, 0.0, InitialProfile::Zero).with_grid(BASE_CELLS, BASE_DT, 10.0));
        let traj = run_simulation(&cfg)?;
        let s0 = traj.first();
        let drift = traj
            .states
            .iter()
            .map(|s| {
                s.v.iter()
                    .zip(&s0.v)
                    .map(|(a, b)| (a - b).abs())
                    .fold((s.h - s0.h).abs().max((s.g - s0.g).abs()), f64::max)
            })
            .fold(0.0, f64::max);
        let steps = traj.len() - 1;
        Ok((
            drift <= 1e-13 && steps == 10_000,
            format!("{steps} steps, max deviation {drift:.3e} (tol 1e-13)"),
        ))
    };
    match run() {
        Ok((ok, d)) => CriterionReport::new(10, EQUILIBRIUM, ok, d),
        Err(e) => CriterionReport::errored(10, EQUILIBRIUM, e),
    }
}

const CHECKS: [fn() -> CriterionReport; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];

/// Every criterion, in order.
pub fn run_all() -> Vec<CriterionReport> {
    CHECKS.par_iter().map(|c| c()).collect()
}

/// The criteria with the given numbers (1 to 10), in the order given.
/// Unknown numbers are skipped.
pub fn run_all_of(ids: &[u8]) -> Vec<CriterionReport> {
    ids.par_iter()
        .filter_map(|&id| CHECKS.get(usize::from(id).checked_sub(1)?))
        .map(|c| c())
        .collect()
}
