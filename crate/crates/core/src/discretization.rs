//! Monolithic ALE finite elements for the fluid and the particle.
//!
//! Unknowns are nodal values of continuous piecewise-linear velocities on the
//! reference grid; the particle velocity is the value at the particle node.
//! Testing the weak form with the moving hat functions gives, per node `j`,
//!
//! ```text
//!   m_j V̇_j + [(S(w) + ½ Ṁ) V]_j + [A V]_j + [C(V) V]_j = u δ_{j,p} (+ sources)
//! ```
//!
//! * `m` is the lumped (trapezoid) mass with the unit particle mass added on
//!   the particle row,
//! * `A` is the stiffness with weights `1/J` per side,
//! * `C(a)` is the skew trilinear form `⅓∫ a ψ_y φ − ⅓∫ a ψ φ_y`, which with
//!   `a = V` is the Galerkin `∫ v v_y φ` and satisfies `⟨C(a) b, b⟩ = 0`,
//! * `S(w) + ½ Ṁ` is the ALE transport term: `S` is the skew part of
//!   `−∫ w v_y φ` and `½ Ṁ` its symmetric part, consistent with the lumped
//!   mass so the semi-discrete energy balance is exact.
//!
//! The particle row carries no explicit interface flux; the jump of `v_y`
//! enters through the stiffness row at the shared node.

use crate::config::{Scheme, ValidatedConfig};
use crate::control::{control_force, mms_forcing, ControlLaw};
use crate::error::{Error, Result};
use crate::geometry::{GeometrySnapshot, ReferenceGrid, Side};
use crate::state::{initialize_state, State, Trajectory};
use crate::tridiag::Tridiagonal;

/// Operators that depend only on the geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledOperators {
    /// Lumped mass, particle inertia included at the particle node.
    pub mass: Vec<f64>,
    pub stiffness: Tridiagonal,
    /// ALE transport operator `S(w) + ½ Ṁ`.
    pub ale: Tridiagonal,
}

/// Trapezoid weights of `∫ · dy` on the physical domain (fluid only).
pub fn fluid_weights(grid: &ReferenceGrid, geom: &GeometrySnapshot) -> Vec<f64> {
    let mut w = vec![0.0; grid.len()];
    let dxi = grid.spacing();
    for e in 0..grid.n_elements() {
        let half = 0.5 * dxi * geom.jacobian(grid.element_side(e));
        w[e] += half;
        w[e + 1] += half;
    }
    w
}

pub fn assemble(grid: &ReferenceGrid, geom: &GeometrySnapshot) -> Result<AssembledOperators> {
    if !(geom.j_left > 0.0 && geom.j_right > 0.0) {
        return Err(Error::Geometry { h: geom.h });
    }
    let n = grid.len();
    let dxi = grid.spacing();
    let mut mass = fluid_weights(grid, geom);
    mass[grid.particle_index()] += 1.0;

    let w = geom.mesh_velocities(grid);
    let mut stiffness = Tridiagonal::zeros(n);
    let mut ale = Tridiagonal::zeros(n);
    for e in 0..grid.n_elements() {
        let (p, q) = (e, e + 1);
        let side = grid.element_side(e);
        let k = 1.0 / (geom.jacobian(side) * dxi);
        stiffness.diag[p] += k;
        stiffness.diag[q] += k;
        stiffness.upper[p] -= k;
        stiffness.lower[q] -= k;

        let s = 0.25 * (w[p] + w[q]);
        ale.upper[p] -= s;
        ale.lower[q] += s;

        // d/dt of this element's lumped mass share, halved
        let jdot = match side {
            Side::Left => geom.g,
            Side::Right => -geom.g,
        };
        let half_mdot = 0.25 * dxi * jdot;
        ale.diag[p] += half_mdot;
        ale.diag[q] += half_mdot;
    }
    Ok(AssembledOperators {
        mass,
        stiffness,
        ale,
    })
}

/// Skew convection operator `C(a)`; `C(V) V` is the energy-neutral split
/// `⅓[D(V∘V) + V∘D(V)]` of the Galerkin Burgers term.
pub fn convection_operator(grid: &ReferenceGrid, a: &[f64]) -> Tridiagonal {
    let mut c = Tridiagonal::zeros(grid.len());
    for e in 0..grid.n_elements() {
        let s = (a[e] + a[e + 1]) / 6.0;
        c.upper[e] += s;
        c.lower[e + 1] -= s;
    }
    c
}

/// `∫ v_y²` over the fluid, exact for piecewise-linear `v`.
pub fn dissipation_rate(grid: &ReferenceGrid, geom: &GeometrySnapshot, v: &[f64]) -> f64 {
    let dxi = grid.spacing();
    (0..grid.n_elements())
        .map(|e| {
            let dv = v[e + 1] - v[e];
            dv * dv / (geom.jacobian(grid.element_side(e)) * dxi)
        })
        .sum()
}

/// Result of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: State,
    /// Increment of `2 ∫∫ v_y²` over the step, as seen by the scheme.
    pub dissipation: f64,
    /// Fixed-point iterations used (1 for the linear scheme).
    pub iterations: usize,
}

fn operator_sum(ops: &AssembledOperators, conv: &Tridiagonal) -> Tridiagonal {
    let mut l = ops.stiffness.clone();
    l.add_scaled(1.0, &ops.ale);
    l.add_scaled(1.0, conv);
    l
}

/// Sources at `t_source` plus the control evaluated at `(t_control, h)`.
fn loads(
    law: &ControlLaw,
    t_source: f64,
    t_control: f64,
    h: f64,
    grid: &ReferenceGrid,
    geom: &GeometrySnapshot,
) -> Vec<f64> {
    let mut b = match &law.mms {
        Some(sources) => mms_forcing(sources, law, t_source, grid, geom),
        None => vec![0.0; grid.len()],
    };
    b[grid.particle_index()] += control_force(law, t_control, h);
    b
}

fn solve_pinned(mut matrix: Tridiagonal, mut rhs: Vec<f64>, t: f64) -> Result<Vec<f64>> {
    let last = rhs.len() - 1;
    matrix.pin_row(0);
    matrix.pin_row(last);
    rhs[0] = 0.0;
    rhs[last] = 0.0;
    let mut v = matrix.solve(&rhs).map_err(|e| Error::LinearSolveFailure {
        t,
        reason: e.to_string(),
    })?;
    v[0] = 0.0;
    v[last] = 0.0;
    Ok(v)
}

fn check_position(h: f64, t: f64) -> Result<()> {
    if h > -1.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::CollisionAbort { t, h })
    }
}

/// Advances `state` by one `dt` with the scheme selected in `cfg`.
pub fn step(state: &State, cfg: &ValidatedConfig, law: &ControlLaw) -> Result<StepOutcome> {
    match cfg.scheme {
        Scheme::SemiImplicitEuler => step_euler(state, cfg.dt, law),
        Scheme::CrankNicolsonPicard => step_midpoint(state, cfg, law),
    }
}

fn step_euler(state: &State, dt: f64, law: &ControlLaw) -> Result<StepOutcome> {
    let grid = state.grid();
    let t_new = state.t + dt;
    let geom = state.geometry()?;
    let ops = assemble(&grid, &geom)?;
    let conv = convection_operator(&grid, &state.v);

    let mut matrix = operator_sum(&ops, &conv);
    let inv_dt = 1.0 / dt;
    matrix.add_diagonal(inv_dt, &ops.mass);

    // sources implicit, control explicit
    let mut rhs = loads(law, t_new, state.t, state.h, &grid, &geom);
    let ip = grid.particle_index();
    for ((r, m), v) in rhs.iter_mut().zip(&ops.mass).zip(&state.v) {
        *r += m * v * inv_dt;
    }

    let v = solve_pinned(matrix, rhs, t_new)?;
    let g = v[ip];
    let h = state.h + dt * g;
    check_position(h, t_new)?;
    let dissipation = 2.0 * dt * dissipation_rate(&grid, &geom, &v);
    Ok(StepOutcome {
        state: State { t: t_new, v, h, g },
        dissipation,
        iterations: 1,
    })
}

fn step_midpoint(state: &State, cfg: &ValidatedConfig, law: &ControlLaw) -> Result<StepOutcome> {
    let dt = cfg.dt;
    let grid = state.grid();
    let ip = grid.particle_index();
    let t_new = state.t + dt;
    let t_mid = state.t + 0.5 * dt;
    let inv_dt = 1.0 / dt;

    let mut v_new = state.v.clone();
    let mut h_new = state.h + dt * state.g;
    check_position(h_new, t_new)?;
    let mut residual = f64::INFINITY;

    for iteration in 1..=cfg.picard_max {
        let h_mid = 0.5 * (state.h + h_new);
        let g_mid = 0.5 * (state.g + v_new[ip]);
        let geom = GeometrySnapshot::new(h_mid, g_mid)?;
        let ops = assemble(&grid, &geom)?;
        let a: Vec<f64> = state.v.iter().zip(&v_new).map(|(x, y)| 0.5 * (x + y)).collect();
        let l = operator_sum(&ops, &convection_operator(&grid, &a));

        let lv = l.matvec(&state.v);
        let mut rhs = loads(law, t_mid, t_mid, h_mid, &grid, &geom);
        for i in 0..rhs.len() {
            rhs[i] += ops.mass[i] * state.v[i] * inv_dt - 0.5 * lv[i];
        }
        let mut matrix = Tridiagonal::zeros(grid.len());
        matrix.add_scaled(0.5, &l);
        matrix.add_diagonal(inv_dt, &ops.mass);

        let v = solve_pinned(matrix, rhs, t_new)?;
        let h = state.h + 0.5 * dt * (state.g + v[ip]);
        check_position(h, t_new)?;

        residual = v
            .iter()
            .zip(&v_new)
            .map(|(x, y)| (x - y).abs())
            .fold((h - h_new).abs(), f64::max);
        v_new = v;
        h_new = h;

        if residual <= cfg.picard_tol {
            let h_mid = 0.5 * (state.h + h_new);
            let geom = GeometrySnapshot::new(h_mid, 0.5 * (state.g + v_new[ip]))?;
            let v_mid: Vec<f64> = state.v.iter().zip(&v_new).map(|(x, y)| 0.5 * (x + y)).collect();
            let dissipation = 2.0 * dt * dissipation_rate(&grid, &geom, &v_mid);
            let g = v_new[ip];
            return Ok(StepOutcome {
                state: State {
                    t: t_new,
                    v: v_new,
                    h: h_new,
                    g,
                },
                dissipation,
                iterations: iteration,
            });
        }
    }
    Err(Error::NonConvergence {
        t: t_new,
        iterations: cfg.picard_max,
        residual,
    })
}

/// The control law implied by a config: feedback with its `K`, `h1`, and any
/// manufactured sources.
pub fn config_control(cfg: &ValidatedConfig) -> ControlLaw {
    ControlLaw::feedback(cfg.k, cfg.h1).with_mms(cfg.forcing.clone())
}

/// Runs the configured problem to `t_final`, recording every step.
pub fn run_simulation(cfg: &ValidatedConfig) -> Result<Trajectory> {
    run_with_control(cfg, &config_control(cfg), 1)
}

/// Runs with an explicit control law, recording every `every`-th step (and
/// always the last one). Dissipation is accumulated over every step.
pub fn run_with_control(cfg: &ValidatedConfig, law: &ControlLaw, every: usize) -> Result<Trajectory> {
    let every = every.max(1);
    let mut state = initialize_state(cfg)?;
    let steps = cfg.steps();
    let mut traj = Trajectory::default();
    traj.states.reserve(steps / every + 2);
    let mut dissipation = 0.0;
    traj.push(state.clone(), 0.0, control_force(law, state.t, state.h));

    for n in 1..=steps {
        let out = step(&state, cfg, law)?;
        // times from the step count, not by accumulation
        let mut next = out.state;
        next.t = n as f64 * cfg.dt;
        dissipation += out.dissipation;
        if n % every == 0 || n == steps {
            traj.push(next.clone(), dissipation, control_force(law, next.t, next.h));
        }
        state = next;
    }
    Ok(traj)
}
