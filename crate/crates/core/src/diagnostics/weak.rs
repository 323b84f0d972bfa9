//! Residual of the weak formulation along a computed trajectory.
//!
//! Test pairs are `ψ(t, y) = a(t) p(ξ(t, y))` with `p(±1) = 0`, and
//! `l(t) = a(t) p(0)`, so `l = ψ(·, h)` by construction. With `y = Y(ξ, t)`,
//!
//! ```text
//!   ψ_t = a' p − a p' w / J,    ψ_y = a p' / J,    dy = J dξ.
//! ```
//!
//! Spatial integrals use three-point Gauss per element, time integrals the
//! trapezoid rule over the recorded samples.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{mesh_velocity, Side};
use crate::state::{State, Trajectory};

use super::functionals::elements;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `1 − |ξ|`, the test function `φ` in reference coordinates.
    Hat,
    /// `1 − ξ²`
    Parabola,
    /// `sin(k π (ξ + 1) / 2)`
    Sine(u32),
    /// `cos(π ξ / 2)`
    CosHalf,
}

impl Profile {
    pub fn value(&self, xi: f64) -> f64 {
        match *self {
            Profile::Hat => 1.0 - xi.abs(),
            Profile::Parabola => 1.0 - xi * xi,
            Profile::Sine(k) => (k as f64 * PI * (xi + 1.0) / 2.0).sin(),
            Profile::CosHalf => (PI * xi / 2.0).cos(),
        }
    }

    /// `dp/dξ`, taken from the side `side` at `ξ = 0`.
    pub fn slope(&self, xi: f64, side: Side) -> f64 {
        match *self {
            Profile::Hat => match side {
                Side::Left => 1.0,
                Side::Right => -1.0,
            },
            Profile::Parabola => -2.0 * xi,
            Profile::Sine(k) => {
                let c = k as f64 * PI / 2.0;
                c * (c * (xi + 1.0)).cos()
            }
            Profile::CosHalf => -PI / 2.0 * (PI * xi / 2.0).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFactor {
    Constant,
    /// `e^{−rate t}`
    Exp(f64),
    /// `cos(ω t)`
    Cos(f64),
}

impl TimeFactor {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeFactor::Constant => 1.0,
            TimeFactor::Exp(r) => (-r * t).exp(),
            TimeFactor::Cos(w) => (w * t).cos(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeFactor::Constant => 0.0,
            TimeFactor::Exp(r) => -r * (-r * t).exp(),
            TimeFactor::Cos(w) => -w * (w * t).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub profile: Profile,
    pub time: TimeFactor,
}

impl TestFunction {
    pub const fn new(profile: Profile, time: TimeFactor) -> Self {
        Self { profile, time }
    }

    pub fn name(&self) -> String {
        format!("{:?}x{:?}", self.profile, self.time)
    }
}

/// Five test pairs: the hat `(φ, 1)`, two profiles vanishing or not at the
/// particle, and two time-dependent ones.
pub fn standard_family() -> Vec<TestFunction> {
    vec![
        TestFunction::new(Profile::Hat, TimeFactor::Constant),
        TestFunction::new(Profile::Parabola, TimeFactor::Cos(1.0)),
        TestFunction::new(Profile::Sine(2), TimeFactor::Constant),
        TestFunction::new(Profile::CosHalf, TimeFactor::Exp(0.5)),
        TestFunction::new(Profile::Sine(3), TimeFactor::Cos(2.0)),
    ]
}

/// Spatial integrals of one state against one test pair.
#[derive(Debug, Clone, Copy, Default)]
struct Snapshot {
    /// `∫ v ψ dy`
    v_psi: f64,
    /// `∫ v ψ_t dy`
    v_psi_t: f64,
    /// `∫ v_y ψ_y dy`
    grad: f64,
    /// `−½ ∫ v² ψ_y dy`
    convection: f64,
    /// `g l`
    g_l: f64,
    /// `g l̇`
    g_l_dot: f64,
    /// `l`
    l: f64,
}

fn snapshot(state: &State, test: &TestFunction) -> Snapshot {
    let (a, a_dot) = (test.time.value(state.t), test.time.derivative(state.t));
    let p = &test.profile;
    let mut s = Snapshot::default();
    for el in elements(state) {
        let (j, side) = (el.jacobian, el.side);
        let slope = el.slope();
        s.v_psi += j * el.integrate(|xi, v| v * p.value(xi));
        s.v_psi_t += el.integrate(|xi, v| {
            v * (a_dot * p.value(xi) * j - a * p.slope(xi, side) * mesh_velocity(xi, state.g))
        });
        s.grad += el.integrate(|xi, _| slope * p.slope(xi, side)) / j;
        s.convection += -0.5 * el.integrate(|xi, v| v * v * p.slope(xi, side));
    }
    s.v_psi *= a;
    s.grad *= a;
    s.convection *= a;
    s.l = a * p.value(0.0);
    s.g_l = state.g * s.l;
    s.g_l_dot = state.g * a_dot * p.value(0.0);
    s
}

/// Residual of the weak identity for each test pair (outer index) at each
/// recorded time (inner index). `controls` must hold `u` at the same times.
pub fn weak_residual(traj: &Trajectory, family: &[TestFunction]) -> Result<Vec<Vec<f64>>> {
    family
        .iter()
        .map(|test| {
            let snaps: Vec<Snapshot> = traj.states.iter().map(|s| snapshot(s, test)).collect();
            let first = snaps[0];
            let mut integral = 0.0;
            let mut out = Vec::with_capacity(snaps.len());
            for (n, snap) in snaps.iter().enumerate() {
                if n > 0 {
                    let prev = &snaps[n - 1];
                    let dt = traj.states[n].t - traj.states[n - 1].t;
                    let rate = |s: &Snapshot, u: f64| {
                        -s.g_l_dot - s.v_psi_t + s.grad + s.convection - u * s.l
                    };
                    integral += 0.5
                        * dt
                        * (rate(prev, traj.controls[n - 1]) + rate(snap, traj.controls[n]));
                }
                let r = snap.v_psi - first.v_psi + snap.g_l - first.g_l + integral;
                if !r.is_finite() {
                    return Err(Error::Quadrature { t: traj.states[n].t });
                }
                out.push(r);
            }
            Ok(out)
        })
        .collect()
}

/// Largest absolute residual over all tests and times.
pub fn max_weak_residual(traj: &Trajectory, family: &[TestFunction]) -> Result<f64> {
    Ok(weak_residual(traj, family)?
        .iter()
        .flatten()
        .fold(0.0, |m, r| m.max(r.abs())))
}
