//! Forces acting on the particle, plus manufactured-solution sources used
//! for verification runs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{mesh_velocity, GeometrySnapshot, ReferenceGrid, Side};

/// Time signal for open-loop control. Samples are linearly interpolated and
/// held constant outside their range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Signal {
    Zero,
    /// `amplitude` for `t >= t0`, zero before.
    Step { t0: f64, amplitude: f64 },
    /// `amplitude * sin(omega * t)`
    Sine { amplitude: f64, omega: f64 },
    Samples { times: Vec<f64>, values: Vec<f64> },
}

impl Signal {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Zero => 0.0,
            Signal::Step { t0, amplitude } => {
                if t >= *t0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            Signal::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
            Signal::Samples { times, values } => interpolate(times, values, t),
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len().min(values.len());
    if n == 0 {
        return 0.0;
    }
    if t <= times[0] {
        return values[0];
    }
    if t >= times[n - 1] {
        return values[n - 1];
    }
    let k = times[..n].partition_point(|&s| s <= t);
    let (t0, t1) = (times[k - 1], times[k]);
    let (v0, v1) = (values[k - 1], values[k]);
    if t1 == t0 {
        return v1;
    }
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlVariant {
    /// `u = K (h1 - h)`
    Feedback { k: f64, h1: f64 },
    OpenLoop(Signal),
    None,
}

/// Control input together with optional manufactured sources.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlLaw {
    pub variant: ControlVariant,
    pub mms: Option<Forcing>,
}

impl ControlLaw {
    pub fn feedback(k: f64, h1: f64) -> Self {
        Self {
            variant: ControlVariant::Feedback { k, h1 },
            mms: None,
        }
    }

    pub fn open_loop(signal: Signal) -> Self {
        Self {
            variant: ControlVariant::OpenLoop(signal),
            mms: None,
        }
    }

    pub fn none() -> Self {
        Self {
            variant: ControlVariant::None,
            mms: None,
        }
    }

    pub fn with_mms(mut self, forcing: Option<Forcing>) -> Self {
        self.mms = forcing;
        self
    }
}

pub fn control_force(law: &ControlLaw, t: f64, h: f64) -> f64 {
    match &law.variant {
        ControlVariant::Feedback { k, h1 } => k * (h1 - h),
        ControlVariant::OpenLoop(signal) => signal.eval(t),
        ControlVariant::None => 0.0,
    }
}

/// Shape of the fluid part of a manufactured solution that vanishes at the
/// walls and at the particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bubble {
    /// `sin(π ξ)`
    Sine,
    /// `|ξ| (1 - ξ²)`
    Cubic,
}

impl Bubble {
    fn value(self, xi: f64) -> f64 {
        match self {
            Bubble::Sine => (PI * xi).sin(),
            Bubble::Cubic => xi.abs() * (1.0 - xi * xi),
        }
    }

    fn slope(self, xi: f64, side: Side) -> f64 {
        match self {
            Bubble::Sine => PI * (PI * xi).cos(),
            Bubble::Cubic => sign(side) * (1.0 - 3.0 * xi * xi),
        }
    }

    fn curvature(self, xi: f64) -> f64 {
        match self {
            Bubble::Sine => -PI * PI * (PI * xi).sin(),
            Bubble::Cubic => -6.0 * xi.abs(),
        }
    }
}

fn sign(side: Side) -> f64 {
    match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    }
}

/// Closed-form manufactured solutions.
///
/// Both variants are written in reference coordinates as
/// `G(t, ξ) = ḣ*(t)·(1 − |ξ|) + β(t)·bubble(ξ)` with particle path `h*(t)`,
/// so `G(t, 0) = ḣ*(t)` and the interface compatibility holds exactly.
/// The fluid source follows from the chain rule through the moving map:
/// `f = G_t − G_ξ w/J + G G_ξ/J − G_ξξ/J²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Forcing {
    /// `h*(t) = amplitude·sin(frequency·t)`, `β(t) = bubble_amplitude·e^{−t}`.
    OscillatingParticle {
        amplitude: f64,
        frequency: f64,
        bubble_amplitude: f64,
        bubble: Bubble,
    },
    /// `h* ≡ 0`, `v*(t, y) = amplitude·e^{−t}|y|(1 − y²)`.
    PinnedParticle { amplitude: f64 },
}

impl Forcing {
    pub(crate) fn validate(&self) -> Result<(), String> {
        match *self {
            Forcing::OscillatingParticle {
                amplitude,
                frequency,
                bubble_amplitude,
                ..
            } => {
                if !(amplitude.is_finite() && frequency.is_finite() && bubble_amplitude.is_finite()) {
                    Err("manufactured parameters must be finite".into())
                } else if amplitude.abs() >= 0.9 {
                    Err("|amplitude| < 0.9 required to keep the particle inside".into())
                } else {
                    Ok(())
                }
            }
            Forcing::PinnedParticle { amplitude } if !amplitude.is_finite() => {
                Err("manufactured amplitude must be finite".into())
            }
            Forcing::PinnedParticle { .. } => Ok(()),
        }
    }

    fn bubble(&self) -> Bubble {
        match self {
            Forcing::OscillatingParticle { bubble, .. } => *bubble,
            Forcing::PinnedParticle { .. } => Bubble::Cubic,
        }
    }

    fn beta(&self, t: f64) -> f64 {
        match *self {
            Forcing::OscillatingParticle { bubble_amplitude, .. } => bubble_amplitude * (-t).exp(),
            Forcing::PinnedParticle { amplitude } => amplitude * (-t).exp(),
        }
    }

    fn beta_dot(&self, t: f64) -> f64 {
        -self.beta(t)
    }

    pub fn position(&self, t: f64) -> f64 {
        match *self {
            Forcing::OscillatingParticle { amplitude, frequency, .. } => amplitude * (frequency * t).sin(),
            Forcing::PinnedParticle { .. } => 0.0,
        }
    }

    pub fn velocity(&self, t: f64) -> f64 {
        match *self {
            Forcing::OscillatingParticle { amplitude, frequency, .. } => {
                amplitude * frequency * (frequency * t).cos()
            }
            Forcing::PinnedParticle { .. } => 0.0,
        }
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        match *self {
            Forcing::OscillatingParticle { amplitude, frequency, .. } => {
                -amplitude * frequency * frequency * (frequency * t).sin()
            }
            Forcing::PinnedParticle { .. } => 0.0,
        }
    }

    /// Exact fluid velocity at reference coordinate `xi`.
    pub fn profile(&self, t: f64, xi: f64) -> f64 {
        self.velocity(t) * (1.0 - xi.abs()) + self.beta(t) * self.bubble().value(xi)
    }

    fn profile_dt(&self, t: f64, xi: f64) -> f64 {
        self.acceleration(t) * (1.0 - xi.abs()) + self.beta_dot(t) * self.bubble().value(xi)
    }

    /// One-sided `∂G/∂ξ`.
    fn profile_dxi(&self, t: f64, xi: f64, side: Side) -> f64 {
        -sign(side) * self.velocity(t) + self.beta(t) * self.bubble().slope(xi, side)
    }

    fn profile_dxixi(&self, t: f64, xi: f64) -> f64 {
        self.beta(t) * self.bubble().curvature(xi)
    }

    /// Fluid source at reference coordinate `xi`, taken from `side`.
    pub fn fluid_source(&self, t: f64, xi: f64, side: Side) -> f64 {
        let h = self.position(t);
        let j = match side {
            Side::Left => 1.0 + h,
            Side::Right => 1.0 - h,
        };
        let w = mesh_velocity(xi, self.velocity(t));
        let g = self.profile(t, xi);
        let g_xi = self.profile_dxi(t, xi, side);
        self.profile_dt(t, xi) - g_xi * w / j + g * g_xi / j - self.profile_dxixi(t, xi) / (j * j)
    }

    /// Exact `[v_y]` across the particle.
    pub fn jump(&self, t: f64) -> f64 {
        let h = self.position(t);
        self.profile_dxi(t, 0.0, Side::Right) / (1.0 - h)
            - self.profile_dxi(t, 0.0, Side::Left) / (1.0 + h)
    }

    /// Particle source `F(t) = ḧ* − [v*_y] − u(h*)`, with `u` the feedback
    /// `K (h1 − h*)` (pass `k = 0` for uncontrolled runs).
    pub fn particle_source(&self, t: f64, k: f64, h1: f64) -> f64 {
        self.acceleration(t) - self.jump(t) - k * (h1 - self.position(t))
    }
}

/// Load vector of manufactured sources on `grid` at time `t`.
///
/// The fluid part is the lumped `∫ f ψ_j`, one-sided at the particle node;
/// `F(t)` goes on the particle row.
pub fn mms_forcing(
    sources: &Forcing,
    law: &ControlLaw,
    t: f64,
    grid: &ReferenceGrid,
    geom: &GeometrySnapshot,
) -> Vec<f64> {
    let n = grid.len();
    let dxi = grid.spacing();
    let mut load = vec![0.0; n];
    for e in 0..grid.n_elements() {
        let side = grid.element_side(e);
        let half = 0.5 * dxi * geom.jacobian(side);
        for node in [e, e + 1] {
            load[node] += half * sources.fluid_source(t, grid.node(node), side);
        }
    }
    load[0] = 0.0;
    load[n - 1] = 0.0;
    let (k, h1) = match law.variant {
        ControlVariant::Feedback { k, h1 } => (k, h1),
        _ => (0.0, 0.0),
    };
    load[grid.particle_index()] += sources.particle_source(t, k, h1);
    load
}
