//! Functionals of a single state.
//!
//! `∫ v²` uses the trapezoid rule with Jacobian weights, which is the norm
//! the lumped-mass scheme conserves. Integrals against the test function or
//! polynomial weights are computed exactly elementwise with three-point
//! Gauss-Legendre rules (all integrands are polynomials of degree ≤ 3 in ξ).

use crate::error::{Error, Result};
use crate::geometry::Side;
use crate::state::State;

const GAUSS: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// One element of the reference grid with the state's nodal values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Element {
    pub xi0: f64,
    pub xi1: f64,
    pub v0: f64,
    pub v1: f64,
    pub side: Side,
    pub jacobian: f64,
}

impl Element {
    pub fn width(&self) -> f64 {
        self.xi1 - self.xi0
    }

    /// `dv/dξ`
    pub fn slope(&self) -> f64 {
        (self.v1 - self.v0) / self.width()
    }

    /// `∫ f(ξ, v(ξ)) dξ` over the element.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let width = self.width();
        GAUSS
            .iter()
            .map(|&(s, w)| {
                let xi = self.xi0 + s * width;
                let v = self.v0 + s * (self.v1 - self.v0);
                w * f(xi, v)
            })
            .sum::<f64>()
            * width
    }
}

pub(crate) fn elements(state: &State) -> impl Iterator<Item = Element> + '_ {
    let grid = state.grid();
    let (jl, jr) = (1.0 + state.h, 1.0 - state.h);
    (0..grid.n_elements()).map(move |e| {
        let side = grid.element_side(e);
        Element {
            xi0: grid.node(e),
            xi1: grid.node(e + 1),
            v0: state.v[e],
            v1: state.v[e + 1],
            side,
            jacobian: match side {
                Side::Left => jl,
                Side::Right => jr,
            },
        }
    })
}

/// Trapezoid `∫ v² dy` over the fluid.
pub fn fluid_l2_squared(state: &State) -> f64 {
    elements(state)
        .map(|el| 0.5 * el.width() * el.jacobian * (el.v0 * el.v0 + el.v1 * el.v1))
        .sum()
}

/// `E = ∫ v² + g² + K (h − h1)²`
pub fn compute_energy(state: &State, k: f64, h1: f64) -> f64 {
    let d = state.h - h1;
    (fluid_l2_squared(state) + state.g * state.g) + k * (d * d)
}

/// `D = ∫ v_y²`, exact for piecewise-linear `v`.
pub fn compute_dissipation(state: &State) -> f64 {
    elements(state)
        .map(|el| {
            let dv = el.v1 - el.v0;
            dv * dv / (el.jacobian * el.width())
        })
        .sum()
}

/// `P = ∫ φ v dy + g`
pub fn compute_p(state: &State) -> f64 {
    let integral: f64 = elements(state)
        .map(|el| el.jacobian * el.integrate(|xi, v| (1.0 - xi.abs()) * v))
        .sum();
    integral + state.g
}

/// `(A1, A2)` with `A1 = ∫ v ∂φ/∂t` and `A2 = ∫ v v_y φ`.
///
/// In reference coordinates `A1 = −g ∫_{ξ<0} v (1 + ξ) dξ + g ∫_{ξ>0} v (1 − ξ) dξ`
/// and `A2 = ∫ v v_ξ (1 − |ξ|) dξ`; both are Jacobian-free.
pub fn compute_a1_a2(state: &State) -> (f64, f64) {
    let mut left = 0.0;
    let mut right = 0.0;
    let mut a2 = 0.0;
    for el in elements(state) {
        let slope = el.slope();
        a2 += el.integrate(|xi, v| v * slope * (1.0 - xi.abs()));
        match el.side {
            Side::Left => left += el.integrate(|xi, v| v * (1.0 + xi)),
            Side::Right => right += el.integrate(|xi, v| v * (1.0 - xi)),
        }
    }
    (state.g * (right - left), a2)
}

/// One-sided jump `[v_y] = v_y(h⁺) − v_y(h⁻)` at the particle node.
pub fn compute_jump(state: &State) -> f64 {
    let ip = state.particle_index();
    let dxi = 1.0 / state.n_cells() as f64;
    (state.v[ip + 1] - state.v[ip]) / (dxi * (1.0 - state.h))
        - (state.v[ip] - state.v[ip - 1]) / (dxi * (1.0 + state.h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySplit {
    /// `½(∫ v² + g²)`
    pub w1: f64,
    /// `(K/2)(h − h1)²`
    pub w2: f64,
    /// `∫ v_y²`
    pub d: f64,
}

pub fn energy_split(state: &State, k: f64, h1: f64) -> EnergySplit {
    let dh = state.h - h1;
    EnergySplit {
        w1: 0.5 * (fluid_l2_squared(state) + state.g * state.g),
        w2: 0.5 * k * (dh * dh),
        d: compute_dissipation(state),
    }
}

/// Largest admissible perturbation weight, `min{1/8, K/8}`.
pub fn max_lyapunov_eps(k: f64) -> f64 {
    (1.0f64 / 8.0).min(k / 8.0)
}

/// Perturbed Lyapunov function `V_ε = E − ε (h1 − h) P`.
pub fn lyapunov_v(state: &State, eps: f64, k: f64, h1: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps <= max_lyapunov_eps(k)) {
        return Err(Error::Domain(format!(
            "eps = {eps} outside [0, min(1/8, K/8)] for K = {k}"
        )));
    }
    Ok(compute_energy(state, k, h1) - eps * (h1 - state.h) * compute_p(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn state_from(n: usize, h: f64, g: f64, f: impl Fn(f64) -> f64) -> State {
        let grid = crate::geometry::ReferenceGrid::new(n);
        let mut v: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&xi| f(crate::geometry::map_to_physical(xi, h).unwrap()))
            .collect();
        v[n] = g;
        State { t: 0.0, v, h, g }
    }

    #[test]
    fn energy_examples() {
        let rest = state_from(8, 0.3, 0.0, |_| 0.0);
        assert_eq!(compute_energy(&rest, 2.0, 0.3), 0.0);
        let moving = state_from(8, 0.5, 2.0, |_| 0.0);
        let mut moving = moving;
        moving.v.iter_mut().for_each(|x| *x = 0.0);
        moving.v[8] = 2.0;
        // the fluid is zero except at the particle node; drop its share
        let e = compute_energy(&moving, 1.0, 0.0) - fluid_l2_squared(&moving);
        assert_relative_eq!(e, 4.25, max_relative = 1e-15);
    }

    #[test]
    fn energy_of_sine_converges_to_one() {
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| (compute_energy(&state_from(n, 0.0, 0.0, |y| (PI * y).sin()), 0.0, 0.0) - 1.0).abs())
            .collect();
        assert!(errs[2] < 1e-3);
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn p_examples() {
        let s = state_from(8, 0.1, 3.0, |_| 0.0);
        let mut s = s;
        s.v.iter_mut().for_each(|x| *x = 0.0);
        s.v[8] = 3.0;
        // P = ∫ φ v + g; the particle node carries g into the fluid integral too
        let fluid_part = compute_p(&s) - 3.0;
        assert!(fluid_part > 0.0 && fluid_part < 3.0 / 8.0);

        // v ≡ c inside, walls zeroed: ∫φ = 1 up to the two wall cells
        let n = 64;
        let c = 0.7;
        let mut s = state_from(n, 0.0, c, |_| c);
        s.v[0] = 0.0;
        s.v[2 * n] = 0.0;
        assert!((compute_p(&s) - (c + c)).abs() < c / (n as f64 * n as f64));
    }

    #[test]
    fn a1_a2_examples() {
        let s = state_from(16, 0.2, 0.0, |y| (1.0 - y * y) * y);
        let (a1, _) = compute_a1_a2(&s);
        assert_eq!(a1, 0.0);
        let s = state_from(16, -0.4, 0.0, |_| 0.0);
        assert_eq!(compute_a1_a2(&s).1, 0.0);
    }

    /// A1 via the physical-coordinate formula with a fine midpoint rule.
    #[test]
    fn a1_matches_physical_formula() {
        let (h, g) = (0.3, 0.8);
        let profile = |y: f64| if y < h { g * (y + 1.0) / (1.0 + h) * (2.0 - y) } else { g * (1.0 - y) / (1.0 - h) };
        let s = state_from(8, h, g, profile);
        // interpolate the nodal state exactly (piecewise linear), then integrate finely
        let grid = s.grid();
        let interp = |y: f64| {
            let xi = crate::geometry::map_to_reference(y, h).unwrap();
            let pos = (xi + 1.0) * 8.0;
            let i = (pos.floor() as usize).min(15);
            let frac = pos - i as f64;
            s.v[i] * (1.0 - frac) + s.v[i + 1] * frac
        };
        let m = 200_000;
        let mut left = 0.0;
        let mut right = 0.0;
        for i in 0..m {
            let yl = -1.0 + (i as f64 + 0.5) * (1.0 + h) / m as f64;
            left += interp(yl) * (1.0 + yl) * (1.0 + h) / m as f64;
            let yr = h + (i as f64 + 0.5) * (1.0 - h) / m as f64;
            right += interp(yr) * (1.0 - yr) * (1.0 - h) / m as f64;
        }
        let expected = -g / ((1.0 + h) * (1.0 + h)) * left + g / ((1.0 - h) * (1.0 - h)) * right;
        let _ = grid;
        assert_relative_eq!(compute_a1_a2(&s).0, expected, max_relative = 1e-8);
    }

    #[test]
    fn jump_examples() {
        let s = state_from(16, 0.0, 1.0, |y| 1.0 - y.abs());
        assert_relative_eq!(compute_jump(&s), -2.0, max_relative = 1e-14);
        let s = state_from(16, 0.2, 0.0, |_| 0.0);
        assert_eq!(compute_jump(&s), 0.0);
    }

    #[test]
    fn jump_of_smooth_profile_vanishes_at_first_order() {
        let jumps: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let h = 0.25;
                compute_jump(&state_from(n, h, (PI * h).sin() + 0.5, |y| (PI * y).sin() + 0.5 * (1.0 - y * y) / (1.0 - h * h))).abs()
            })
            .collect();
        assert!(jumps[2] < jumps[1] && jumps[1] < jumps[0]);
        let order = (jumps[1] / jumps[2]).log2();
        assert!(order > 0.9, "order {order}");
    }

    #[test]
    fn energy_split_examples() {
        let mut s = state_from(8, 0.0, 2.0, |_| 0.0);
        s.v.iter_mut().for_each(|x| *x = 0.0);
        s.v[8] = 2.0;
        let f = energy_split(&s, 1.0, 0.0);
        assert_eq!(f.w1 - 0.5 * fluid_l2_squared(&s), 2.0);
        assert_eq!(f.w2, 0.0);
        let ramp = state_from(16, 0.0, 0.0, |y| y);
        assert_relative_eq!(energy_split(&ramp, 0.0, 0.0).d, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn lyapunov_examples() {
        let s = state_from(16, 0.1, 0.4, |y| (PI * y).sin());
        assert_eq!(lyapunov_v(&s, 0.0, 1.0, 0.5).unwrap(), compute_energy(&s, 1.0, 0.5));
        assert_eq!(lyapunov_v(&s, 0.1, 1.0, 0.1).unwrap(), compute_energy(&s, 1.0, 0.1));
        assert!(matches!(lyapunov_v(&s, 0.2, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(lyapunov_v(&s, 0.01, 0.0, 0.0), Err(Error::Domain(_))));
    }

    fn arb_state() -> impl Strategy<Value = (State, f64, f64)> {
        (
            -0.95f64..0.95,
            proptest::collection::vec(-3.0f64..3.0, 33),
            0.0f64..5.0,
            -0.95f64..0.95,
        )
            .prop_map(|(h, mut v, k, h1)| {
                v[0] = 0.0;
                v[32] = 0.0;
                let g = v[16];
                (State { t: 0.0, v, h, g }, k, h1)
            })
    }

    proptest! {
        #[test]
        fn energy_sandwich((s, k, h1) in arb_state(), frac in 0.0f64..=1.0) {
            let eps = frac * max_lyapunov_eps(k);
            let e = compute_energy(&s, k, h1);
            let v = lyapunov_v(&s, eps, k, h1).unwrap();
            prop_assert!(0.25 * e <= v * (1.0 + 1e-12) + 1e-300);
            prop_assert!(v <= 2.0 * e * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn inequality_chain((s, k, h1) in arb_state()) {
            let d = compute_dissipation(&s);
            let (a1, a2) = compute_a1_a2(&s);
            prop_assert!(a2.abs() <= 4.0 * d * (1.0 + 1e-12));
            prop_assert!(a1.abs() <= 6.0 * d * (1.0 + 1e-12));
            prop_assert!(s.g * s.g <= 2.0 * d * (1.0 + 1e-12));
            let f = energy_split(&s, k, h1);
            prop_assert_eq!(compute_energy(&s, k, h1), 2.0 * f.w1 + 2.0 * f.w2);
            prop_assert!(f.w1 >= 0.0 && f.w2 >= 0.0 && f.d >= 0.0);
        }

        #[test]
        fn p_bounded_by_energy((s, k, h1) in arb_state()) {
            let p = compute_p(&s);
            prop_assert!(p * p <= 4.0 * compute_energy(&s, k, h1) * (1.0 + 1e-12));
        }
    }
}
