//! Whole-run properties of the solver.

use burgers_fsi::diagnostics::{
    compute_energy, energy_identity_residual, h_star_estimate, kappa_bounds, weak_residual, Profile, TestFunction,
    TimeFactor,
};
use burgers_fsi::verification::{reference_solve, self_convergence_study, state_distance, Refinement};
use burgers_fsi::{run_simulation, validate_config, InitialProfile, SimConfig};

fn sine(k: f64, h1: f64, h0: f64, g0: f64) -> SimConfig {
    SimConfig::new(k, h1, h0, g0, InitialProfile::Sine { amplitude: 1.0, mode: 1.0 })
}

#[test]
fn energy_never_grows_beyond_frozen_defect() {
    // per-step growth allowance Ẽ(n+1) − Ẽ(n) ≤ c dt², c measured once
    const C: f64 = 1e-6;
    for (k, h1, h0, g0) in [(0.0, 0.0, 0.2, 0.5), (1.0, 0.0, 0.2, 0.5), (5.0, 0.5, -0.6, -1.5)] {
        for dt in [2e-3, 1e-3] {
            let cfg = validate_config(sine(k, h1, h0, g0).with_grid(32, dt, 5.0)).unwrap();
            let traj = run_simulation(&cfg).unwrap();
            let e: Vec<f64> = traj.states.iter().map(|s| compute_energy(s, k, h1)).collect();
            for w in e.windows(2) {
                assert!(w[1] - w[0] <= C * dt * dt, "K={k} dt={dt}: growth {}", w[1] - w[0]);
            }
        }
    }
}

#[test]
fn cumulative_defect_is_first_order_in_dt() {
    let r: Vec<f64> = [2e-3, 1e-3, 5e-4]
        .iter()
        .map(|&dt| {
            let cfg = validate_config(sine(1.0, 0.0, 0.2, 0.5).with_grid(32, dt, 4.0)).unwrap();
            energy_identity_residual(&run_simulation(&cfg).unwrap(), 1.0, 0.0).1
        })
        .collect();
    for w in r.windows(2) {
        assert!((w[0] / w[1]).log2() > 0.9, "{r:?}");
    }
}

#[test]
fn dissipation_is_non_decreasing_and_times_increase() {
    let cfg = validate_config(sine(1.0, 0.3, -0.2, 0.0).with_grid(16, 1e-2, 2.0)).unwrap();
    let traj = run_simulation(&cfg).unwrap();
    assert!(traj.dissipation_cum.windows(2).all(|w| w[1] >= w[0]));
    assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    assert_eq!(traj.len(), 201);
    for s in &traj.states {
        s.check_invariants().unwrap();
    }
}

#[test]
fn uncontrolled_sine_decays_faster_than_quarter_rate() {
    let cfg = validate_config(sine(0.0, 0.0, 0.0, 0.0).with_grid(64, 1e-3, 2.0)).unwrap();
    let traj = run_simulation(&cfg).unwrap();
    let e0 = compute_energy(traj.first(), 0.0, 0.0);
    assert!(compute_energy(traj.last(), 0.0, 0.0) < e0 * (-0.25f64 * 2.0).exp());
}

#[test]
fn particle_limit_lies_in_corridor() {
    let cfg = validate_config(sine(0.0, 0.0, 0.0, 0.0).with_grid(32, 2e-3, 20.0)).unwrap();
    let traj = run_simulation(&cfg).unwrap();
    let r = h_star_estimate(&traj, 0.0).unwrap();
    let (k1, k2) = kappa_bounds(&cfg, traj.last().t).unwrap();
    assert!(-1.0 + k1 <= r.h_star && r.h_star <= 1.0 - k2);
    assert_eq!(r.violations, 0);
}

#[test]
fn final_position_converges_in_space() {
    let cfg = validate_config(sine(0.0, 0.0, 0.0, 0.0).with_grid(16, 4e-3, 1.0)).unwrap();
    let study = self_convergence_study(&cfg, Refinement::Diffusive, 3).unwrap();
    for w in study.errors.windows(2) {
        assert!(w[1] < w[0], "{:?}", study.errors);
    }
    assert!(study.orders.iter().all(|&p| p >= 1.0), "{:?}", study.orders);
}

#[test]
fn coarse_runs_approach_the_reference() {
    let cfg = validate_config(sine(0.0, 0.0, 0.1, 0.0).with_grid(8, 1e-2, 0.5)).unwrap();
    let reference = reference_solve(&cfg, 8).unwrap();
    let gaps: Vec<f64> = [(8, 1e-2), (16, 2.5e-3), (32, 6.25e-4)]
        .iter()
        .map(|&(n, dt)| {
            let c = burgers_fsi::verification::with_resolution(&cfg, n, dt).unwrap();
            state_distance(run_simulation(&c).unwrap().last(), reference.last())
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn hat_test_reproduces_position_balance() {
    // with (ψ, l) = (φ, 1) the weak identity is
    // P(t) − P(0) − ∫A1 + ∫A2 + ∫ g (1/(1+h) + 1/(1−h)) − ∫u
    use burgers_fsi::diagnostics::{compute_a1_a2, compute_p};
    let cfg = validate_config(sine(2.0, 0.3, -0.1, 0.4).with_grid(16, 5e-3, 0.5)).unwrap();
    let traj = run_simulation(&cfg).unwrap();
    let hat = TestFunction::new(Profile::Hat, TimeFactor::Constant);
    let weak = &weak_residual(&traj, &[hat]).unwrap()[0];

    let rate = |i: usize| {
        let s = &traj.states[i];
        let (a1, a2) = compute_a1_a2(s);
        -a1 + a2 + s.g / (1.0 + s.h) + s.g / (1.0 - s.h) - traj.controls[i]
    };
    let p0 = compute_p(traj.first());
    let mut integral = 0.0;
    for (i, w) in weak.iter().enumerate() {
        if i > 0 {
            integral += 0.5 * (traj.states[i].t - traj.states[i - 1].t) * (rate(i - 1) + rate(i));
        }
        let balance = compute_p(&traj.states[i]) - p0 + integral;
        assert!((balance - w).abs() < 1e-12, "t = {}: {balance} vs {w}", traj.states[i].t);
    }
}
