//! Refinement studies, manufactured-solution errors and continuity probes.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{validate_config, InitialProfile, SimConfig, ValidatedConfig};
use crate::control::Forcing;
use crate::discretization::{fluid_weights, run_simulation};
use crate::error::{Error, Result};
use crate::geometry::GeometrySnapshot;
use crate::state::{initialize_state, State, Trajectory};

/// How successive levels of a study are refined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Grid fixed, `dt` halved.
    Temporal,
    /// `n_cells` doubled and `dt` halved.
    Uniform,
    /// `n_cells` doubled and `dt` quartered (`dt ∝ Δξ²`).
    Diffusive,
}

impl Refinement {
    /// `count` levels starting at `(n_cells, dt)`.
    pub fn levels(self, n_cells: usize, dt: f64, count: usize) -> Vec<(usize, f64)> {
        let (grid, time): (usize, f64) = match self {
            Refinement::Temporal => (1, 2.0),
            Refinement::Uniform => (2, 2.0),
            Refinement::Diffusive => (2, 4.0),
        };
        (0..count)
            .map(|i| (n_cells * grid.pow(i as u32), dt / time.powi(i as i32)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    /// `(n_cells, dt)` per level, coarsest first.
    pub levels: Vec<(usize, f64)>,
    pub errors: Vec<f64>,
    /// `log₂(e_k / e_{k+1})` per consecutive pair.
    pub orders: Vec<f64>,
}

impl RefinementStudy {
    pub fn new(levels: Vec<(usize, f64)>, errors: Vec<f64>) -> Self {
        let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Self { levels, errors, orders }
    }
}

/// Evaluates `error` at every level in parallel; results keep level order.
pub fn run_study<F>(levels: Vec<(usize, f64)>, error: F) -> Result<RefinementStudy>
where
    F: Fn(usize, f64) -> Result<f64> + Sync,
{
    if levels.len() < 3 {
        return Err(Error::DegenerateStudy(format!(
            "{} levels given, at least 3 required",
            levels.len()
        )));
    }
    let errors = levels
        .par_iter()
        .map(|&(n, dt)| error(n, dt))
        .collect::<Result<Vec<_>>>()?;
    Ok(RefinementStudy::new(levels, errors))
}

/// Median of the per-pair observed orders.
pub fn convergence_order(study: &RefinementStudy) -> Result<f64> {
    if study.errors.len() < 3 {
        return Err(Error::DegenerateStudy("fewer than 3 levels".into()));
    }
    if let Some(i) = study.errors.iter().position(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateStudy(format!(
            "error at level {i} is {}",
            study.errors[i]
        )));
    }
    let mut orders = study.orders.clone();
    orders.sort_by(f64::total_cmp);
    let m = orders.len();
    Ok(if m % 2 == 1 {
        orders[m / 2]
    } else {
        0.5 * (orders[m / 2 - 1] + orders[m / 2])
    })
}

/// `cfg` at another resolution, everything else unchanged.
pub fn with_resolution(cfg: &ValidatedConfig, n_cells: usize, dt: f64) -> Result<ValidatedConfig> {
    let mut c = cfg.config().clone();
    if let InitialProfile::Samples { .. } = c.v0 {
        return Err(Error::Domain(
            "nodal initial data cannot be moved to another grid".into(),
        ));
    }
    c.n_cells = n_cells;
    c.dt = dt;
    validate_config(c)
}

/// The same scenario at `(n_cells · r, dt / r²)`.
pub fn reference_solve(cfg: &ValidatedConfig, refine_factor: usize) -> Result<Trajectory> {
    if refine_factor < 4 {
        return Err(Error::Domain(format!(
            "refine factor {refine_factor} below 4"
        )));
    }
    let r = refine_factor as f64;
    let fine = with_resolution(cfg, cfg.n_cells * refine_factor, cfg.dt / (r * r))?;
    run_simulation(&fine)
}

/// Distance between two states whose grids are nested (the finer one has
/// a multiple of the coarser cell count): the discrete `L²` gap at the
/// coarse nodes, in reference coordinates, plus `|Δh| + |Δg|`.
pub fn state_distance(a: &State, b: &State) -> f64 {
    let (coarse, fine) = if a.n_cells() <= b.n_cells() { (a, b) } else { (b, a) };
    let stride = fine.n_cells() / coarse.n_cells();
    assert_eq!(stride * coarse.n_cells(), fine.n_cells(), "grids are not nested");
    let grid = coarse.grid();
    let w = fluid_weights(&grid, &GeometrySnapshot { h: 0.0, g: 0.0, j_left: 1.0, j_right: 1.0 });
    let l2: f64 = (0..grid.len())
        .map(|i| {
            let d = coarse.v[i] - fine.v[i * stride];
            w[i] * d * d
        })
        .sum();
    l2.sqrt() + (a.h - b.h).abs() + (a.g - b.g).abs()
}

/// Error of a state against a manufactured solution at the state's time.
pub fn mms_state_error(state: &State, forcing: &Forcing) -> f64 {
    let t = state.t;
    let grid = state.grid();
    let w = fluid_weights(&grid, &GeometrySnapshot { h: 0.0, g: 0.0, j_left: 1.0, j_right: 1.0 });
    let l2: f64 = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let d = state.v[i] - forcing.profile(t, xi);
            w[i] * d * d
        })
        .sum();
    l2.sqrt() + (state.h - forcing.position(t)).abs() + (state.g - forcing.velocity(t)).abs()
}

/// Largest manufactured-solution error over the recorded samples.
pub fn mms_error(traj: &Trajectory, forcing: &Forcing) -> f64 {
    traj.states
        .iter()
        .map(|s| mms_state_error(s, forcing))
        .fold(0.0, f64::max)
}

/// Manufactured-solution study of a forced config.
pub fn mms_study(cfg: &ValidatedConfig, refinement: Refinement, count: usize) -> Result<RefinementStudy> {
    let forcing = cfg
        .forcing
        .clone()
        .ok_or_else(|| Error::NotApplicable("config has no manufactured forcing".into()))?;
    run_study(refinement.levels(cfg.n_cells, cfg.dt, count), |n, dt| {
        let traj = run_simulation(&with_resolution(cfg, n, dt)?)?;
        Ok(mms_error(&traj, &forcing))
    })
}

/// Self-convergence study of an unforced config: the error of level `k` is
/// its final-state distance to level `k + 1`, so `count + 1` runs are made.
pub fn self_convergence_study(cfg: &ValidatedConfig, refinement: Refinement, count: usize) -> Result<RefinementStudy> {
    let levels = refinement.levels(cfg.n_cells, cfg.dt, count + 1);
    let finals = levels
        .par_iter()
        .map(|&(n, dt)| Ok(run_simulation(&with_resolution(cfg, n, dt)?)?.last().clone()))
        .collect::<Result<Vec<State>>>()?;
    let errors = finals.windows(2).map(|w| state_distance(&w[0], &w[1])).collect();
    let mut levels = levels;
    levels.pop();
    if levels.len() < 3 {
        return Err(Error::DegenerateStudy(format!(
            "{} levels given, at least 3 required",
            levels.len()
        )));
    }
    Ok(RefinementStudy::new(levels, errors))
}

/// Runs `cfg` and a copy with `v0 + δ` (interior nodes), `g0 + δ` and
/// `h0 + δ`; returns the largest state distance over the common samples.
pub fn continuity_probe(cfg: &ValidatedConfig, delta: f64) -> Result<f64> {
    if cfg.forcing.is_some() {
        return Err(Error::NotApplicable(
            "perturbed data would no longer match the manufactured solution".into(),
        ));
    }
    let base = run_simulation(cfg)?;
    let start = initialize_state(cfg)?;
    let last = start.v.len() - 1;
    let mut values = start.v;
    for x in &mut values[1..last] {
        *x += delta;
    }
    let perturbed = SimConfig {
        h0: cfg.h0 + delta,
        g0: cfg.g0 + delta,
        v0: InitialProfile::Samples { values },
        ..cfg.config().clone()
    };
    let other = run_simulation(&validate_config(perturbed)?)?;
    Ok(base
        .states
        .iter()
        .zip(&other.states)
        .map(|(a, b)| state_distance(a, b))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scheme;

    #[test]
    fn order_examples() {
        let s = RefinementStudy::new(vec![(8, 0.1), (16, 0.05), (32, 0.025)], vec![4e-2, 1e-2, 2.5e-3]);
        assert!((convergence_order(&s).unwrap() - 2.0).abs() < 1e-12);
        let s = RefinementStudy::new(vec![(8, 0.1), (16, 0.05), (32, 0.025)], vec![2e-2, 1e-2, 5e-3]);
        assert!((convergence_order(&s).unwrap() - 1.0).abs() < 1e-12);
        let s = RefinementStudy::new(vec![(8, 0.1), (16, 0.05), (32, 0.025)], vec![0.0, 0.0, 0.0]);
        assert!(matches!(convergence_order(&s), Err(Error::DegenerateStudy(_))));
    }

    #[test]
    fn median_of_even_count() {
        let s = RefinementStudy::new(vec![(4, 1.0); 5], vec![16.0, 8.0, 2.0, 1.0, 0.5]);
        assert_eq!(s.orders, vec![1.0, 2.0, 1.0, 1.0]);
        assert_eq!(convergence_order(&s).unwrap(), 1.0);
    }

    #[test]
    fn level_generators() {
        assert_eq!(Refinement::Uniform.levels(16, 0.1, 3), vec![(16, 0.1), (32, 0.05), (64, 0.025)]);
        assert_eq!(Refinement::Diffusive.levels(8, 1.0, 3), vec![(8, 1.0), (16, 0.25), (32, 0.0625)]);
        assert_eq!(Refinement::Temporal.levels(8, 1.0, 2), vec![(8, 1.0), (8, 0.5)]);
    }

    #[test]
    fn too_few_levels() {
        let r = run_study(vec![(8, 0.1), (16, 0.05)], |_, _| Ok(1.0));
        assert!(matches!(r, Err(Error::DegenerateStudy(_))));
    }

    fn equilibrium() -> ValidatedConfig {
        validate_config(SimConfig::new(5.0, 0.2, 0.2, 0.0, InitialProfile::Zero).with_grid(8, 1e-2, 0.2)).unwrap()
    }

    #[test]
    fn equilibrium_reference_is_equilibrium() {
        let traj = reference_solve(&equilibrium(), 4).unwrap();
        assert_eq!(traj.first().n_cells(), 32);
        assert!(traj.states.iter().all(|s| s.h == 0.2 && s.v.iter().all(|&x| x == 0.0)));
        assert!(matches!(reference_solve(&equilibrium(), 2), Err(Error::Domain(_))));
    }

    #[test]
    fn continuity_probe_examples() {
        assert_eq!(continuity_probe(&equilibrium(), 0.0).unwrap(), 0.0);
        let m = continuity_probe(&equilibrium(), 1e-6).unwrap();
        assert!(m > 1e-7 && m < 1e-5, "metric {m}");
    }

    #[test]
    fn continuity_probe_scales_linearly() {
        let cfg = validate_config(
            SimConfig::new(1.0, 0.0, 0.1, 0.2, InitialProfile::Sine { amplitude: 1.0, mode: 1.0 })
                .with_grid(16, 1e-2, 0.5),
        )
        .unwrap();
        let a = continuity_probe(&cfg, 1e-4).unwrap();
        let b = continuity_probe(&cfg, 5e-5).unwrap();
        assert!((a / b - 2.0).abs() < 0.05, "ratio {}", a / b);
    }

    #[test]
    fn state_distance_on_nested_grids() {
        let coarse = State { t: 0.0, v: vec![0.0, 1.0, 2.0, 1.0, 0.0], h: 0.1, g: 2.0 };
        let mut fine_v = vec![0.0; 9];
        for i in 0..5 {
            fine_v[2 * i] = coarse.v[i];
        }
        fine_v[1] = 100.0;
        let fine = State { t: 0.0, v: fine_v, h: 0.1, g: 2.0 };
        assert_eq!(state_distance(&coarse, &fine), 0.0);
    }

    #[test]
    fn mms_error_is_zero_at_start() {
        let forcing = Forcing::PinnedParticle { amplitude: 1.0 };
        let mut c = SimConfig::new(0.0, 0.0, 0.0, 0.0, InitialProfile::Manufactured).with_grid(8, 1e-2, 0.1);
        c.forcing = Some(forcing.clone());
        c.scheme = Scheme::CrankNicolsonPicard;
        let cfg = validate_config(c).unwrap();
        let s0 = initialize_state(&cfg).unwrap();
        assert!(mms_state_error(&s0, &forcing) < 1e-15);
    }
}
