use crate::config::{InitialProfile, ValidatedConfig};
use crate::error::{Error, Result};
use crate::geometry::{GeometrySnapshot, ReferenceGrid};

/// Discrete solution at one instant.
///
/// `v` holds nodal velocities on the reference grid. The particle node
/// carries `g` itself, so the trace condition `g = v(h)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub v: Vec<f64>,
    pub h: f64,
    pub g: f64,
}

impl State {
    pub fn n_cells(&self) -> usize {
        (self.v.len() - 1) / 2
    }

    pub fn particle_index(&self) -> usize {
        self.n_cells()
    }

    pub fn grid(&self) -> ReferenceGrid {
        ReferenceGrid::new(self.n_cells())
    }

    pub fn geometry(&self) -> Result<GeometrySnapshot> {
        GeometrySnapshot::new(self.h, self.g)
    }

    /// Checks the wall, trace and position invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let last = self.v.len() - 1;
        if self.v[0] != 0.0 || self.v[last] != 0.0 {
            return Err(Error::Domain("wall velocities must vanish".into()));
        }
        if self.v[self.particle_index()] != self.g {
            return Err(Error::Domain("particle node must carry g".into()));
        }
        if !(self.h > -1.0 && self.h < 1.0) {
            return Err(Error::CollisionAbort { t: self.t, h: self.h });
        }
        Ok(())
    }
}

/// Time-ordered states with the accumulated viscous dissipation
/// `2 ∫₀ᵗ ∫ v_y²` and the control applied at each recorded time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub dissipation_cum: Vec<f64>,
    pub controls: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub(crate) fn push(&mut self, state: State, dissipation: f64, control: f64) {
        self.states.push(state);
        self.dissipation_cum.push(dissipation);
        self.controls.push(control);
    }
}

/// Builds the state at `t = 0`: `v0` sampled at the mapped nodes, walls
/// zeroed, particle node overwritten with `g0`.
pub fn initialize_state(cfg: &ValidatedConfig) -> Result<State> {
    let grid = ReferenceGrid::new(cfg.n_cells);
    let geom = GeometrySnapshot::new(cfg.h0, cfg.g0)?;
    let ys = geom.physical_nodes(&grid);

    let mut v = match &cfg.v0 {
        InitialProfile::Samples { values } => values.clone(),
        InitialProfile::Manufactured => {
            let forcing = cfg
                .forcing
                .as_ref()
                .expect("validated: manufactured profile has a forcing");
            grid.nodes().iter().map(|&xi| forcing.profile(0.0, xi)).collect()
        }
        profile => ys
            .iter()
            .map(|&y| profile.eval(y).expect("analytic profile"))
            .collect(),
    };

    if let Some(node) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::Evaluation { node, y: ys[node] });
    }

    let last = v.len() - 1;
    v[0] = 0.0;
    v[last] = 0.0;
    v[grid.particle_index()] = cfg.g0;

    Ok(State {
        t: 0.0,
        v,
        h: cfg.h0,
        g: cfg.g0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, SimConfig};

    fn cfg(h0: f64, g0: f64, v0: InitialProfile) -> ValidatedConfig {
        validate_config(SimConfig::new(0.0, 0.0, h0, g0, v0).with_grid(16, 1e-3, 1.0)).unwrap()
    }

    #[test]
    fn zero_data() {
        let s = initialize_state(&cfg(0.2, 0.0, InitialProfile::Zero)).unwrap();
        assert!(s.v.iter().all(|&x| x == 0.0));
        assert_eq!((s.h, s.g, s.t), (0.2, 0.0, 0.0));
        s.check_invariants().unwrap();
    }

    #[test]
    fn sine_profile_pins_particle_and_walls() {
        let s = initialize_state(&cfg(0.0, 0.0, InitialProfile::Sine { amplitude: 1.0, mode: 1.0 })).unwrap();
        assert_eq!(s.v[16], 0.0);
        assert_eq!(s.v[0], 0.0);
        assert_eq!(s.v[32], 0.0);
        s.check_invariants().unwrap();
    }

    #[test]
    fn particle_velocity_overrides_sample() {
        let c = cfg(0.0, 0.5, InitialProfile::Parabola { amplitude: 1.0 });
        let s = initialize_state(&c).unwrap();
        assert_eq!(s.v[16], 0.5);
        // pointwise-sampling oracle: every other node equals 1 − y²
        let grid = ReferenceGrid::new(16);
        let mut differing = Vec::new();
        for (i, &xi) in grid.nodes().iter().enumerate() {
            let y = crate::geometry::map_to_physical(xi, 0.0).unwrap();
            let mut sample = 1.0 - y * y;
            if i == 0 || i == 32 {
                sample = 0.0;
            }
            if s.v[i] != sample {
                differing.push(i);
            }
        }
        assert_eq!(differing, vec![16]);
    }

    #[test]
    fn non_finite_samples_rejected() {
        let mut values = vec![0.0; 33];
        values[5] = f64::NAN;
        let c = cfg(0.0, 0.0, InitialProfile::Samples { values });
        assert!(matches!(initialize_state(&c), Err(Error::Evaluation { node: 5, .. })));
    }

    #[test]
    fn deterministic() {
        let c = cfg(-0.3, 0.1, InitialProfile::Sine { amplitude: 0.7, mode: 2.0 });
        let a = initialize_state(&c).unwrap();
        let b = initialize_state(&c).unwrap();
        assert!(a.v.iter().zip(&b.v).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
