//! Interface-fitted coordinates.
//!
//! The fluid occupies `(-1, h) ∪ (h, 1)`. Each side is the affine image of a
//! fixed half of the reference interval `[-1, 1]`, with the particle pinned to
//! the reference node `ξ = 0`:
//!
//! ```text
//!   ξ ∈ [-1, 0]:  y = -1 + (ξ + 1)(1 + h)
//!   ξ ∈ [ 0, 1]:  y =  h + ξ (1 - h)
//! ```
//!
//! Both pieces have constant Jacobians `1 + h` and `1 - h`, so operators
//! assembled on the reference grid stay tridiagonal whatever `h` is.

use crate::error::{Error, Result};

/// Which side of the particle a point or element lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Uniform nodes on `[-1, 0]` and `[0, 1]`, `n_cells` cells on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGrid {
    n_cells: usize,
    xi: Vec<f64>,
}

impl ReferenceGrid {
    pub fn new(n_cells: usize) -> Self {
        assert!(n_cells >= 1, "reference grid needs at least one cell per side");
        let n = n_cells as f64;
        let xi = (0..=2 * n_cells)
            .map(|i| (i as f64 - n) / n)
            .collect::<Vec<_>>();
        Self { n_cells, xi }
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Total number of nodes, `2 n_cells + 1`.
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Index of the particle node (`ξ = 0`).
    pub fn particle_index(&self) -> usize {
        self.n_cells
    }

    /// Reference cell width, identical on both sides.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xi
    }

    pub fn node(&self, i: usize) -> f64 {
        self.xi[i]
    }

    /// Number of elements, `2 n_cells`.
    pub fn n_elements(&self) -> usize {
        2 * self.n_cells
    }

    /// Side of element `e` (spanning nodes `e` and `e + 1`).
    pub fn element_side(&self, e: usize) -> Side {
        if e < self.n_cells {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// Geometry of the fluid domain at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySnapshot {
    pub h: f64,
    /// Particle velocity; drives the mesh motion.
    pub g: f64,
    pub j_left: f64,
    pub j_right: f64,
}

impl GeometrySnapshot {
    pub fn new(h: f64, g: f64) -> Result<Self> {
        let j_left = 1.0 + h;
        let j_right = 1.0 - h;
        if !(j_left > 0.0 && j_right > 0.0) || !g.is_finite() {
            return Err(Error::Geometry { h });
        }
        Ok(Self {
            h,
            g,
            j_left,
            j_right,
        })
    }

    pub fn jacobian(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.j_left,
            Side::Right => self.j_right,
        }
    }

    /// Mesh velocity at every node of `grid`.
    pub fn mesh_velocities(&self, grid: &ReferenceGrid) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|&xi| mesh_velocity(xi, self.g))
            .collect()
    }

    /// Physical positions of every node of `grid`.
    pub fn physical_nodes(&self, grid: &ReferenceGrid) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|&xi| physical_unchecked(xi, self.h))
            .collect()
    }
}

fn check_position(h: f64) -> Result<()> {
    if h.is_finite() && h > -1.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("particle position {h} outside (-1, 1)")))
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} outside [-1, 1]")))
    }
}

fn physical_unchecked(xi: f64, h: f64) -> f64 {
    if xi == 0.0 {
        h
    } else if xi == 1.0 {
        1.0
    } else if xi < 0.0 {
        -1.0 + (xi + 1.0) * (1.0 + h)
    } else {
        h + xi * (1.0 - h)
    }
}

/// Reference coordinate to physical coordinate.
pub fn map_to_physical(xi: f64, h: f64) -> Result<f64> {
    check_unit("xi", xi)?;
    check_position(h)?;
    Ok(physical_unchecked(xi, h))
}

/// Physical coordinate to reference coordinate; inverse of [`map_to_physical`].
pub fn map_to_reference(y: f64, h: f64) -> Result<f64> {
    check_unit("y", y)?;
    check_position(h)?;
    Ok(if y == h {
        0.0
    } else if y < h {
        (y + 1.0) / (1.0 + h) - 1.0
    } else {
        (y - h) / (1.0 - h)
    })
}

/// Velocity of the reference node `xi` when the particle moves at `g`.
///
/// Linear on each side, zero at the walls, equal to `g` at the particle.
pub fn mesh_velocity(xi: f64, g: f64) -> f64 {
    if xi <= 0.0 {
        (xi + 1.0) * g
    } else {
        (1.0 - xi) * g
    }
}

/// The hat-shaped test function: 1 at the particle, 0 at both walls, linear
/// on each side.
pub fn eval_phi(y: f64, h: f64) -> Result<f64> {
    check_unit("y", y)?;
    check_position(h)?;
    Ok(if y == h {
        1.0
    } else if y < h {
        (y + 1.0) / (1.0 + h)
    } else {
        (1.0 - y) / (1.0 - h)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn physical_map_examples() {
        assert_eq!(map_to_physical(0.0, 0.3).unwrap(), 0.3);
        assert_eq!(map_to_physical(-0.5, 0.0).unwrap(), -0.5);
        assert_eq!(map_to_physical(0.5, 0.5).unwrap(), 0.75);
        assert_eq!(map_to_physical(-1.0, 0.7).unwrap(), -1.0);
        assert_eq!(map_to_physical(1.0, -0.7).unwrap(), 1.0);
    }

    #[test]
    fn reference_map_examples() {
        for h in [-0.6, 0.0, 0.45] {
            assert_eq!(map_to_reference(h, h).unwrap(), 0.0);
        }
        assert_eq!(map_to_reference(-1.0, 0.9).unwrap(), -1.0);
        assert_eq!(map_to_reference(0.75, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn out_of_range_inputs_are_domain_errors() {
        assert!(matches!(map_to_physical(1.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(map_to_physical(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(map_to_reference(-1.2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(eval_phi(0.0, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn mesh_velocity_examples() {
        assert_eq!(mesh_velocity(0.0, 2.0), 2.0);
        assert_eq!(mesh_velocity(-1.0, 5.0), 0.0);
        assert_eq!(mesh_velocity(1.0, 5.0), 0.0);
        assert_eq!(mesh_velocity(0.5, 1.0), 0.5);
    }

    #[test]
    fn phi_examples() {
        for h in [-0.3, 0.0, 0.8] {
            assert_eq!(eval_phi(h, h).unwrap(), 1.0);
        }
        assert_eq!(eval_phi(0.5, 0.0).unwrap(), 0.5);
        approx::assert_relative_eq!(eval_phi(-0.5, 0.5).unwrap(), 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn grid_layout() {
        let grid = ReferenceGrid::new(8);
        assert_eq!(grid.len(), 17);
        assert_eq!(grid.node(0), -1.0);
        assert_eq!(grid.node(8), 0.0);
        assert_eq!(grid.node(16), 1.0);
        for i in 0..grid.len() {
            assert_eq!(grid.node(i), -grid.node(grid.len() - 1 - i));
        }
        assert!(grid.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degenerate_geometry_rejected() {
        assert!(matches!(
            GeometrySnapshot::new(1.0, 0.0),
            Err(Error::Geometry { .. })
        ));
        let geom = GeometrySnapshot::new(0.25, 1.0).unwrap();
        assert_eq!(geom.j_left + geom.j_right, 2.0);
    }

    #[test]
    fn round_trip_on_grid_nodes() {
        let grid = ReferenceGrid::new(64);
        for k in -9..=9 {
            let h = k as f64 / 10.0;
            for &xi in grid.nodes() {
                let y = map_to_physical(xi, h).unwrap();
                let back = map_to_reference(y, h).unwrap();
                assert!(
                    (back - xi).abs() <= 4.0 * f64::EPSILON,
                    "h = {h}, xi = {xi}, back = {back}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn phi_is_bounded(y in -1.0f64..=1.0, h in -0.999f64..0.999) {
            let phi = eval_phi(y, h).unwrap();
            prop_assert!((0.0..=1.0).contains(&phi));
        }

        #[test]
        fn phi_vanishes_at_walls(h in -0.999f64..0.999) {
            prop_assert_eq!(eval_phi(-1.0, h).unwrap(), 0.0);
            prop_assert_eq!(eval_phi(1.0, h).unwrap(), 0.0);
        }

        #[test]
        fn round_trip_anywhere(xi in -1.0f64..=1.0, h in -0.99f64..0.99) {
            let y = map_to_physical(xi, h).unwrap();
            let back = map_to_reference(y, h).unwrap();
            // rounding in y is amplified by 1/J on the way back
            let scale = 1.0f64.max(1.0 / (1.0 - h.abs()));
            prop_assert!((back - xi).abs() <= 4.0 * f64::EPSILON * scale);
        }

        #[test]
        fn mesh_velocity_is_linear_in_g(xi in -1.0f64..=1.0, a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let lhs = mesh_velocity(xi, a + b);
            let rhs = mesh_velocity(xi, a) + mesh_velocity(xi, b);
            prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + lhs.abs()));
        }
    }
}
