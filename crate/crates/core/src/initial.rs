//! Initial densities built from boxes, smooth bumps and point masses.

use crate::grid::{project, DGState, PhaseGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    /// `amplitude` on the open box `x.0 < x < x.1`, `v.0 < v < v.1`.
    Box {
        x: (f64, f64),
        v: (f64, f64),
        amplitude: f64,
    },
    /// `exp(-1 / (r2 - x^2 - v^2))` inside the disc `x^2 + v^2 < r2`.
    Bump {
        radius_sq: f64,
    },
    /// `mass * delta(x - x0) delta(v - v0)`, placed as the average of the
    /// containing cell.
    Point {
        x: f64,
        v: f64,
        mass: f64,
    },
    Constant {
        value: f64,
    },
}

impl Component {
    fn density(&self, x: f64, v: f64) -> f64 {
        match *self {
            Component::Box {
                x: (x0, x1),
                v: (v0, v1),
                amplitude,
            } => {
                if x0 < x && x < x1 && v0 < v && v < v1 {
                    amplitude
                } else {
                    0.0
                }
            }
            Component::Bump { radius_sq } => {
                let r2 = x * x + v * v;
                if r2 < radius_sq {
                    (-1.0 / (radius_sq - r2)).exp()
                } else {
                    0.0
                }
            }
            Component::Constant { value } => value,
            Component::Point { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialCondition {
    pub components: Vec<Component>,
}

impl InitialCondition {
    pub fn new(components: Vec<Component>) -> Self {
        Self { components }
    }

    /// Pointwise density of the non-singular components.
    pub fn density(&self, x: f64, v: f64) -> f64 {
        self.components.iter().map(|c| c.density(x, v)).sum()
    }

    pub fn project(&self, grid: &PhaseGrid) -> DGState {
        let has_density = self
            .components
            .iter()
            .any(|c| !matches!(c, Component::Point { .. }));
        let mut state = if has_density {
            project(|x, v| self.density(x, v), grid)
        } else {
            DGState::zeros(grid)
        };
        let cell_area = grid.dx() * grid.h();
        for c in &self.components {
            if let Component::Point { x, v, mass } = *c {
                let i = grid.x_cell_of(x);
                let j = grid.v_cell_of(v);
                let avg = state.get(i, j, 0) + mass / cell_area;
                state.set(i, j, 0, avg);
            }
        }
        state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::total_mass;

    #[test]
    fn point_mass_lands_in_one_cell() {
        let grid = PhaseGrid::new((-1.02, 6.98), 200, (-0.25, 1.25), 75, 2).unwrap();
        let ic = InitialCondition::new(vec![Component::Point {
            x: 5.0,
            v: 1.0,
            mass: 0.98,
        }]);
        let s = ic.project(&grid);
        let (i, j) = (grid.x_cell_of(5.0), grid.v_cell_of(1.0));
        assert_eq!((i, j), (150, 62));
        assert!((s.get(i, j, 0) - 0.98 / (grid.dx() * grid.h())).abs() < 1e-9);
        assert!((total_mass(&s, &grid) - 0.98).abs() < 1e-13);
        assert_eq!(s.coeffs().iter().filter(|&&c| c != 0.0).count(), 1);
    }

    #[test]
    fn bump_vanishes_outside_disc() {
        let ic = InitialCondition::new(vec![Component::Bump { radius_sq: 0.9 }]);
        assert_eq!(ic.density(1.0, 0.0), 0.0);
        assert!((ic.density(0.0, 0.0) - (-1.0f64 / 0.9).exp()).abs() < 1e-15);
    }
}
