//! First-order Godunov finite-volume solver for the 2-D isothermal Euler
//! system with generalized Riemann initial data: a plane two-shock fan
//! perturbed inside the unit disk and along the interface `x = εΠ(y)`.

mod cone;
mod field;
mod flux;
mod setup;
mod solver;

pub use cone::{
    support_radius_check, support_radius_check_radius, ConeForm, SupportCheck, SupportCone,
};
pub use field::{ConservedField, Primitive};
pub use flux::{godunov_flux, godunov_flux_with_tracer, Axis};
pub use setup::{
    bump, initial_hypotheses, make_initial_data, Background, DefaultFamily, HypothesisReport,
    PerturbationFields, PerturbationSpec,
};
pub use solver::{cfl_dt, step, RunOptions, Simulation, DEFAULT_CFL, MAX_TIME};

use crate::error::{Error, Result};

/// Uniform cell-centred grid on `[−lx, lx] × [−ly, ly]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) || nx == 0 || ny == 0 {
            return Err(Error::Validation(format!(
                "grid needs positive extents and cell counts, got lx = {lx}, ly = {ly}, nx = {nx}, ny = {ny}"
            )));
        }
        Ok(Self { lx, ly, nx, ny })
    }

    /// Square cells of side `h` on `[−lx, lx] × [−ly, ly]`; the extents are
    /// rounded up to whole cells.
    pub fn with_spacing(lx: f64, ly: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Validation(format!(
                "cell size must be positive, got {h}"
            )));
        }
        let half_x = (lx / h - 1e-9).ceil() as usize;
        let half_y = (ly / h - 1e-9).ceil() as usize;
        Self::new(half_x as f64 * h, half_y as f64 * h, 2 * half_x, 2 * half_y)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.ly / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x_center(&self, i: usize) -> f64 {
        -self.lx + (i as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, j: usize) -> f64 {
        -self.ly + (j as f64 + 0.5) * self.dy()
    }

    /// Left edge of column `i` (`i = nx` gives the right boundary).
    pub fn x_face(&self, i: usize) -> f64 {
        -self.lx + i as f64 * self.dx()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Distance from the origin to the nearest point of cell `(i, j)`.
    pub fn cell_min_radius(&self, i: usize, j: usize) -> f64 {
        let (hx, hy) = (0.5 * self.dx(), 0.5 * self.dy());
        let gx = (self.x_center(i).abs() - hx).max(0.0);
        let gy = (self.y_center(j).abs() - hy).max(0.0);
        gx.hypot(gy)
    }

    pub fn contains_disk(&self, radius: f64) -> bool {
        self.lx >= radius && self.ly >= radius
    }

    /// Checks that the unit disk carrying the perturbation is resolved by at
    /// least `cells` cells across in each direction.
    pub fn check_resolves_unit_disk(&self, cells: usize) -> Result<()> {
        let across_x = 2.0 / self.dx();
        let across_y = 2.0 / self.dy();
        if across_x + 1e-9 < cells as f64 || across_y + 1e-9 < cells as f64 {
            return Err(Error::Validation(format!(
                "grid resolves the unit disk with {across_x:.1} x {across_y:.1} cells, need at least {cells}"
            )));
        }
        if !self.contains_disk(1.0) {
            return Err(Error::Validation(
                "grid does not contain the unit disk".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let g = Grid2D::new(2.0, 1.0, 4, 2).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.x_center(0), -1.5);
        assert_eq!(g.y_center(1), 0.5);
        assert_eq!(g.x_face(4), 2.0);
        assert_eq!(g.cell_min_radius(1, 0), 0.0);
        assert_eq!(g.cell_min_radius(3, 1), 1.0);
        assert!(Grid2D::new(0.0, 1.0, 1, 1).is_err());
        assert!(Grid2D::new(1.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn spacing_rounds_up() {
        let g = Grid2D::with_spacing(6.0, 5.5, 0.25).unwrap();
        assert_eq!((g.nx, g.ny), (48, 44));
        assert_eq!(g.dx(), 0.25);
        let g = Grid2D::with_spacing(1.0, 1.0, 0.3).unwrap();
        assert!(g.lx >= 1.0 && (g.dx() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn unit_disk_resolution() {
        assert!(Grid2D::with_spacing(2.0, 2.0, 0.1)
            .unwrap()
            .check_resolves_unit_disk(20)
            .is_ok());
        assert!(Grid2D::with_spacing(2.0, 2.0, 0.2)
            .unwrap()
            .check_resolves_unit_disk(20)
            .is_err());
    }
}
