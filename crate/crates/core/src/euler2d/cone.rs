use super::field::ConservedField;
use super::setup::Background;
use crate::error::{Error, Result};

/// Finite-propagation cone for the transverse velocity.
///
/// `AllTime` is `x² + y² ≤ (C₀t + 1)²`; `Late` is `x² + y² ≤ (t + C₁)²`
/// for `t ≥ t₀` with `C₁ = (C₀ − 1)t₀ + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportCone {
    pub c0: f64,
    pub c1: f64,
    pub t0: f64,
    /// Far-field radius outside which the deviation from the background is
    /// monitored.
    pub r_far: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeForm {
    AllTime,
    Late,
}

impl SupportCone {
    pub fn new(c0: f64, t0: f64, r_far: f64) -> Result<Self> {
        if !(c0 >= 1.0 && t0 >= 0.0 && r_far >= 0.0) || !(c0.is_finite() && t0.is_finite()) {
            return Err(Error::Validation(format!(
                "support cone needs C0 >= 1, t0 >= 0, R >= 0, got C0 = {c0}, t0 = {t0}, R = {r_far}"
            )));
        }
        Ok(Self {
            c0,
            c1: (c0 - 1.0) * t0 + 1.0,
            t0,
            r_far,
        })
    }

    /// `C₀ = 1 + max(|u_l|, |u_r|)` and `t₀ = 1`; `R` defaults to `C₁`.
    pub fn for_background(bg: &Background) -> Self {
        let c0 = 1.0 + bg.left().u.abs().max(bg.right().u.abs());
        let t0 = 1.0;
        let c1 = (c0 - 1.0) * t0 + 1.0;
        Self::new(c0, t0, c1).expect("background speeds are finite")
    }

    pub fn radius(&self, t: f64, form: ConeForm) -> f64 {
        match form {
            ConeForm::AllTime => self.c0 * t + 1.0,
            ConeForm::Late => t + self.c1,
        }
    }

    /// The tighter of the two forms valid at `t`.
    pub fn best_radius(&self, t: f64) -> f64 {
        if t >= self.t0 {
            self.radius(t, ConeForm::AllTime)
                .min(self.radius(t, ConeForm::Late))
        } else {
            self.radius(t, ConeForm::AllTime)
        }
    }
}

/// Result of scanning for transverse velocity outside a cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportCheck {
    pub ok: bool,
    pub max_violation: f64,
    /// Cell holding the largest `|v|` outside the cone.
    pub location: Option<(usize, usize)>,
    pub radius: f64,
}

/// Max `|v|` over cells lying entirely outside the disk of the given radius.
pub fn support_radius_check_radius(field: &ConservedField, radius: f64, tol: f64) -> SupportCheck {
    let g = &field.grid;
    let mut worst = 0.0_f64;
    let mut location = None;
    for j in 0..g.ny {
        for i in 0..g.nx {
            if g.cell_min_radius(i, j) <= radius {
                continue;
            }
            let q = field.at(i, j);
            let v = (q[2] / q[0]).abs();
            if v > worst || (v.is_nan() && !worst.is_nan()) {
                worst = v;
                location = Some((i, j));
            }
        }
    }
    SupportCheck {
        ok: worst <= tol,
        max_violation: worst,
        location,
        radius,
    }
}

/// Finite-propagation check of the field against `cone` in the given form.
pub fn support_radius_check(
    field: &ConservedField,
    cone: &SupportCone,
    form: ConeForm,
    tol: f64,
) -> SupportCheck {
    support_radius_check_radius(field, cone.radius(field.t, form), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler2d::{Grid2D, Primitive};

    #[test]
    fn c1_relation() {
        let c = SupportCone::new(2.0, 1.5, 3.0).unwrap();
        assert_eq!(c.c1, 2.5);
        assert_eq!(c.radius(2.0, ConeForm::AllTime), 5.0);
        assert_eq!(c.radius(2.0, ConeForm::Late), 4.5);
        assert_eq!(c.best_radius(2.0), 4.5);
        assert_eq!(c.best_radius(1.0), 3.0);
        assert!(SupportCone::new(0.5, 1.0, 1.0).is_err());
        let d = SupportCone::for_background(&Background::symmetric());
        assert_eq!((d.c0, d.c1, d.t0), (2.0, 2.0, 1.0));
    }

    #[test]
    fn scan_reports_violation() {
        let grid = Grid2D::new(4.0, 4.0, 8, 8).unwrap();
        let mut f = ConservedField::uniform(grid, Primitive::new(1.0, 0.0, 0.0, 1.0));
        let cone = SupportCone::new(2.0, 1.0, 2.0).unwrap();
        assert!(support_radius_check(&f, &cone, ConeForm::AllTime, 0.0).ok);
        // cell (7, 4) spans x ∈ [3, 4], y ∈ [0, 1]
        f.cells[grid.index(7, 4)][2] = 0.3;
        let c = support_radius_check(&f, &cone, ConeForm::AllTime, 1e-8);
        assert!(!c.ok);
        assert_eq!(c.location, Some((7, 4)));
        assert_eq!(c.max_violation, 0.3);
        f.t = 1.0;
        assert!(support_radius_check(&f, &cone, ConeForm::AllTime, 1e-8).ok);
    }
}
