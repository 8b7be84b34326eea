use std::fmt::Debug;
use std::sync::Arc;

use rayon::prelude::*;

use super::field::{ConservedField, Primitive};
use super::Grid2D;
use crate::error::{Error, Result};
use crate::riemann::{check_entropy, solve_middle_state, GasState, RiemannFan, DEFAULT_TOL};

/// Unperturbed plane two-shock solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    pub fan: RiemannFan,
}

impl Background {
    /// Solves the fan for `(ρ_l, u_l) | (ρ_r, u_r)` and requires it to be an
    /// admissible two-shock configuration.
    pub fn new(rho_l: f64, u_l: f64, rho_r: f64, u_r: f64) -> Result<Self> {
        let fan = solve_middle_state(
            GasState::new(rho_l, u_l, 0.0),
            GasState::new(rho_r, u_r, 0.0),
            DEFAULT_TOL,
        )?;
        let report = check_entropy(&fan);
        if !report.is_admissible() {
            return Err(Error::Validation(format!(
                "background ({rho_l}, {u_l}) | ({rho_r}, {u_r}) is not an admissible two-shock fan: {:?}",
                report.verdict
            )));
        }
        Ok(Self { fan })
    }

    /// `ρ_l = ρ_r = 1`, `u_l = 1`, `u_r = −1`.
    pub fn symmetric() -> Self {
        Self::new(1.0, 1.0, 1.0, -1.0).expect("symmetric background is admissible")
    }

    pub fn left(&self) -> GasState {
        self.fan.left
    }

    pub fn right(&self) -> GasState {
        self.fan.right
    }

    pub fn rho_m(&self) -> f64 {
        self.fan.middle.rho
    }

    /// Exact background state `(ρ, u, 0)` at `(t, x)`.
    pub fn sample(&self, t: f64, x: f64) -> GasState {
        let s = if t > 0.0 {
            self.fan.sample(x / t)
        } else if x < 0.0 {
            self.fan.left
        } else {
            self.fan.right
        };
        GasState::new(s.rho, s.u, 0.0)
    }

    /// Background state with the tracer value `−1` left of the contact and
    /// `+1` right of it.
    pub fn sample_primitive(&self, t: f64, x: f64) -> Primitive {
        let phi = if x < self.fan.contact_speed * t {
            -1.0
        } else {
            1.0
        };
        Primitive::from_gas(self.sample(t, x), phi)
    }

    /// Shock positions `(σ₋t, σ₊t)`.
    pub fn shock_positions(&self, t: f64) -> (f64, f64) {
        (self.fan.sigma_minus * t, self.fan.sigma_plus * t)
    }

    /// Exact `∫_{x0}^{x1} ρ_bg(t, x) dx` for the piecewise-constant fan.
    pub fn rho_integral(&self, t: f64, x0: f64, x1: f64) -> f64 {
        let (a, b) = self.shock_positions(t);
        let seg = |lo: f64, hi: f64| (hi.min(x1) - lo.max(x0)).max(0.0);
        self.fan.left.rho * seg(f64::NEG_INFINITY, a)
            + self.fan.middle.rho * seg(a, b)
            + self.fan.right.rho * seg(b, f64::INFINITY)
    }
}

/// Perturbation profile: interface shape `Π(y)` and the fields `ρ₀`, `u₀`,
/// `v₀`. Implementations must vanish outside `|y| ≤ 1` (for `Π`) and the unit
/// disk (for the fields).
pub trait PerturbationFields: Debug + Send + Sync {
    fn interface(&self, y: f64) -> f64;
    fn rho0(&self, x: f64, y: f64) -> f64;
    fn u0(&self, x: f64, y: f64) -> f64;
    fn v0(&self, x: f64, y: f64) -> f64;
}

/// `ψ(r) = (1 − r²)⁴` inside the unit disk.
pub fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        let s = 1.0 - r2;
        let s2 = s * s;
        s2 * s2
    } else {
        0.0
    }
}

/// `ρ₀ = aψ`, `u₀ = 0`, `v₀ = b·y·ψ`, `Π(y) = A(1 − y²)⁴`.
///
/// With `a ≥ 0` and `b > 0` the weighted mass hypothesis integrand is
/// nonnegative and the weighted momentum integrand `(e^y − e^{−y})·y` is too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultFamily {
    pub a: f64,
    pub b: f64,
    pub pi_amplitude: f64,
}

impl Default for DefaultFamily {
    fn default() -> Self {
        Self {
            a: 0.5,
            b: 1.0,
            pi_amplitude: 0.5,
        }
    }
}

impl PerturbationFields for DefaultFamily {
    fn interface(&self, y: f64) -> f64 {
        self.pi_amplitude * bump(y * y)
    }

    fn rho0(&self, x: f64, y: f64) -> f64 {
        self.a * bump(x * x + y * y)
    }

    fn u0(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }

    fn v0(&self, x: f64, y: f64) -> f64 {
        self.b * y * bump(x * x + y * y)
    }
}

/// Amplitude, background and perturbation fields of a generalized Riemann
/// problem.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub background: Background,
    pub fields: Arc<dyn PerturbationFields>,
}

impl PerturbationSpec {
    pub fn new(
        epsilon: f64,
        background: Background,
        fields: Arc<dyn PerturbationFields>,
    ) -> Result<Self> {
        let spec = Self {
            epsilon,
            background,
            fields,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default family on the symmetric background.
    pub fn symmetric_default(epsilon: f64) -> Result<Self> {
        Self::new(
            epsilon,
            Background::symmetric(),
            Arc::new(DefaultFamily::default()),
        )
    }

    /// Probes the supports on rings just outside the unit disk and the
    /// interface beyond `|y| = 1`, and checks that the perturbed states stay
    /// physical inside.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Validation(format!(
                "epsilon must be finite and nonnegative, got {}",
                self.epsilon
            )));
        }
        let f = &self.fields;
        for &gap in &[1e-9, 1e-3, 0.05, 0.3, 1.0, 5.0] {
            let y = 1.0 + gap;
            for y in [y, -y] {
                let pi = f.interface(y);
                if pi != 0.0 {
                    return Err(Error::Validation(format!(
                        "interface profile is {pi} at y = {y}, outside |y| <= 1"
                    )));
                }
            }
            let r = 1.0 + gap;
            for k in 0..256 {
                let th = k as f64 * std::f64::consts::TAU / 256.0;
                let (x, y) = (r * th.cos(), r * th.sin());
                for (name, value) in [
                    ("rho0", f.rho0(x, y)),
                    ("u0", f.u0(x, y)),
                    ("v0", f.v0(x, y)),
                ] {
                    if value != 0.0 {
                        return Err(Error::Validation(format!(
                            "{name} is {value} at ({x:.4}, {y:.4}), outside the unit disk"
                        )));
                    }
                }
            }
        }
        for k in 0..64 {
            for l in 0..64 {
                let (x, y) = (
                    -1.0 + 2.0 * (k as f64 + 0.5) / 64.0,
                    -1.0 + 2.0 * (l as f64 + 0.5) / 64.0,
                );
                let s = self.initial_state(x, y).0;
                if !(s.rho > 0.0 && s.rho.is_finite() && s.u.is_finite() && s.v.is_finite()) {
                    return Err(Error::Validation(format!(
                        "perturbed initial state {s:?} at ({x:.4}, {y:.4}) is not physical"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise initial state and tracer value.
    pub fn initial_state(&self, x: f64, y: f64) -> (GasState, f64) {
        let e = self.epsilon;
        let f = &self.fields;
        let right = x > e * f.interface(y);
        let base = if right {
            self.background.right()
        } else {
            self.background.left()
        };
        let gas = GasState::new(
            base.rho + e * f.rho0(x, y),
            base.u + e * f.u0(x, y),
            e * f.v0(x, y),
        );
        (gas, if right { 1.0 } else { -1.0 })
    }
}

/// Number of sub-samples per direction used for the initial cell averages.
const SUBSAMPLES: usize = 4;

/// Cell averages of the perturbed initial data. Cells whose sub-samples are
/// all unperturbed and on one side of the interface get the exact
/// background state.
pub fn make_initial_data(spec: &PerturbationSpec, grid: Grid2D) -> Result<ConservedField> {
    grid.check_resolves_unit_disk(20)?;
    let (dx, dy) = (grid.dx(), grid.dy());
    let n = SUBSAMPLES;
    let weight = 1.0 / (n * n) as f64;
    let e = spec.epsilon;
    let f = &spec.fields;
    let mut cells = vec![[0.0; 4]; grid.len()];
    cells
        .par_chunks_mut(grid.nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y0 = grid.y_center(j) - 0.5 * dy;
            for (i, cell) in row.iter_mut().enumerate() {
                let x0 = grid.x_center(i) - 0.5 * dx;
                let mut acc = [0.0; 4];
                let mut sides = 0usize;
                let mut perturbed = false;
                for sj in 0..n {
                    let y = y0 + (sj as f64 + 0.5) * dy / n as f64;
                    for si in 0..n {
                        let x = x0 + (si as f64 + 0.5) * dx / n as f64;
                        let (gas, phi) = spec.initial_state(x, y);
                        let p = Primitive::from_gas(gas, phi).to_conserved();
                        for k in 0..4 {
                            acc[k] += p[k];
                        }
                        if phi > 0.0 {
                            sides += 1;
                        }
                        perturbed |= e != 0.0
                            && (f.rho0(x, y) != 0.0 || f.u0(x, y) != 0.0 || f.v0(x, y) != 0.0);
                    }
                }
                *cell = if !perturbed && (sides == 0 || sides == n * n) {
                    let base = if sides == 0 {
                        spec.background.left()
                    } else {
                        spec.background.right()
                    };
                    Primitive::from_gas(base, if sides == 0 { -1.0 } else { 1.0 }).to_conserved()
                } else {
                    acc.map(|a| a * weight)
                };
            }
        });
    Ok(ConservedField {
        grid,
        t: 0.0,
        cells,
    })
}

/// Midpoint-rule values of the two sign hypotheses on the initial data, and
/// the weighted momentum `Y(0)` of the discrete field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    /// `∫∫(e^y + e^{−y})ρ₀ + (ρ_l − ρ_r)∫(e^y + e^{−y})Π`, required `≥ 0`.
    pub weighted_mass: f64,
    /// `∫∫(e^y − e^{−y})(ρ_side + ερ₀)v₀`, required `> 0`.
    pub weighted_momentum: f64,
    /// `∫∫(e^y − e^{−y})ρv` of the cell-averaged initial field; equals
    /// `ε · weighted_momentum` up to quadrature error.
    pub y0: f64,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.weighted_mass >= 0.0 && self.weighted_momentum > 0.0
    }
}

pub fn initial_hypotheses(spec: &PerturbationSpec, grid: Grid2D) -> Result<HypothesisReport> {
    let field = make_initial_data(spec, grid)?;
    let f = &spec.fields;
    let (dx, dy) = (grid.dx(), grid.dy());
    let bg = &spec.background;
    let jump = bg.left().rho - bg.right().rho;
    let mut mass = 0.0;
    let mut momentum = 0.0;
    for j in 0..grid.ny {
        let y = grid.y_center(j);
        let (ep, em) = (y.exp(), (-y).exp());
        mass += jump * (ep + em) * f.interface(y) * dy;
        for i in 0..grid.nx {
            let x = grid.x_center(i);
            let (gas, _) = spec.initial_state(x, y);
            mass += (ep + em) * f.rho0(x, y) * dx * dy;
            momentum += (ep - em) * gas.rho * f.v0(x, y) * dx * dy;
        }
    }
    Ok(HypothesisReport {
        weighted_mass: mass,
        weighted_momentum: momentum,
        y0: crate::functionals::compute_y(&field),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn background_samples() {
        let bg = Background::symmetric();
        assert_eq!(bg.sample(0.0, 1.0), GasState::new(1.0, -1.0, 0.0));
        assert_eq!(bg.sample(0.0, -1e-300), GasState::new(1.0, 1.0, 0.0));
        let m = bg.sample(2.0, 0.0);
        assert_abs_diff_eq!(m.rho, 2.618_033_988_749_895, epsilon = 1e-12);
        assert_abs_diff_eq!(m.u, 0.0, epsilon = 1e-14);
        assert_eq!(bg.sample(2.0, 1.3).rho, 1.0);
    }

    #[test]
    fn background_rejects_rarefactions() {
        assert!(Background::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(Background::new(1.0, 0.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn rho_integral_matches_midpoint_sum() {
        let bg = Background::symmetric();
        let t = 1.7;
        let (x0, x1) = (-2.3, 1.9);
        let n = 200_000;
        let h = (x1 - x0) / n as f64;
        let sum: f64 = (0..n)
            .map(|k| bg.sample(t, x0 + (k as f64 + 0.5) * h).rho * h)
            .sum();
        assert_abs_diff_eq!(bg.rho_integral(t, x0, x1), sum, epsilon = 1e-4);
    }

    #[derive(Debug)]
    struct Leaky;
    impl PerturbationFields for Leaky {
        fn interface(&self, _y: f64) -> f64 {
            0.0
        }
        fn rho0(&self, x: f64, y: f64) -> f64 {
            bump((x * x + y * y) / 1.21)
        }
        fn u0(&self, _x: f64, _y: f64) -> f64 {
            0.0
        }
        fn v0(&self, _x: f64, _y: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn support_violation_is_rejected() {
        let err = PerturbationSpec::new(0.1, Background::symmetric(), Arc::new(Leaky)).unwrap_err();
        assert!(err.to_string().contains("rho0"));
        let wide = DefaultFamily {
            a: 0.0,
            b: 1.0,
            pi_amplitude: 1.0,
        };
        assert!(PerturbationSpec::new(0.1, Background::symmetric(), Arc::new(wide)).is_ok());
        assert!(PerturbationSpec::symmetric_default(-0.1).is_err());
    }

    #[test]
    fn far_cells_are_exact_background() {
        let spec = PerturbationSpec::symmetric_default(0.2).unwrap();
        let grid = Grid2D::with_spacing(11.0, 3.0, 0.1).unwrap();
        let field = make_initial_data(&spec, grid).unwrap();
        let i = (0..grid.nx)
            .find(|&i| (grid.x_center(i) - 10.05).abs() < 1e-9)
            .unwrap();
        let j = (0..grid.ny)
            .find(|&j| (grid.y_center(j) - 0.05).abs() < 1e-9)
            .unwrap();
        let p = field.primitive(i, j);
        assert_eq!((p.rho, p.u, p.v, p.phi), (1.0, -1.0, 0.0, 1.0));
    }

    #[test]
    fn zero_epsilon_is_background() {
        let spec = PerturbationSpec::symmetric_default(0.0).unwrap();
        let grid = Grid2D::with_spacing(2.0, 2.0, 0.1).unwrap();
        let field = make_initial_data(&spec, grid).unwrap();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let expect = spec.background.sample_primitive(0.0, grid.x_center(i));
                assert_eq!(field.primitive(i, j), expect);
            }
        }
        let h = initial_hypotheses(&spec, grid).unwrap();
        assert_eq!(h.y0, 0.0);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let spec = PerturbationSpec::symmetric_default(0.1).unwrap();
        assert!(make_initial_data(&spec, Grid2D::with_spacing(2.0, 2.0, 0.25).unwrap()).is_err());
    }
}
