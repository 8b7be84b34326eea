use super::field::Primitive;
use crate::error::Result;
use crate::riemann::{solve_star, GasState, DEFAULT_TOL};

/// Face normal direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Exact-solver Godunov flux of `(ρ, ρu, ρv)` across a face with the given
/// normal. `GasState::u`/`v` are the lab-frame x/y velocity components here.
pub fn godunov_flux(left: GasState, right: GasState, axis: Axis) -> Result<[f64; 3]> {
    left.validate()?;
    right.validate()?;
    let l = Primitive::new(left.rho, left.u, left.v, 0.0);
    let r = Primitive::new(right.rho, right.u, right.v, 0.0);
    let f = face_flux(&l, &r, axis)?;
    Ok([f[0], f[1], f[2]])
}

/// As [`godunov_flux`], including the passive tracer `ρφ` as fourth component.
pub fn godunov_flux_with_tracer(
    left: &Primitive,
    right: &Primitive,
    axis: Axis,
) -> Result<[f64; 4]> {
    GasState::new(left.rho, left.u, left.v).validate()?;
    GasState::new(right.rho, right.u, right.v).validate()?;
    face_flux(left, right, axis)
}

/// Density and normal velocity at `ξ = 0` of the normal Riemann problem.
#[inline]
fn interface_state(rho_l: f64, n_l: f64, rho_r: f64, n_r: f64) -> Result<(f64, f64)> {
    if rho_l == rho_r && n_l == n_r {
        return Ok((rho_l, n_l));
    }
    let star = solve_star(rho_l, n_l, rho_r, n_r, DEFAULT_TOL)?;
    let (rho_m, u_m) = (star.rho, star.u);
    Ok(if u_m > 0.0 {
        if rho_m > rho_l {
            if n_l - (rho_m / rho_l).sqrt() >= 0.0 {
                (rho_l, n_l)
            } else {
                (rho_m, u_m)
            }
        } else if n_l - 1.0 >= 0.0 {
            (rho_l, n_l)
        } else if u_m - 1.0 <= 0.0 {
            (rho_m, u_m)
        } else {
            // sonic point inside the left rarefaction: u = ξ + 1 = 1
            (rho_l * (n_l - 1.0).exp(), 1.0)
        }
    } else if u_m < 0.0 {
        if rho_m > rho_r {
            if n_r + (rho_m / rho_r).sqrt() <= 0.0 {
                (rho_r, n_r)
            } else {
                (rho_m, u_m)
            }
        } else if n_r + 1.0 <= 0.0 {
            (rho_r, n_r)
        } else if u_m + 1.0 >= 0.0 {
            (rho_m, u_m)
        } else {
            (rho_r * (-1.0 - n_r).exp(), -1.0)
        }
    } else {
        (rho_m, 0.0)
    })
}

#[inline]
pub(crate) fn face_flux(l: &Primitive, r: &Primitive, axis: Axis) -> Result<[f64; 4]> {
    let (n_l, t_l, n_r, t_r) = match axis {
        Axis::X => (l.u, l.v, r.u, r.v),
        Axis::Y => (l.v, l.u, r.v, r.u),
    };
    let (rho, n) = interface_state(l.rho, n_l, r.rho, n_r)?;
    // Tangential velocity and tracer are upwinded by the interface velocity;
    // when it vanishes the mass flux is zero and the choice is irrelevant.
    let (t, phi) = if n >= 0.0 { (t_l, l.phi) } else { (t_r, r.phi) };
    let mass = rho * n;
    Ok(match axis {
        Axis::X => [mass, mass * n + rho, mass * t, mass * phi],
        Axis::Y => [mass, mass * t, mass * n + rho, mass * phi],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::solve_middle_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equal_states_give_physical_flux() {
        let s = GasState::new(1.3, 0.4, -0.2);
        let f = godunov_flux(s, s, Axis::X).unwrap();
        assert_eq!(f, [1.3 * 0.4, 1.3 * 0.4 * 0.4 + 1.3, 1.3 * 0.4 * -0.2]);
        let g = godunov_flux(s, s, Axis::Y).unwrap();
        assert_abs_diff_eq!(g[0], 1.3 * -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 1.3 * -0.2 * 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(g[2], 1.3 * 0.04 + 1.3, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_collision() {
        let f = godunov_flux(
            GasState::new(1.0, 1.0, 0.0),
            GasState::new(1.0, -1.0, 0.0),
            Axis::X,
        )
        .unwrap();
        assert_abs_diff_eq!(f[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 2.618_033_988_749_895, epsilon = 1e-10);
    }

    #[test]
    fn supersonic_left_state_is_upwinded() {
        let l = GasState::new(2.0, 3.0, 0.0);
        let r = GasState::new(1.0, 3.0, 0.0);
        let f = godunov_flux(l, r, Axis::X).unwrap();
        assert_abs_diff_eq!(f[0], 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 20.0, epsilon = 1e-12);
        let fan = solve_middle_state(l, r, DEFAULT_TOL).unwrap();
        let s = fan.sample(0.0);
        assert_abs_diff_eq!(f[0], s.rho * s.u, epsilon = 1e-12);
    }

    #[test]
    fn matches_sampled_fan() {
        let cases = [
            ((1.0, 0.0), (4.0, 0.0)),
            ((2.0, -0.5), (1.0, 1.0)),
            ((1.0, 0.3), (0.2, -1.5)),
            ((0.5, -2.0), (0.5, -1.2)),
            ((3.0, 0.8), (0.1, 1.6)),
        ];
        for ((rl, ul), (rr, ur)) in cases {
            let l = GasState::new(rl, ul, 0.25);
            let r = GasState::new(rr, ur, -0.75);
            let fan = solve_middle_state(l, r, DEFAULT_TOL).unwrap();
            let s = fan.sample(0.0);
            let f = godunov_flux(l, r, Axis::X).unwrap();
            assert_abs_diff_eq!(f[0], s.rho * s.u, epsilon = 1e-10);
            assert_abs_diff_eq!(f[1], s.rho * s.u * s.u + s.rho, epsilon = 1e-10);
            assert_abs_diff_eq!(f[2], s.rho * s.u * s.v, epsilon = 1e-10);
        }
    }

    #[test]
    fn tracer_follows_contact() {
        let l = Primitive::new(1.0, 0.5, 0.0, -1.0);
        let r = Primitive::new(1.0, 0.5, 0.0, 1.0);
        let f = godunov_flux_with_tracer(&l, &r, Axis::X).unwrap();
        assert_eq!(f[3], -f[0]);
        let l = Primitive::new(1.0, -0.5, 0.0, -1.0);
        let r = Primitive::new(1.0, -0.5, 0.0, 1.0);
        let f = godunov_flux_with_tracer(&l, &r, Axis::X).unwrap();
        assert_eq!(f[3], f[0]);
    }
}
