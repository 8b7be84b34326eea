//! Exact Riemann solver for the 1-D isothermal Euler system
//!
//! ```text
//! ρ_t + (ρu)_x = 0,    (ρu)_t + (ρu² + ρ)_x = 0,
//! ```
//!
//! i.e. pressure `p = ρ` and unit sound speed. A transverse velocity `v` rides
//! along passively and only jumps across the contact.
//!
//! The middle density solves `u_l − Φ(ρ; ρ_l) = u_r + Φ(ρ; ρ_r)` where `Φ` is
//! the wave curve: `(ρ − ρ₀)/√(ρρ₀)` on the compressive (shock) branch and
//! `ln(ρ/ρ₀)` on the expansive (rarefaction) branch. In the logarithmic
//! variable `d = ln(ρ/ρ₀)` the curve is `2 sinh(d/2)` or `d`, which is convex and
//! increasing, so Newton's method started anywhere lands on the right of the
//! root after one step and then decreases monotonically.

use crate::error::{Error, Result};

/// Default residual threshold for the middle-state equation.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_ITER: usize = 200;

/// `ln(10⁶)`: the root is bracketed in `[min ρ · 10⁻⁶, max ρ · 10⁶]`.
const LN_BRACKET: f64 = 13.815_510_557_964_274;

/// Primitive state at a point or in a cell. Pressure is not stored (`p = ρ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasState {
    /// Density, strictly positive.
    pub rho: f64,
    /// Velocity normal to the wave front.
    pub u: f64,
    /// Tangential velocity, carried passively by 1-D solves.
    pub v: f64,
}

impl GasState {
    pub const fn new(rho: f64, u: f64, v: f64) -> Self {
        Self { rho, u, v }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.u.is_finite() && self.v.is_finite()) {
            return Err(Error::Domain(format!("non-finite state {self:?}")));
        }
        if self.rho <= 0.0 {
            return Err(Error::Domain(format!(
                "density must be positive, got {}",
                self.rho
            )));
        }
        Ok(())
    }

    pub fn mass_flux(&self) -> f64 {
        self.rho * self.u
    }

    pub fn momentum_flux(&self) -> f64 {
        self.rho * self.u * self.u + self.rho
    }

    /// Galilean shift of the normal velocity.
    pub fn shifted(&self, c: f64) -> Self {
        Self::new(self.rho, self.u + c, self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

/// Solved self-similar wave structure of a 1-D Riemann problem.
///
/// `sigma_minus`/`sigma_plus` are the shock speeds for shock waves and the
/// head (outermost) speeds for rarefactions. `middle.v` is the transverse
/// velocity on the left of the contact; see [`RiemannFan::middle_right`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannFan {
    pub left: GasState,
    pub middle: GasState,
    pub right: GasState,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub left_wave: WaveKind,
    pub right_wave: WaveKind,
    pub contact_speed: f64,
}

impl RiemannFan {
    fn from_star(left: GasState, right: GasState, star: Star) -> Self {
        let (left_wave, sigma_minus) = if star.rho > left.rho {
            (WaveKind::Shock, left.u - (star.rho / left.rho).sqrt())
        } else {
            (WaveKind::Rarefaction, left.u - 1.0)
        };
        let (right_wave, sigma_plus) = if star.rho > right.rho {
            (WaveKind::Shock, right.u + (star.rho / right.rho).sqrt())
        } else {
            (WaveKind::Rarefaction, right.u + 1.0)
        };
        Self {
            left,
            middle: GasState::new(star.rho, star.u, left.v),
            right,
            sigma_minus,
            sigma_plus,
            left_wave,
            right_wave,
            contact_speed: star.u,
        }
    }

    /// Middle state on the right of the contact.
    pub fn middle_right(&self) -> GasState {
        GasState::new(self.middle.rho, self.middle.u, self.right.v)
    }

    pub fn is_two_shock(&self) -> bool {
        self.left_wave == WaveKind::Shock && self.right_wave == WaveKind::Shock
    }

    /// `(head, tail)` speeds of the left wave; equal for a shock.
    pub fn left_wave_span(&self) -> (f64, f64) {
        match self.left_wave {
            WaveKind::Shock => (self.sigma_minus, self.sigma_minus),
            WaveKind::Rarefaction => (self.left.u - 1.0, self.contact_speed - 1.0),
        }
    }

    /// `(tail, head)` speeds of the right wave; equal for a shock.
    pub fn right_wave_span(&self) -> (f64, f64) {
        match self.right_wave {
            WaveKind::Shock => (self.sigma_plus, self.sigma_plus),
            WaveKind::Rarefaction => (self.contact_speed + 1.0, self.right.u + 1.0),
        }
    }

    pub fn sample(&self, xi: f64) -> GasState {
        sample_self_similar(self, xi)
    }
}

/// Lower/upper density bounds `0 < ρ_* < ρ < ρ^* < ∞` assumed by the
/// blow-up argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBounds {
    pub rho_star: f64,
    pub rho_star_upper: f64,
}

impl DensityBounds {
    pub fn new(rho_star: f64, rho_star_upper: f64) -> Result<Self> {
        if !(rho_star > 0.0 && rho_star < rho_star_upper && rho_star_upper.is_finite()) {
            return Err(Error::Validation(format!(
                "density bounds must satisfy 0 < rho_star < rho_star_upper < inf, got [{rho_star}, {rho_star_upper}]"
            )));
        }
        Ok(Self {
            rho_star,
            rho_star_upper,
        })
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho > self.rho_star && rho < self.rho_star_upper
    }
}

/// Wave curve in the logarithmic density variable `d = ln(ρ/ρ₀)`, with its
/// slope: `(2 sinh(d/2), cosh(d/2))` for `d ≥ 0`, `(d, 1)` otherwise.
#[inline]
fn curve_log(d: f64) -> (f64, f64) {
    if d >= 0.0 {
        let half = 0.5 * d;
        if half < 1e-3 {
            let h2 = half * half;
            let s = half * (1.0 + h2 / 6.0 * (1.0 + h2 / 20.0));
            let c = 1.0 + 0.5 * h2 * (1.0 + h2 / 12.0);
            (2.0 * s, c)
        } else {
            let e = half.exp();
            let inv = 1.0 / e;
            (e - inv, 0.5 * (e + inv))
        }
    } else {
        (d, 1.0)
    }
}

/// Wave curve `Φ(ρ; ρ₀)`: velocity change across a single wave family as a
/// function of the density behind it.
pub fn wave_curve_phi(rho: f64, rho0: f64) -> Result<f64> {
    if !(rho > 0.0 && rho0 > 0.0) || !rho.is_finite() || !rho0.is_finite() {
        return Err(Error::Domain(format!(
            "wave curve needs positive finite densities, got rho = {rho}, rho0 = {rho0}"
        )));
    }
    Ok(if rho >= rho0 {
        (rho - rho0) / (rho * rho0).sqrt()
    } else {
        (rho / rho0).ln()
    })
}

/// Middle density and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Star {
    pub rho: f64,
    pub u: f64,
}

/// Root of `g(z) = Φ̃(z − z_l) + Φ̃(z − z_r) + u_r − u_l` by safeguarded Newton.
pub(crate) fn solve_star(rho_l: f64, u_l: f64, rho_r: f64, u_r: f64, tol: f64) -> Result<Star> {
    if rho_l == rho_r && u_l == u_r {
        return Ok(Star { rho: rho_l, u: u_l });
    }
    let zl = rho_l.ln();
    let zr = rho_r.ln();
    let du = u_r - u_l;
    let eval = |z: f64| {
        let (hl, sl) = curve_log(z - zl);
        let (hr, sr) = curve_log(z - zr);
        (hl + hr + du, sl + sr, hl, hr)
    };
    let finish = |z: f64, hl: f64, hr: f64| Star {
        rho: z.exp(),
        u: 0.5 * ((u_l - hl) + (u_r + hr)),
    };

    let mut lo = zl.min(zr) - LN_BRACKET;
    let mut hi = zl.max(zr) + LN_BRACKET;
    let bracket_error = |iterations: usize| Error::Convergence {
        tol,
        iterations,
        lo: (zl.min(zr) - LN_BRACKET).exp(),
        hi: (zl.max(zr) + LN_BRACKET).exp(),
    };
    let mut bracket_checked = false;

    // Exact when both waves are rarefactions.
    let mut z = (0.5 * (zl + zr - du)).clamp(lo, hi);
    for iteration in 0..MAX_ITER {
        let (g, slope, hl, hr) = eval(z);
        if g.abs() <= tol {
            return Ok(finish(z, hl, hr));
        }
        if g > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let newton = z - g / slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            // Only reached when Newton overshoots; confirm the root is inside
            // the initial bracket before bisecting.
            if !bracket_checked {
                if eval(zl.min(zr) - LN_BRACKET).0 > 0.0 || eval(zl.max(zr) + LN_BRACKET).0 < 0.0 {
                    return Err(bracket_error(iteration));
                }
                bracket_checked = true;
            }
            0.5 * (lo + hi)
        };
        let step = next - z;
        // |g''| ≤ ½ slope · e^{|δ|/2} on the step, so for |δ| < 1 the Taylor
        // remainder bounds the next residual by 0.42·slope·δ².
        if next == newton && step.abs() < 1.0 && 0.42 * slope * step * step <= tol {
            let (_, _, hl, hr) = eval(next);
            return Ok(finish(next, hl, hr));
        }
        z = next;
    }
    Err(bracket_error(MAX_ITER))
}

/// Solves the Riemann problem between `left` and `right` (lab frame).
pub fn solve_middle_state(left: GasState, right: GasState, tol: f64) -> Result<RiemannFan> {
    left.validate()?;
    right.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let star = solve_star(left.rho, left.u, right.rho, right.u, tol)?;
    Ok(RiemannFan::from_star(left, right, star))
}

/// Exact self-similar state at `xi = x/t`.
pub fn sample_self_similar(fan: &RiemannFan, xi: f64) -> GasState {
    let um = fan.contact_speed;
    let rho_m = fan.middle.rho;
    if xi < um {
        let l = fan.left;
        match fan.left_wave {
            WaveKind::Shock => {
                if xi < fan.sigma_minus {
                    l
                } else {
                    GasState::new(rho_m, um, l.v)
                }
            }
            WaveKind::Rarefaction => {
                let (head, tail) = fan.left_wave_span();
                if xi <= head {
                    l
                } else if xi >= tail {
                    GasState::new(rho_m, um, l.v)
                } else {
                    let u = xi + 1.0;
                    GasState::new(l.rho * (l.u - u).exp(), u, l.v)
                }
            }
        }
    } else if xi > um {
        let r = fan.right;
        match fan.right_wave {
            WaveKind::Shock => {
                if xi > fan.sigma_plus {
                    r
                } else {
                    GasState::new(rho_m, um, r.v)
                }
            }
            WaveKind::Rarefaction => {
                let (tail, head) = fan.right_wave_span();
                if xi >= head {
                    r
                } else if xi <= tail {
                    GasState::new(rho_m, um, r.v)
                } else {
                    let u = xi - 1.0;
                    GasState::new(r.rho * (u - r.u).exp(), u, r.v)
                }
            }
        }
    } else {
        GasState::new(rho_m, um, 0.5 * (fan.left.v + fan.right.v))
    }
}

/// Rankine–Hugoniot residuals `(s[ρ] − [ρu], s[ρu] − [ρu² + ρ])` with
/// `[q] = q(downstream) − q(upstream)`.
pub fn rh_residual(upstream: GasState, downstream: GasState, speed: f64) -> (f64, f64) {
    let jump_rho = downstream.rho - upstream.rho;
    let jump_mass = downstream.mass_flux() - upstream.mass_flux();
    let jump_mom = downstream.momentum_flux() - upstream.momentum_flux();
    (speed * jump_rho - jump_mass, speed * jump_mass - jump_mom)
}

/// Outcome of the two-shock admissibility test.
#[derive(Debug, Clone, PartialEq)]
pub enum EntropyVerdict {
    Admissible,
    /// Names of the failed conditions.
    Violated(Vec<&'static str>),
    /// Both waves have zero strength.
    NotApplicable,
}

/// Admissibility check carried out in the frame where the contact is at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub verdict: EntropyVerdict,
    pub u_left: f64,
    pub u_right: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
}

impl EntropyReport {
    pub fn is_admissible(&self) -> bool {
        self.verdict == EntropyVerdict::Admissible
    }
}

/// Tests `ρ_m > ρ_l`, `ρ_m > ρ_r`, `u_l > 0`, `u_r < 0`, `1 + u_r < σ₊ < 1`
/// and `−1 < σ₋ < −1 + u_l` after shifting to `u_m = 0`.
pub fn check_entropy(fan: &RiemannFan) -> EntropyReport {
    let um = fan.contact_speed;
    let u_left = fan.left.u - um;
    let u_right = fan.right.u - um;
    let sigma_minus = fan.sigma_minus - um;
    let sigma_plus = fan.sigma_plus - um;
    let report = |verdict| EntropyReport {
        verdict,
        u_left,
        u_right,
        sigma_minus,
        sigma_plus,
    };

    let scale = fan.left.rho.max(fan.right.rho);
    let flat = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
    if flat(fan.middle.rho, fan.left.rho)
        && flat(fan.middle.rho, fan.right.rho)
        && (fan.left.u - fan.right.u).abs() <= 1e-12
    {
        return report(EntropyVerdict::NotApplicable);
    }

    let rho_m = fan.middle.rho;
    let checks: [(&'static str, bool); 8] = [
        ("rho_m > rho_l", rho_m > fan.left.rho),
        ("rho_m > rho_r", rho_m > fan.right.rho),
        ("u_l > 0", u_left > 0.0),
        ("u_r < 0", u_right < 0.0),
        ("1 + u_r < sigma_plus", 1.0 + u_right < sigma_plus),
        ("sigma_plus < 1", sigma_plus < 1.0),
        ("-1 < sigma_minus", -1.0 < sigma_minus),
        ("sigma_minus < -1 + u_l", sigma_minus < -1.0 + u_left),
    ];
    let failed: Vec<_> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    if failed.is_empty() {
        report(EntropyVerdict::Admissible)
    } else {
        report(EntropyVerdict::Violated(failed))
    }
}
