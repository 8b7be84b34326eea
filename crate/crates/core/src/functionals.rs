//! Weighted functionals of a field snapshot
//!
//! ```text
//! X = ∫∫ (e^y + e^{−y}) (ρ − ρ_region)  + front displacement terms
//! Y = ∫∫ (e^y − e^{−y}) ρv
//! S = ∫∫ (e^y + e^{−y}) ρv²
//! ```
//!
//! with `e^t Z = ∫₀ᵗ Y` and `W = Z′ + 2Z`. For the true weak solution
//! `X′ = Y` and `Y′ = X + S`; on discrete fields the residuals of these
//! identities are `O(Δx)`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::euler2d::{Background, ConservedField, PerturbationSpec, SupportCone};
use crate::riemann::RiemannFan;

/// Cells within this many widths of a detected shock are left out of the
/// far-field deviation, which otherwise only sees the captured shock profile.
pub const FAR_FIELD_BAND: f64 = 4.0;

/// Weight `e^y + e^{−y}` of the mass functional.
#[inline]
pub fn mass_weight(y: f64) -> f64 {
    y.exp() + (-y).exp()
}

/// Weight `e^y − e^{−y}` of the momentum functional.
#[inline]
pub fn momentum_weight(y: f64) -> f64 {
    y.exp() - (-y).exp()
}

/// Row-parallel sum with a fixed reduction order.
fn sum_rows(field: &ConservedField, f: impl Fn(usize, &[[f64; 4]]) -> f64 + Sync) -> f64 {
    let rows: Vec<f64> = (0..field.grid.ny)
        .into_par_iter()
        .map(|j| f(j, field.row(j)))
        .collect();
    rows.iter().sum()
}

/// Per-row front positions `Π₋ ≤ Π₀ ≤ Π₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontLocus {
    pub t: f64,
    pub y: Vec<f64>,
    pub pi_minus: Vec<f64>,
    pub pi_zero: Vec<f64>,
    pub pi_plus: Vec<f64>,
}

/// Locates the contact from the tracer zero-crossing nearest the background
/// contact, then the shocks as the crossings of `(ρ_m + ρ_r)/2` to its right
/// and `(ρ_m + ρ_l)/2` to its left. Without a middle plateau above that
/// level a shock collapses onto the contact.
pub fn detect_fronts(field: &ConservedField, spec: &PerturbationSpec) -> Result<FrontLocus> {
    let g = field.grid;
    let fan = &spec.background.fan;
    let contact = fan.contact_speed * field.t;
    let level_r = 0.5 * (fan.middle.rho + fan.right.rho);
    let level_l = 0.5 * (fan.middle.rho + fan.left.rho);
    let rows: Vec<Result<(f64, f64, f64)>> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let row = field.row(j);
            let fail = |reason: String| Error::FrontDetection {
                row: j,
                y: g.y_center(j),
                reason,
            };
            let phi = |i: usize| row[i][3] / row[i][0];
            let mut best: Option<(f64, usize)> = None;
            for i in 0..g.nx - 1 {
                let (a, b) = (phi(i), phi(i + 1));
                if (a < 0.0) != (b < 0.0) {
                    let x = g.x_center(i) + a / (a - b) * g.dx();
                    if best.map_or(true, |(bx, _)| (x - contact).abs() < (bx - contact).abs()) {
                        best = Some((x, i));
                    }
                }
            }
            let (pi0, i0) = best.ok_or_else(|| fail("tracer has no zero crossing".into()))?;
            let rho = |i: usize| row[i][0];

            let dx = g.dx();
            let mut pi_plus = pi0;
            let start = [i0 + 1, i0].into_iter().find(|&i| rho(i) >= level_r);
            if let Some(mut k) = start {
                while k + 1 < g.nx && rho(k + 1) >= level_r {
                    k += 1;
                }
                if k + 1 == g.nx {
                    return Err(fail("right shock reaches the boundary".into()));
                }
                pi_plus = g.x_center(k) + (rho(k) - level_r) / (rho(k) - rho(k + 1)) * dx;
            }
            let mut pi_minus = pi0;
            let start = [i0, i0 + 1].into_iter().find(|&i| rho(i) >= level_l);
            if let Some(mut k) = start {
                while k > 0 && rho(k - 1) >= level_l {
                    k -= 1;
                }
                if k == 0 {
                    return Err(fail("left shock reaches the boundary".into()));
                }
                pi_minus = g.x_center(k) - (rho(k) - level_l) / (rho(k) - rho(k - 1)) * dx;
            }
            Ok((pi_minus.min(pi0), pi0, pi_plus.max(pi0)))
        })
        .collect();
    let mut locus = FrontLocus {
        t: field.t,
        y: (0..g.ny).map(|j| g.y_center(j)).collect(),
        pi_minus: Vec::with_capacity(g.ny),
        pi_zero: Vec::with_capacity(g.ny),
        pi_plus: Vec::with_capacity(g.ny),
    };
    for r in rows {
        let (m, z, p) = r?;
        locus.pi_minus.push(m);
        locus.pi_zero.push(z);
        locus.pi_plus.push(p);
    }
    Ok(locus)
}

/// `X` by region-wise midpoint quadrature; cells straddling `Π±` are split
/// at the front.
pub fn compute_x(field: &ConservedField, fronts: &FrontLocus, fan: &RiemannFan) -> Result<f64> {
    let g = field.grid;
    if fronts.pi_plus.len() != g.ny {
        return Err(Error::Validation(format!(
            "front locus has {} rows, field has {}",
            fronts.pi_plus.len(),
            g.ny
        )));
    }
    for j in 0..g.ny {
        for p in [fronts.pi_minus[j], fronts.pi_plus[j]] {
            if !(p > -g.lx && p < g.lx) {
                return Err(Error::FrontDetection {
                    row: j,
                    y: g.y_center(j),
                    reason: format!("front at x = {p} is outside the grid"),
                });
            }
        }
    }
    let (rl, rm, rr) = (fan.left.rho, fan.middle.rho, fan.right.rho);
    let (sm, sp) = (fan.sigma_minus * field.t, fan.sigma_plus * field.t);
    let dx = g.dx();
    let dy = g.dy();
    Ok(sum_rows(field, |j, row| {
        let (a, b) = (fronts.pi_minus[j], fronts.pi_plus[j]);
        let mut acc = 0.0;
        for (i, q) in row.iter().enumerate() {
            let x0 = g.x_face(i);
            let x1 = x0 + dx;
            let left = (a.min(x1) - x0).max(0.0);
            let right = (x1 - b.max(x0)).max(0.0);
            let mid = dx - left - right;
            acc += q[0] * dx - (rl * left + rm * mid + rr * right);
        }
        acc += (rm - rr) * (b - sp) + (rm - rl) * (sm - a);
        mass_weight(g.y_center(j)) * acc * dy
    }))
}

/// `X` as `∫∫(e^y + e^{−y})(ρ − ρ_bg)` against the exact background cell
/// integrals. Algebraically equal to [`compute_x`] for any front positions.
pub fn compute_x_background(field: &ConservedField, background: &Background) -> f64 {
    let g = field.grid;
    let dx = g.dx();
    sum_rows(field, |j, row| {
        let mut acc = 0.0;
        for (i, q) in row.iter().enumerate() {
            let x0 = g.x_face(i);
            acc += q[0] * dx - background.rho_integral(field.t, x0, x0 + dx);
        }
        mass_weight(g.y_center(j)) * acc * g.dy()
    })
}

pub fn compute_y(field: &ConservedField) -> f64 {
    compute_y_scaled(field, 1.0)
}

/// `Y` with `v` replaced by `scale·v`.
pub fn compute_y_scaled(field: &ConservedField, scale: f64) -> f64 {
    let g = field.grid;
    let area = g.cell_area();
    sum_rows(field, |j, row| {
        let s: f64 = row.iter().map(|q| q[2]).sum();
        momentum_weight(g.y_center(j)) * s * scale * area
    })
}

pub fn compute_s(field: &ConservedField) -> f64 {
    compute_s_scaled(field, 1.0)
}

pub fn compute_s_scaled(field: &ConservedField, scale: f64) -> f64 {
    let g = field.grid;
    let area = g.cell_area();
    sum_rows(field, |j, row| {
        let s: f64 = row.iter().map(|q| q[2] * q[2] / q[0]).sum();
        mass_weight(g.y_center(j)) * s * scale * scale * area
    })
}

/// `∫(e^y + e^{−y})ρ` over the cells meeting the disk of the given radius.
pub fn compute_m(field: &ConservedField, radius: f64) -> f64 {
    let g = field.grid;
    let area = g.cell_area();
    sum_rows(field, |j, row| {
        let s: f64 = row
            .iter()
            .enumerate()
            .filter(|(i, _)| g.cell_min_radius(*i, j) <= radius)
            .map(|(_, q)| q[0])
            .sum();
        mass_weight(g.y_center(j)) * s * area
    })
}

/// Largest deviation of `(ρ, u, v)` from the constant fan states over cells
/// outside the disk of radius `r_far`, skipping a band around each shock.
pub fn far_field_deviation(
    field: &ConservedField,
    fronts: &FrontLocus,
    fan: &RiemannFan,
    r_far: f64,
) -> f64 {
    let g = field.grid;
    let band = FAR_FIELD_BAND * g.dx();
    let rows: Vec<f64> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let (a, b) = (fronts.pi_minus[j], fronts.pi_plus[j]);
            let mut worst = 0.0_f64;
            for (i, q) in field.row(j).iter().enumerate() {
                let x = g.x_center(i);
                if g.cell_min_radius(i, j) < r_far || (x - a).abs() < band || (x - b).abs() < band {
                    continue;
                }
                let s = if x < a {
                    fan.left
                } else if x > b {
                    fan.right
                } else {
                    fan.middle
                };
                let d = (q[0] - s.rho)
                    .abs()
                    .max((q[1] / q[0] - s.u).abs())
                    .max((q[2] / q[0]).abs());
                worst = worst.max(d);
            }
            worst
        })
        .collect();
    rows.into_iter().fold(0.0, f64::max)
}

/// Raw functionals of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub s: f64,
    /// Cone mass: late cone for `t ≥ t₀`, all-time cone before.
    pub m: f64,
    /// Cone mass over the all-time cone, used for the Hölder check.
    pub m_holder: f64,
    pub far_field: f64,
    /// Max `|v|` over cells entirely outside the all-time cone.
    pub support: f64,
}

impl Sample {
    /// `(M·S − Y²)/(M·S)`; zero when both sides vanish.
    pub fn holder_slack(&self) -> f64 {
        let rhs = self.m_holder * self.s;
        if rhs == 0.0 {
            if self.y == 0.0 {
                0.0
            } else {
                -1.0
            }
        } else {
            (rhs - self.y * self.y) / rhs
        }
    }
}

/// Computes all functionals of a snapshot; `v_scale ≠ 1` manufactures a
/// field that violates the momentum equation.
pub fn diagnose(
    field: &ConservedField,
    spec: &PerturbationSpec,
    cone: &SupportCone,
    v_scale: f64,
) -> Result<Sample> {
    let fronts = detect_fronts(field, spec)?;
    let fan = &spec.background.fan;
    let t = field.t;
    let all_time = cone.radius(t, crate::euler2d::ConeForm::AllTime);
    let m_holder = compute_m(field, all_time);
    let m = if t >= cone.t0 {
        compute_m(field, cone.best_radius(t))
    } else {
        m_holder
    };
    Ok(Sample {
        t,
        x: compute_x(field, &fronts, fan)?,
        y: compute_y_scaled(field, v_scale),
        s: compute_s_scaled(field, v_scale),
        m,
        m_holder,
        far_field: far_field_deviation(field, &fronts, fan, cone.r_far),
        support: crate::euler2d::support_radius_check_radius(field, all_time, 0.0).max_violation,
    })
}

/// Sampled functionals with `Z`, `W` and the identity residuals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FunctionalSeries {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub m: Vec<f64>,
    pub m_holder: Vec<f64>,
    pub holder_slack: Vec<f64>,
    pub far_field: Vec<f64>,
    pub support: Vec<f64>,
}

pub const SERIES_COLUMNS: &str =
    "t,X,Y,S,Z,W,r1,r2,M,holder_slack,far_field_deviation,support_violation";

impl FunctionalSeries {
    pub fn from_samples(samples: &[Sample]) -> Result<Self> {
        let mut s = Self::default();
        for p in samples {
            s.push(p);
        }
        compute_w_series(s)
    }

    /// Appends raw values; `Z`, `W` and the residuals are filled in by
    /// [`compute_w_series`].
    pub fn push(&mut self, p: &Sample) {
        self.t.push(p.t);
        self.x.push(p.x);
        self.y.push(p.y);
        self.s.push(p.s);
        self.m.push(p.m);
        self.m_holder.push(p.m_holder);
        self.holder_slack.push(p.holder_slack());
        self.far_field.push(p.far_field);
        self.support.push(p.support);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{SERIES_COLUMNS}")?;
        for k in 0..self.len() {
            let fill = |v: &Vec<f64>| v.get(k).copied().unwrap_or(f64::NAN);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                self.t[k],
                self.x[k],
                self.y[k],
                self.s[k],
                fill(&self.z),
                fill(&self.w),
                fill(&self.r1),
                fill(&self.r2),
                self.m[k],
                self.holder_slack[k],
                self.far_field[k],
                self.support[k]
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Time step of a uniform grid starting at `t = 0`.
fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::NonUniformTimeGrid(format!(
            "need at least 2 samples, got {}",
            t.len()
        )));
    }
    if t[0].abs() > 1e-12 {
        return Err(Error::NonUniformTimeGrid(format!(
            "series starts at t = {}, not 0",
            t[0]
        )));
    }
    let h = t[1] - t[0];
    if !(h > 0.0) {
        return Err(Error::NonUniformTimeGrid(format!(
            "non-increasing times {} and {}",
            t[0], t[1]
        )));
    }
    for (k, &tk) in t.iter().enumerate() {
        if (tk - k as f64 * h).abs() > 1e-9 * (1.0 + tk.abs()) {
            return Err(Error::NonUniformTimeGrid(format!(
                "sample {k} at t = {tk}, expected {}",
                k as f64 * h
            )));
        }
    }
    Ok(h)
}

/// Derivative on a uniform grid: centred inside, one-sided second order at
/// the ends.
fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    if n == 2 {
        let d = (f[1] - f[0]) / h;
        return vec![d, d];
    }
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else {
                (f[k + 1] - f[k - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Trapezoidal running integral.
fn running_integral(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    for k in 0..f.len() {
        if k > 0 {
            acc += 0.5 * h * (f[k] + f[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// Fills `Z = e^{−t}∫₀ᵗY`, `W = e^{−t}(Y + ∫₀ᵗY)`, `r₁ = X′ − Y` and
/// `r₂ = Y′ − X − S`.
pub fn compute_w_series(mut series: FunctionalSeries) -> Result<FunctionalSeries> {
    let h = uniform_step(&series.t)?;
    let int_y = running_integral(&series.y, h);
    series.z = series
        .t
        .iter()
        .zip(&int_y)
        .map(|(t, i)| (-t).exp() * i)
        .collect();
    series.w = (0..series.len())
        .map(|k| (-series.t[k]).exp() * (series.y[k] + int_y[k]))
        .collect();
    let dx = derivative(&series.x, h);
    let dy = derivative(&series.y, h);
    series.r1 = (0..series.len()).map(|k| dx[k] - series.y[k]).collect();
    series.r2 = (0..series.len())
        .map(|k| dy[k] - series.x[k] - series.s[k])
        .collect();
    Ok(series)
}

/// Residual norms of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    pub dx: f64,
    pub r1_max: f64,
    pub r1_l2: f64,
    pub r2_max: f64,
    pub r2_l2: f64,
}

impl ResidualNorms {
    pub fn of(dx: f64, series: &FunctionalSeries) -> Result<Self> {
        let h = uniform_step(&series.t)?;
        let max = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let l2 = |v: &[f64]| (v.iter().map(|r| r * r).sum::<f64>() * h).sqrt();
        Ok(Self {
            dx,
            r1_max: max(&series.r1),
            r1_l2: l2(&series.r1),
            r2_max: max(&series.r2),
            r2_l2: l2(&series.r2),
        })
    }
}

/// Residuals across a refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma31Report {
    pub levels: Vec<ResidualNorms>,
    /// Smallest pairwise empirical order of the `L²` norms.
    pub order_r1: f64,
    pub order_r2: f64,
    /// Both `L²` norms strictly decrease along the ladder.
    pub monotone: bool,
}

impl Lemma31Report {
    pub fn passes(&self, min_order: f64) -> bool {
        self.monotone && self.order_r1 >= min_order && self.order_r2 >= min_order
    }
}

/// Residual norms and convergence orders for runs ordered coarse to fine.
pub fn verify_lemma31(ladder: &[(f64, FunctionalSeries)]) -> Result<Lemma31Report> {
    let levels = ladder
        .iter()
        .map(|(dx, s)| ResidualNorms::of(*dx, s))
        .collect::<Result<Vec<_>>>()?;
    let order = |pick: fn(&ResidualNorms) -> f64| {
        levels
            .windows(2)
            .map(|w| (pick(&w[0]) / pick(&w[1])).ln() / (w[0].dx / w[1].dx).ln())
            .fold(f64::INFINITY, f64::min)
    };
    let monotone = levels
        .windows(2)
        .all(|w| w[1].r1_l2 < w[0].r1_l2 && w[1].r2_l2 < w[0].r2_l2);
    Ok(Lemma31Report {
        order_r1: order(|n| n.r1_l2),
        order_r2: order(|n| n.r2_l2),
        monotone,
        levels,
    })
}

/// Findings of the inequality chain; violations are data, not errors.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    /// Smallest `(M·S − Y²)/(M·S)` over the samples.
    pub min_holder_slack: f64,
    pub holder_failures: usize,
    /// `sup M(t) / ((t + 1)^{1/2} e^t)` over `t ≥ t₀`.
    pub mass_constant: f64,
    /// `inf (Y′ − X(0) − ∫Y) / (Y² e^{−t} (t + 1)^{−1/2})` over `t ≥ t₀`.
    pub riccati_constant: f64,
    /// Samples where `Z` decreases by more than the tolerance.
    pub z_decreases: usize,
}

/// Checks the Hölder step, the cone-mass growth bound and the lower bound on
/// `Y′` from the `t ≥ t₀` part of the series.
pub fn verify_inequality_chain(
    series: &FunctionalSeries,
    cone: &SupportCone,
    slack_tol: f64,
) -> Result<InequalityReport> {
    let h = uniform_step(&series.t)?;
    let min_holder_slack = series
        .holder_slack
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let holder_failures = series
        .holder_slack
        .iter()
        .filter(|&&s| s < -slack_tol)
        .count();
    let dy = derivative(&series.y, h);
    let int_y = running_integral(&series.y, h);
    let x0 = series.x[0];
    let mut mass_constant = 0.0_f64;
    let mut riccati_constant = f64::INFINITY;
    for k in 0..series.len() {
        let t = series.t[k];
        if t < cone.t0 {
            continue;
        }
        mass_constant = mass_constant.max(series.m[k] / ((t + 1.0).sqrt() * t.exp()));
        let y2 = series.y[k] * series.y[k];
        if y2 > 0.0 {
            let c = (dy[k] - x0 - int_y[k]) / (y2 * (-t).exp() / (t + 1.0).sqrt());
            riccati_constant = riccati_constant.min(c);
        }
    }
    let scale = series.z.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let z_decreases = series
        .z
        .windows(2)
        .filter(|w| w[1] < w[0] - 1e-6 * scale)
        .count();
    Ok(InequalityReport {
        min_holder_slack,
        holder_failures,
        mass_constant,
        riccati_constant,
        z_decreases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler2d::{Grid2D, Primitive};
    use approx::assert_abs_diff_eq;

    fn bump_field(v_on: f64) -> ConservedField {
        // ρ ≡ 1 and v = v_on on [0, 1]², resolved by whole cells
        let grid = Grid2D::new(2.0, 2.0, 200, 200).unwrap();
        ConservedField::from_fn(grid, 0.0, |x, y| {
            let inside = (0.0..1.0).contains(&x) && (0.0..1.0).contains(&y);
            Primitive::new(1.0, 0.0, if inside { v_on } else { 0.0 }, 1.0)
        })
    }

    #[test]
    fn y_and_s_on_unit_square() {
        let f = bump_field(1.0);
        // midpoint rule error ~ h²/24 · ∫ w''
        assert_abs_diff_eq!(
            compute_y(&f),
            1.0_f64.exp() + (-1.0_f64).exp() - 2.0,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            compute_s(&f),
            1.0_f64.exp() - (-1.0_f64).exp(),
            epsilon = 1e-4
        );
        let g = bump_field(2.0);
        assert_abs_diff_eq!(compute_s(&g), 4.0 * compute_s(&f), epsilon = 1e-12);
        assert_eq!(compute_y(&bump_field(0.0)), 0.0);
    }

    #[test]
    fn y_is_odd_under_reflection() {
        let f = bump_field(1.0);
        let g = f.grid;
        let mut r = f.clone();
        for j in 0..g.ny {
            for i in 0..g.nx {
                r.cells[g.index(i, j)] = *f.at(i, g.ny - 1 - j);
            }
        }
        assert_abs_diff_eq!(compute_y(&r), -compute_y(&f), epsilon = 1e-12);
    }

    #[test]
    fn holder_slack_is_nonnegative_for_any_field() {
        let f = bump_field(0.7);
        let p = Sample {
            t: 0.0,
            x: 0.0,
            y: compute_y(&f),
            s: compute_s(&f),
            m: 0.0,
            m_holder: compute_m(&f, 10.0),
            far_field: 0.0,
            support: 0.0,
        };
        assert!(p.holder_slack() >= 0.0);
    }

    #[test]
    fn w_of_exponential() {
        let h = 1e-3;
        let n = 2001;
        let mut s = FunctionalSeries::default();
        for k in 0..n {
            let t = k as f64 * h;
            s.push(&Sample {
                t,
                x: 0.0,
                y: t.exp(),
                s: 0.0,
                m: 0.0,
                m_holder: 0.0,
                far_field: 0.0,
                support: 0.0,
            });
        }
        let s = compute_w_series(s).unwrap();
        assert_eq!(s.w[0], s.y[0]);
        assert_eq!(s.z[0], 0.0);
        let t = s.t[n - 1];
        assert_abs_diff_eq!(s.w[n - 1], 2.0 - (-t).exp(), epsilon = 1e-6);
    }

    #[test]
    fn non_uniform_grid_is_rejected() {
        let mut s = FunctionalSeries::default();
        for t in [0.0, 0.1, 0.25] {
            s.push(&Sample {
                t,
                x: 0.0,
                y: 0.0,
                s: 0.0,
                m: 0.0,
                m_holder: 0.0,
                far_field: 0.0,
                support: 0.0,
            });
        }
        assert!(matches!(
            compute_w_series(s),
            Err(Error::NonUniformTimeGrid(_))
        ));
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let h = 0.1;
        let f: Vec<f64> = (0..6).map(|k| (k as f64 * h).powi(2)).collect();
        let d = derivative(&f, h);
        for (k, v) in d.iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * k as f64 * h, epsilon = 1e-12);
        }
    }
}
