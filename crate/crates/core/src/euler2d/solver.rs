use rayon::prelude::*;

use super::field::{ConservedField, Primitive};
use super::flux::{face_flux, Axis};
use super::setup::{make_initial_data, Background, PerturbationSpec};
use super::Grid2D;
use crate::error::{Error, Result};
use crate::riemann::DensityBounds;

pub const DEFAULT_CFL: f64 = 0.45;

/// Runs stop here so the weights `e^{|y|}` over the cone stay finite.
pub const MAX_TIME: f64 = 300.0;

/// Rows per parallel work item.
const CHUNK_ROWS: usize = 16;

/// Momentum and tracer values below this are flushed to zero so that
/// underflowing tails never reach subnormal arithmetic.
const FLUSH: f64 = 1e-200;

/// `cfl · min(Δx, Δy) / max(|u| + 1, |v| + 1)`.
pub fn cfl_dt(field: &ConservedField, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(Error::Validation(format!(
            "CFL number must lie in (0, 1), got {cfl}"
        )));
    }
    let speed = field
        .cells
        .par_iter()
        .map(|q| {
            if !(q[0] > 0.0 && q.iter().all(|c| c.is_finite())) {
                return f64::NAN;
            }
            let inv = 1.0 / q[0];
            (q[1] * inv).abs().max((q[2] * inv).abs()) + 1.0
        })
        .reduce(
            || 0.0,
            |a, b| {
                if a.is_nan() || b.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            },
        );
    if !speed.is_finite() {
        return Err(Error::Domain(
            "field contains non-finite or non-positive states".into(),
        ));
    }
    Ok(cfl * field.grid.dx().min(field.grid.dy()) / speed)
}

/// One first-order unsplit Godunov step.
///
/// x-boundary ghosts are the exact background at the current time; y-boundary
/// ghosts copy the edge row.
pub fn step(field: &ConservedField, background: &Background, dt: f64) -> Result<ConservedField> {
    let mut out = field.clone();
    let mut prims = Vec::new();
    step_into(field, background, dt, None, &mut prims, &mut out)?;
    Ok(out)
}

fn blow_up(field: &ConservedField, t: f64, k: usize, reason: String) -> Error {
    let g = &field.grid;
    let (i, j) = (k % g.nx, k / g.nx);
    Error::BlowUpSuspected {
        t,
        i,
        j,
        x: g.x_center(i),
        y: g.y_center(j),
        reason,
    }
}

fn step_into(
    field: &ConservedField,
    background: &Background,
    dt: f64,
    bounds: Option<DensityBounds>,
    prims: &mut Vec<Primitive>,
    out: &mut ConservedField,
) -> Result<()> {
    let g = field.grid;
    let (nx, ny) = (g.nx, g.ny);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    prims.clear();
    prims.par_extend(field.cells.par_iter().map(Primitive::from_conserved));
    let prims: &[Primitive] = prims;

    let ghost_l = background.sample_primitive(field.t, g.x_center(0) - g.dx());
    let ghost_r = background.sample_primitive(field.t, g.x_center(nx - 1) + g.dx());
    let (lx, ly) = (dt / g.dx(), dt / g.dy());
    let t_new = field.t + dt;
    out.grid = g;
    out.t = t_new;
    out.cells.resize(g.len(), [0.0; 4]);

    let results: Vec<Result<()>> = out
        .cells
        .par_chunks_mut(nx * CHUNK_ROWS)
        .enumerate()
        .map(|(c, chunk)| {
            let j0 = c * CHUNK_ROWS;
            let rows = chunk.len() / nx;
            // y-face fluxes: face f sits below row j0 + f
            let mut gy = vec![[0.0; 4]; nx * (rows + 1)];
            for f in 0..=rows {
                let jf = j0 + f;
                let below = &prims[jf.saturating_sub(1).min(ny - 1) * nx..][..nx];
                let above = &prims[jf.min(ny - 1) * nx..][..nx];
                let dst = &mut gy[f * nx..(f + 1) * nx];
                for i in 0..nx {
                    dst[i] = face_flux(&below[i], &above[i], Axis::Y)?;
                }
            }
            let mut fx = vec![[0.0; 4]; nx + 1];
            for r in 0..rows {
                let j = j0 + r;
                let row = &prims[j * nx..(j + 1) * nx];
                fx[0] = face_flux(&ghost_l, &row[0], Axis::X)?;
                for i in 1..nx {
                    fx[i] = face_flux(&row[i - 1], &row[i], Axis::X)?;
                }
                fx[nx] = face_flux(&row[nx - 1], &ghost_r, Axis::X)?;
                let old = &field.cells[j * nx..(j + 1) * nx];
                let dst = &mut chunk[r * nx..(r + 1) * nx];
                let (gb, ga) = (&gy[r * nx..(r + 1) * nx], &gy[(r + 1) * nx..(r + 2) * nx]);
                for i in 0..nx {
                    let mut q = [0.0; 4];
                    for k in 0..4 {
                        let v =
                            old[i][k] - lx * (fx[i + 1][k] - fx[i][k]) - ly * (ga[i][k] - gb[i][k]);
                        q[k] = if v.abs() < FLUSH { 0.0 } else { v };
                    }
                    let rho = q[0];
                    if !(rho > 0.0) || !q.iter().all(|v| v.is_finite()) {
                        return Err(blow_up(
                            field,
                            t_new,
                            j * nx + i,
                            format!("invalid state {q:?}"),
                        ));
                    }
                    if let Some(b) = bounds {
                        if !b.contains(rho) {
                            return Err(blow_up(
                                field,
                                t_new,
                                j * nx + i,
                                format!(
                                    "density {rho} left [{}, {}]",
                                    b.rho_star, b.rho_star_upper
                                ),
                            ));
                        }
                    }
                    dst[i] = q;
                }
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<Vec<()>>>()?;
    Ok(())
}

/// Solver settings for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub cfl: f64,
    pub bounds: Option<DensityBounds>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            cfl: DEFAULT_CFL,
            bounds: None,
        }
    }
}

/// Owns the evolving field of one run.
#[derive(Debug, Clone)]
pub struct Simulation {
    spec: PerturbationSpec,
    field: ConservedField,
    scratch: ConservedField,
    prims: Vec<Primitive>,
    options: RunOptions,
    steps: usize,
}

impl Simulation {
    pub fn new(spec: PerturbationSpec, grid: Grid2D, options: RunOptions) -> Result<Self> {
        let field = make_initial_data(&spec, grid)?;
        Self::from_field(spec, field, options)
    }

    pub fn from_field(
        spec: PerturbationSpec,
        field: ConservedField,
        options: RunOptions,
    ) -> Result<Self> {
        if !(options.cfl > 0.0 && options.cfl < 1.0) {
            return Err(Error::Validation(format!(
                "CFL number must lie in (0, 1), got {}",
                options.cfl
            )));
        }
        field.validate()?;
        Ok(Self {
            scratch: field.clone(),
            spec,
            field,
            prims: Vec::new(),
            options,
            steps: 0,
        })
    }

    pub fn field(&self) -> &ConservedField {
        &self.field
    }

    pub fn spec(&self) -> &PerturbationSpec {
        &self.spec
    }

    pub fn time(&self) -> f64 {
        self.field.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advances to exactly `target` with equal CFL-limited sub-steps.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        if target > MAX_TIME {
            return Err(Error::Range(format!(
                "run time {target} exceeds the cap {MAX_TIME}"
            )));
        }
        while self.field.t < target {
            let remaining = target - self.field.t;
            let dt_max = cfl_dt(&self.field, self.options.cfl)?;
            let n = (remaining / dt_max).ceil().max(1.0);
            let dt = remaining / n;
            step_into(
                &self.field,
                &self.spec.background,
                dt,
                self.options.bounds,
                &mut self.prims,
                &mut self.scratch,
            )?;
            std::mem::swap(&mut self.field, &mut self.scratch);
            self.steps += 1;
            if n == 1.0 {
                self.field.t = target;
            }
        }
        Ok(())
    }

    /// Calls `observe` at `t = 0` (or the current time) and at every multiple
    /// of `sample_dt` up to `t_end`.
    pub fn run<F>(&mut self, t_end: f64, sample_dt: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(&ConservedField) -> Result<()>,
    {
        if !(sample_dt > 0.0) {
            return Err(Error::Validation(format!(
                "sample interval must be positive, got {sample_dt}"
            )));
        }
        let start = self.field.t;
        observe(&self.field)?;
        let n = ((t_end - start) / sample_dt + 1e-9).floor() as usize;
        for k in 1..=n {
            self.advance_to(start + k as f64 * sample_dt)?;
            observe(&self.field)?;
        }
        Ok(())
    }
}
