//! Riccati comparison lifespans.
//!
//! A trajectory with `W′ ≥ C W² (1 + t)^{−q}` and `W(t₀) = W₀ > 0` blows up no
//! later than the solution of the equality, which integrates to
//!
//! ```text
//! q = 1/2 (2-D):  1/W₀ − 1/W = 2C(√(1 + t) − √(1 + t₀))
//! q = 1   (3-D):  1/W₀ − 1/W = C ln((1 + t)/(1 + t₀))
//! ```
//!
//! With `W₀ ∝ ε` these give `T ~ ε⁻²` and `T ~ exp(c/ε)`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::euler2d::{
    Background, ConeForm, DefaultFamily, Grid2D, PerturbationSpec, RunOptions, Simulation,
    SupportCone,
};
use crate::functionals::{diagnose, FunctionalSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    /// Exponent `q` of `(1 + t)^{−q}`.
    pub fn exponent(self) -> f64 {
        match self {
            Dimension::Two => 0.5,
            Dimension::Three => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiParams {
    pub c: f64,
    pub t0: f64,
    pub w0: f64,
    pub dimension: Dimension,
}

impl RiccatiParams {
    pub fn new(c: f64, t0: f64, w0: f64, dimension: Dimension) -> Result<Self> {
        let p = Self {
            c,
            t0,
            w0,
            dimension,
        };
        p.validate()?;
        Ok(p)
    }

    /// `W₀` may be zero or negative (no guaranteed blow-up); `C` may not.
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Validation(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(Error::Validation(format!(
                "t0 must be nonnegative, got {}",
                self.t0
            )));
        }
        if !self.w0.is_finite() {
            return Err(Error::Validation(format!(
                "W0 must be finite, got {}",
                self.w0
            )));
        }
        Ok(())
    }

    /// Closed-form solution of the equality at `t ≥ t₀`; `∞` past blow-up.
    pub fn solution(&self, t: f64) -> f64 {
        let inv = 1.0 / self.w0 - self.growth(t);
        if inv > 0.0 {
            1.0 / inv
        } else {
            f64::INFINITY
        }
    }

    /// `1/W₀ − 1/W(t)`.
    fn growth(&self, t: f64) -> f64 {
        match self.dimension {
            Dimension::Two => 2.0 * self.c * ((1.0 + t).sqrt() - (1.0 + self.t0).sqrt()),
            Dimension::Three => self.c * ((1.0 + t) / (1.0 + self.t0)).ln(),
        }
    }

    /// Time at which the equality solution reaches `amount = 1/W₀ − 1/W`.
    fn time_for_growth(&self, amount: f64) -> f64 {
        match self.dimension {
            Dimension::Two => {
                let s = (1.0 + self.t0).sqrt() + amount / (2.0 * self.c);
                s * s - 1.0
            }
            Dimension::Three => (1.0 + self.t0) * (amount / self.c).exp() - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Numeric,
    SimulationProxy,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Numeric => "numeric",
            Method::SimulationProxy => "simulation-proxy",
        }
    }
}

/// Blow-up time, or the horizon reached without blow-up when `censored`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifespanEstimate {
    pub blowup_time: f64,
    pub censored: bool,
    pub method: Method,
}

impl LifespanEstimate {
    pub fn exact(blowup_time: f64) -> Self {
        Self {
            blowup_time,
            censored: false,
            method: Method::ClosedForm,
        }
    }
}

pub fn riccati_blowup_time(params: &RiccatiParams) -> Result<LifespanEstimate> {
    params.validate()?;
    if params.w0 <= 0.0 {
        return Ok(LifespanEstimate {
            blowup_time: f64::INFINITY,
            censored: true,
            method: Method::ClosedForm,
        });
    }
    let t = params.time_for_growth(1.0 / params.w0);
    Ok(LifespanEstimate {
        blowup_time: t,
        censored: !t.is_finite(),
        method: Method::ClosedForm,
    })
}

/// First time the equality solution reaches `level`; `None` if `level ≤ W₀`
/// is not above the start or the solution never gets there.
pub fn riccati_threshold_time(params: &RiccatiParams, level: f64) -> Result<Option<f64>> {
    params.validate()?;
    if params.w0 <= 0.0 || level <= params.w0 {
        return Ok(None);
    }
    let t = params.time_for_growth(1.0 / params.w0 - 1.0 / level);
    Ok(t.is_finite().then_some(t))
}

/// Local relative error target of the integrator.
const LOCAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
}

/// Integrates `W′ = C W² (1 + t)^{−q}` from `t₀` with classical RK4 and
/// step doubling. `dt` is the initial step. Blow-up is declared once `W`
/// exceeds `1/(machine ε · W₀)` or the step drops below the spacing of `t`.
pub fn integrate_riccati(
    params: &RiccatiParams,
    horizon: f64,
    dt: f64,
) -> Result<(Trajectory, LifespanEstimate)> {
    params.validate()?;
    if !(dt > 0.0) {
        return Err(Error::Validation(format!(
            "initial step must be positive, got {dt}"
        )));
    }
    if !(horizon > params.t0) {
        return Err(Error::Validation(format!(
            "horizon {horizon} must exceed t0 = {}",
            params.t0
        )));
    }
    let q = params.dimension.exponent();
    let c = params.c;
    let f = |t: f64, w: f64| c * w * w * (1.0 + t).powf(-q);
    let rk4 = |t: f64, w: f64, h: f64| {
        let k1 = f(t, w);
        let k2 = f(t + 0.5 * h, w + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, w + 0.5 * h * k2);
        let k4 = f(t + h, w + h * k3);
        w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let cap = if params.w0 > 0.0 {
        1.0 / (f64::EPSILON * params.w0)
    } else {
        f64::INFINITY
    };
    let mut traj = Trajectory {
        t: vec![params.t0],
        w: vec![params.w0],
    };
    let (mut t, mut w, mut h) = (params.t0, params.w0, dt);
    let mut rejections = 0usize;
    while t < horizon {
        h = h.min(horizon - t);
        let full = rk4(t, w, h);
        let half = rk4(t, w, 0.5 * h);
        let two = rk4(t + 0.5 * h, half, 0.5 * h);
        let err = (two - full).abs() / 15.0;
        let scale = two.abs().max(f64::MIN_POSITIVE);
        if !two.is_finite() || err > LOCAL_TOL * scale {
            h *= if two.is_finite() {
                (0.9 * (LOCAL_TOL * scale / err).powf(0.2)).max(0.1)
            } else {
                0.1
            };
            rejections += 1;
            if h < 1e-300 || rejections > 100_000 {
                return Err(Error::Convergence {
                    tol: LOCAL_TOL,
                    iterations: rejections,
                    lo: t,
                    hi: t + h,
                });
            }
            continue;
        }
        let t_next = t + h;
        w = two + (two - full) / 15.0;
        // once the step falls below the spacing of t the time is resolved
        let stalled = t_next == t;
        t = t_next;
        if !stalled {
            traj.t.push(t);
            traj.w.push(w);
        }
        if w > cap || stalled {
            return Ok((
                traj,
                LifespanEstimate {
                    blowup_time: t,
                    censored: false,
                    method: Method::Numeric,
                },
            ));
        }
        let growth = if err > 0.0 {
            0.9 * (LOCAL_TOL * scale / err).powf(0.2)
        } else {
            4.0
        };
        h *= growth.clamp(0.1, 4.0);
    }
    Ok((
        traj,
        LifespanEstimate {
            blowup_time: horizon,
            censored: true,
            method: Method::Numeric,
        },
    ))
}

/// One sweep result, or one `(ε, T)` input to a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub estimate: LifespanEstimate,
    /// W-level the proxy was measured against.
    pub threshold: f64,
    /// Time the run stopped on a blow-up-suspected signal, if it did.
    pub breakdown: Option<f64>,
}

impl SweepPoint {
    pub fn exact(epsilon: f64, t: f64) -> Self {
        Self {
            epsilon,
            estimate: LifespanEstimate::exact(t),
            threshold: f64::NAN,
            breakdown: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    /// `p` in `T = A ε^p`.
    pub exponent: f64,
    pub prefactor: f64,
    pub max_rel_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    /// `c` in `T = A e^{c/ε}`.
    pub rate: f64,
    pub prefactor: f64,
    pub max_rel_residual: f64,
}

fn fit_inputs(samples: &[SweepPoint]) -> Result<Vec<(f64, f64)>> {
    if samples.len() < 3 {
        return Err(Error::Validation(format!(
            "a fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    samples
        .iter()
        .map(|s| {
            if s.estimate.censored {
                return Err(Error::CensoredSample { epsilon: s.epsilon });
            }
            let t = s.estimate.blowup_time;
            if !(s.epsilon > 0.0 && t > 0.0 && t.is_finite()) {
                return Err(Error::Validation(format!(
                    "fit samples must be positive, got (epsilon, T) = ({}, {t})",
                    s.epsilon
                )));
            }
            Ok((s.epsilon, t))
        })
        .collect()
}

/// Least-squares line `y = slope·x + intercept`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `log T = p log ε + log A`.
pub fn fit_power_law(samples: &[SweepPoint]) -> Result<PowerFit> {
    let data = fit_inputs(samples)?;
    let logs: Vec<_> = data.iter().map(|(e, t)| (e.ln(), t.ln())).collect();
    let (p, ln_a) = least_squares(&logs);
    let a = ln_a.exp();
    let max_rel_residual = data
        .iter()
        .map(|(e, t)| (t / (a * e.powf(p)) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(PowerFit {
        exponent: p,
        prefactor: a,
        max_rel_residual,
    })
}

/// Fits `log T = c/ε + log A`.
pub fn fit_exp_law(samples: &[SweepPoint]) -> Result<ExpFit> {
    let data = fit_inputs(samples)?;
    let pts: Vec<_> = data.iter().map(|(e, t)| (1.0 / e, t.ln())).collect();
    let (c, ln_a) = least_squares(&pts);
    let max_rel_residual = data
        .iter()
        .map(|(e, t)| ((t.ln() - (c / e + ln_a)).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ExpFit {
        rate: c,
        prefactor: ln_a.exp(),
        max_rel_residual,
    })
}

/// W-level at which the lifespan proxy is read off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Absolute(f64),
    /// `factor · W(t₀)` with `W(t₀)` taken at the first sample `≥ t₀`.
    OnsetMultiple {
        factor: f64,
        t0: f64,
    },
}

impl Threshold {
    pub const DEFAULT_FACTOR: f64 = 1e3;

    pub fn level(&self, series: &FunctionalSeries) -> Result<f64> {
        match *self {
            Threshold::Absolute(level) => Ok(level),
            Threshold::OnsetMultiple { factor, t0 } => {
                let k = series
                    .t
                    .iter()
                    .position(|&t| t >= t0 - 1e-12)
                    .ok_or_else(|| {
                        Error::Validation(format!("series ends before the onset time {t0}"))
                    })?;
                Ok(factor * series.w[k])
            }
        }
    }
}

/// Produces the `W` series of one perturbation amplitude.
pub trait SweepDriver: Sync {
    fn run(&self, epsilon: f64) -> Result<DriverRun>;
}

/// Series of one driver run; `breakdown` is set when the run stopped early
/// on a blow-up-suspected signal.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverRun {
    pub series: FunctionalSeries,
    pub breakdown: Option<f64>,
}

/// First sample time with `W ≥ level`, censored at the last sample.
pub fn proxy_time(series: &FunctionalSeries, level: f64) -> LifespanEstimate {
    match series.t.iter().zip(&series.w).find(|(_, &w)| w >= level) {
        Some((&t, _)) => LifespanEstimate {
            blowup_time: t,
            censored: false,
            method: Method::SimulationProxy,
        },
        None => LifespanEstimate {
            blowup_time: series.t.last().copied().unwrap_or(0.0),
            censored: true,
            method: Method::SimulationProxy,
        },
    }
}

/// Runs the driver for every amplitude of the plan; results keep the plan
/// order.
pub fn lifespan_sweep(
    plan: &[f64],
    threshold: Threshold,
    driver: &dyn SweepDriver,
) -> Result<Vec<SweepPoint>> {
    let mut plan = plan.to_vec();
    plan.sort_by(f64::total_cmp);
    plan.par_iter()
        .map(|&epsilon| {
            let wrap = |e: Error| Error::Driver {
                epsilon,
                source: Box::new(e),
            };
            let run = driver.run(epsilon).map_err(wrap)?;
            let level = threshold.level(&run.series).map_err(wrap)?;
            Ok(SweepPoint {
                epsilon,
                estimate: proxy_time(&run.series, level),
                threshold: level,
                breakdown: run.breakdown,
            })
        })
        .collect()
}

pub const SWEEP_COLUMNS: &str = "epsilon,T_proxy,censored,threshold,method";

pub fn write_sweep_csv(points: &[SweepPoint], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{SWEEP_COLUMNS}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.epsilon,
            p.estimate.blowup_time,
            p.estimate.censored,
            p.threshold,
            p.estimate.method.name()
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Emits the closed-form equality solution with `W₀ = k·ε`: the value `W₀`
/// at `t = 0`, then samples with `1 + t` growing by the factor `1 + ratio`
/// from `t₀` up to `horizon` (or until it diverges).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiDriver {
    pub c: f64,
    pub t0: f64,
    pub k: f64,
    pub dimension: Dimension,
    pub ratio: f64,
    pub horizon: f64,
}

impl SweepDriver for RiccatiDriver {
    fn run(&self, epsilon: f64) -> Result<DriverRun> {
        let p = RiccatiParams::new(self.c, self.t0, self.k * epsilon, self.dimension)?;
        if !(self.ratio > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Validation(format!(
                "sample ratio must be positive and the horizon finite, got {} and {}",
                self.ratio, self.horizon
            )));
        }
        let mut series = FunctionalSeries::default();
        if p.t0 > 0.0 {
            series.t.push(0.0);
            series.w.push(p.w0);
        }
        for k in 0.. {
            let t = (1.0 + p.t0) * (1.0 + self.ratio).powi(k) - 1.0;
            let w = p.solution(t);
            if t > self.horizon || !w.is_finite() {
                break;
            }
            series.t.push(t);
            series.w.push(w);
        }
        Ok(DriverRun {
            series,
            breakdown: None,
        })
    }
}

/// Finite-volume runs of the default family on a square domain wide enough
/// that the all-time cone stays inside up to `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationDriver {
    pub background: Background,
    pub family: DefaultFamily,
    pub spacing: f64,
    pub horizon: f64,
    pub sample_dt: f64,
    pub cfl: f64,
}

impl SimulationDriver {
    pub fn grid(&self) -> Result<Grid2D> {
        let cone = SupportCone::for_background(&self.background);
        let l = cone.radius(self.horizon, ConeForm::AllTime) + 2.0 * self.spacing;
        Grid2D::with_spacing(l, l, self.spacing)
    }
}

impl SweepDriver for SimulationDriver {
    fn run(&self, epsilon: f64) -> Result<DriverRun> {
        let spec = PerturbationSpec::new(epsilon, self.background, Arc::new(self.family))?;
        let cone = SupportCone::for_background(&self.background);
        let options = RunOptions {
            cfl: self.cfl,
            bounds: None,
        };
        let mut sim = Simulation::new(spec.clone(), self.grid()?, options)?;
        let mut samples = Vec::new();
        let outcome = sim.run(self.horizon, self.sample_dt, |f| {
            samples.push(diagnose(f, &spec, &cone, 1.0)?);
            Ok(())
        });
        let breakdown = match outcome {
            Ok(()) => None,
            Err(Error::BlowUpSuspected { t, .. }) if samples.len() >= 2 => Some(t),
            Err(e) => return Err(e),
        };
        Ok(DriverRun {
            series: FunctionalSeries::from_samples(&samples)?,
            breakdown,
        })
    }
}
