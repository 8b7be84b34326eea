//! Experiment harness behind the command-line tool.
//!
//! Each run writes into `<out>/<mode>-<hash prefix>/`: a copy of the config,
//! the CSV artifacts of the mode and a `report.txt` whose first line names
//! the full config hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{DriverKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::euler2d::{initial_hypotheses, Grid2D, RunOptions, Simulation, SupportCone};
use crate::functionals::{
    diagnose, verify_inequality_chain, verify_lemma31, FunctionalSeries, Sample,
};
use crate::lifespan::{
    fit_exp_law, fit_power_law, lifespan_sweep, write_sweep_csv, Dimension, RiccatiDriver,
    SimulationDriver, SweepDriver, SweepPoint,
};
use crate::riemann::{check_entropy, rh_residual, solve_middle_state, GasState, DEFAULT_TOL};
use crate::testfn3d::{
    eval_df, eval_f, three_d_initial_functionals, verify_growth_bound, verify_pde_identity,
    DefaultFamily3D, TestFunction, ThreeDInitialData,
};

/// Tolerance on `|v|` outside the all-time cone.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Relative slack allowed in `Y² ≤ M·S`.
pub const HOLDER_TOL: f64 = 1e-12;
/// Velocity scale of the manufactured identity violation.
pub const MANUFACTURED_V_SCALE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    VerifyIdentities { refine: usize },
    Sweep,
    Testfn,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Single => "simulate",
            Mode::VerifyIdentities { .. } => "verify-identities",
            Mode::Sweep => "sweep",
            Mode::Testfn => "testfn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: String,
    pub artifacts: Vec<PathBuf>,
}

/// Process exit status of an error: 2 configuration, 3 numerical
/// breakdown, 4 internal.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Validation(_) | Error::Domain(_) | Error::Range(_) => 2,
        Error::BlowUpSuspected { .. }
        | Error::Convergence { .. }
        | Error::FrontDetection { .. } => 3,
        Error::Driver { source, .. } => exit_code(source),
        _ => 4,
    }
}

/// Fan of the configured background states.
pub fn riemann_report(left: GasState, right: GasState) -> Result<String> {
    let fan = solve_middle_state(left, right, DEFAULT_TOL)?;
    let entropy = check_entropy(&fan);
    let m = fan.middle;
    let mut r = String::new();
    let _ = writeln!(r, "left     rho = {}, u = {}", left.rho, left.u);
    let _ = writeln!(r, "right    rho = {}, u = {}", right.rho, right.u);
    let _ = writeln!(r, "middle   rho = {:.12}, u = {:.12}", m.rho, m.u);
    let _ = writeln!(r, "waves    {:?} | {:?}", fan.left_wave, fan.right_wave);
    let _ = writeln!(
        r,
        "speeds   sigma- = {:.12}, contact = {:.12}, sigma+ = {:.12}",
        fan.sigma_minus, fan.contact_speed, fan.sigma_plus
    );
    if fan.is_two_shock() {
        let (a, b) = rh_residual(left, m, fan.sigma_minus);
        let (c, d) = rh_residual(m, right, fan.sigma_plus);
        let _ = writeln!(
            r,
            "rh       max residual = {:.3e}",
            a.abs().max(b.abs()).max(c.abs()).max(d.abs())
        );
    }
    let _ = writeln!(r, "entropy  {:?}", entropy.verdict);
    Ok(r)
}

fn prepare_dir(config: &ExperimentConfig, mode: Mode, out: &Path) -> Result<(PathBuf, String)> {
    let hash = config.hash();
    let dir = out.join(format!("{}-{}", mode.name(), &hash[..12]));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.toml"), config.to_toml())?;
    Ok((dir, hash))
}

fn finish(dir: PathBuf, report: String, mut artifacts: Vec<PathBuf>) -> Result<RunOutcome> {
    let path = dir.join("report.txt");
    std::fs::write(&path, &report)?;
    artifacts.push(path);
    Ok(RunOutcome {
        dir,
        report,
        artifacts,
    })
}

pub fn run_experiment(config: &ExperimentConfig, mode: Mode, out: &Path) -> Result<RunOutcome> {
    let (dir, hash) = prepare_dir(config, mode, out)?;
    let mut report = format!("config_hash = {hash}\nmode = {}\n", mode.name());
    match mode {
        Mode::Single => run_single(config, dir, report),
        Mode::VerifyIdentities { refine } => run_verify(config, refine, dir, report),
        Mode::Sweep => run_sweep(config, dir, report),
        Mode::Testfn => {
            let csv = dir.join("testfn.csv");
            TestFunction::default().write_profile_csv(&csv)?;
            report.push_str(&testfn_report(config)?);
            finish(dir, report, vec![csv])
        }
    }
}

/// One run with diagnostics at every sample; an early stop on a
/// blow-up-suspected signal is returned next to the samples taken so far.
struct Trace {
    samples: Vec<Sample>,
    manufactured: Vec<Sample>,
    support_violation: f64,
    sim: Simulation,
    stop: Option<Error>,
}

fn trace(config: &ExperimentConfig, grid: Grid2D, manufactured: bool) -> Result<Trace> {
    let spec = config.spec()?;
    let cone = SupportCone::for_background(&spec.background);
    let options = RunOptions {
        cfl: config.run.cfl,
        bounds: None,
    };
    let mut sim = Simulation::new(spec.clone(), grid, options)?;
    let (mut samples, mut bad) = (Vec::new(), Vec::new());
    let outcome = sim.run(config.run.t_max, config.run.sample_dt, |f| {
        samples.push(diagnose(f, &spec, &cone, 1.0)?);
        if manufactured {
            bad.push(diagnose(f, &spec, &cone, MANUFACTURED_V_SCALE)?);
        }
        Ok(())
    });
    let support_violation = samples.iter().map(|s| s.support).fold(0.0, f64::max);
    let stop = match outcome {
        Ok(()) => None,
        Err(e @ Error::BlowUpSuspected { .. }) => Some(e),
        Err(e) => return Err(e),
    };
    Ok(Trace {
        samples,
        manufactured: bad,
        support_violation,
        sim,
        stop,
    })
}

fn abs_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
}

fn run_single(config: &ExperimentConfig, dir: PathBuf, mut report: String) -> Result<RunOutcome> {
    let grid = config.grid()?;
    let spec = config.spec()?;
    let cone = SupportCone::for_background(&spec.background);
    let hyp = initial_hypotheses(&spec, grid)?;
    let tr = trace(config, grid, false)?;
    let mut artifacts = Vec::new();
    let field = tr.sim.field();
    let (bin, csv) = (dir.join("final.bin"), dir.join("final.csv"));
    field.write_binary(&bin)?;
    field.write_csv(&csv)?;
    artifacts.extend([bin, csv]);
    let _ = writeln!(report, "epsilon = {}", config.perturbation.epsilon);
    let _ = writeln!(
        report,
        "grid = {} x {} on [-{}, {}] x [-{}, {}]",
        grid.nx, grid.ny, grid.lx, grid.lx, grid.ly, grid.ly
    );
    let _ = writeln!(report, "t_reached = {}", field.t);
    let _ = writeln!(report, "steps = {}", tr.sim.steps());
    let _ = writeln!(
        report,
        "hypothesis weighted_mass = {:.6e} (>= 0: {})",
        hyp.weighted_mass,
        hyp.weighted_mass >= 0.0
    );
    let _ = writeln!(
        report,
        "hypothesis weighted_momentum = {:.6e} (> 0: {})",
        hyp.weighted_momentum,
        hyp.weighted_momentum > 0.0
    );
    let _ = writeln!(report, "Y(0) = {:.6e}", hyp.y0);
    let _ = writeln!(
        report,
        "support max |v| outside cone = {:.3e} (tol {SUPPORT_TOL:e})",
        tr.support_violation
    );
    if tr.samples.len() >= 2 {
        let series = FunctionalSeries::from_samples(&tr.samples)?;
        let path = dir.join("series.csv");
        series.write_csv(&path)?;
        artifacts.push(path);
        let chain = verify_inequality_chain(&series, &cone, HOLDER_TOL)?;
        let _ = writeln!(
            report,
            "max |X| = {:.3e}, max |Y| = {:.3e}, max |S| = {:.3e}",
            abs_max(&series.x),
            abs_max(&series.y),
            abs_max(&series.s)
        );
        let _ = writeln!(
            report,
            "holder min slack = {:.3e}, failures = {}",
            chain.min_holder_slack, chain.holder_failures
        );
        let _ = writeln!(
            report,
            "mass constant sup M/((t+1)^(1/2) e^t) = {:.6e}",
            chain.mass_constant
        );
        let _ = writeln!(report, "riccati constant = {:.6e}", chain.riccati_constant);
        let _ = writeln!(report, "Z decreases = {}", chain.z_decreases);
        let _ = writeln!(
            report,
            "W(final) = {:.6e}",
            series.w.last().copied().unwrap_or(f64::NAN)
        );
    }
    match tr.stop {
        Some(e) => {
            let _ = writeln!(report, "breakdown: {e}");
            finish(dir, report, artifacts)?;
            Err(e)
        }
        None => finish(dir, report, artifacts),
    }
}

fn run_verify(
    config: &ExperimentConfig,
    refine: usize,
    dir: PathBuf,
    mut report: String,
) -> Result<RunOutcome> {
    let base = config.grid()?;
    let cone = SupportCone::for_background(&config.background()?);
    let mut ladder = Vec::new();
    let mut bad_ladder = Vec::new();
    let mut rows = String::from("dx,r1_max,r1_l2,r2_max,r2_l2,r2_l2_manufactured,mass_constant,holder_failures,support_violation\n");
    for k in 0..=refine {
        let grid = Grid2D::new(base.lx, base.ly, base.nx << k, base.ny << k)?;
        let tr = trace(config, grid, true)?;
        if let Some(e) = tr.stop {
            let _ = writeln!(report, "breakdown at level {k}: {e}");
            finish(dir, report, vec![])?;
            return Err(e);
        }
        let series = FunctionalSeries::from_samples(&tr.samples)?;
        let bad = FunctionalSeries::from_samples(&tr.manufactured)?;
        let chain = verify_inequality_chain(&series, &cone, HOLDER_TOL)?;
        let dx = grid.dx();
        let norms = crate::functionals::ResidualNorms::of(dx, &series)?;
        let bad_norms = crate::functionals::ResidualNorms::of(dx, &bad)?;
        let _ = writeln!(
            rows,
            "{dx},{},{},{},{},{},{},{},{}",
            norms.r1_max,
            norms.r1_l2,
            norms.r2_max,
            norms.r2_l2,
            bad_norms.r2_l2,
            chain.mass_constant,
            chain.holder_failures,
            tr.support_violation
        );
        series.write_csv(&dir.join(format!("series_level{k}.csv")))?;
        ladder.push((dx, series));
        bad_ladder.push((dx, bad));
    }
    let csv = dir.join("ladder.csv");
    std::fs::write(&csv, &rows)?;
    let rep = verify_lemma31(&ladder)?;
    let _ = writeln!(report, "levels = {}", ladder.len());
    report.push_str(&rows);
    if ladder.len() >= 2 {
        let _ = writeln!(
            report,
            "order r1 = {:.3}, order r2 = {:.3}, monotone = {}",
            rep.order_r1, rep.order_r2, rep.monotone
        );
        let _ = writeln!(
            report,
            "identities pass (order >= 0.8) = {}",
            rep.passes(0.8)
        );
        let bad = verify_lemma31(&bad_ladder)?;
        let _ = writeln!(
            report,
            "manufactured violation order r2 = {:.3}",
            bad.order_r2
        );
    }
    let mut artifacts: Vec<PathBuf> = (0..=refine)
        .map(|k| dir.join(format!("series_level{k}.csv")))
        .collect();
    artifacts.push(csv);
    finish(dir, report, artifacts)
}

pub fn sweep_driver(config: &ExperimentConfig) -> Result<Box<dyn SweepDriver>> {
    let s = &config.sweep;
    Ok(match s.driver {
        DriverKind::Riccati => Box::new(RiccatiDriver {
            c: s.riccati_c,
            t0: s.threshold_t0,
            k: s.riccati_k,
            dimension: Dimension::Two,
            ratio: s.riccati_ratio,
            horizon: s.horizon,
        }),
        DriverKind::Simulation => Box::new(SimulationDriver {
            background: config.background()?,
            family: config.family(),
            spacing: s.spacing,
            horizon: s.horizon,
            sample_dt: config.run.sample_dt,
            cfl: config.run.cfl,
        }),
    })
}

/// Text summary of a sweep: the points, monotonicity and both fits.
pub fn fit_report(points: &[SweepPoint]) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "epsilon T_proxy censored threshold breakdown");
    for p in points {
        let b = p.breakdown.map_or("-".to_string(), |t| t.to_string());
        let _ = writeln!(
            r,
            "{} {} {} {} {b}",
            p.epsilon, p.estimate.blowup_time, p.estimate.censored, p.threshold
        );
    }
    let strict = points
        .windows(2)
        .all(|w| !w[1].estimate.censored && w[1].estimate.blowup_time < w[0].estimate.blowup_time);
    let _ = writeln!(r, "strictly decreasing in epsilon = {strict}");
    let kept: Vec<SweepPoint> = points
        .iter()
        .copied()
        .filter(|p| !p.estimate.censored)
        .collect();
    if kept.len() < points.len() {
        let _ = writeln!(
            r,
            "censored samples excluded from fits = {}",
            points.len() - kept.len()
        );
    }
    match fit_power_law(&kept) {
        Ok(f) => {
            let _ = writeln!(
                r,
                "power law: exponent = {:.6}, prefactor = {:.6e}, max relative residual = {:.3e}",
                f.exponent, f.prefactor, f.max_rel_residual
            );
        }
        Err(e) => {
            let _ = writeln!(r, "power law: skipped ({e})");
        }
    }
    match fit_exp_law(&kept) {
        Ok(f) => {
            let _ = writeln!(
                r,
                "exp law: rate = {:.6}, prefactor = {:.6e}, max relative residual = {:.3e}",
                f.rate, f.prefactor, f.max_rel_residual
            );
        }
        Err(e) => {
            let _ = writeln!(r, "exp law: skipped ({e})");
        }
    }
    r
}

fn run_sweep(config: &ExperimentConfig, dir: PathBuf, mut report: String) -> Result<RunOutcome> {
    let driver = sweep_driver(config)?;
    let threshold = config.sweep.threshold();
    let points = lifespan_sweep(&config.sweep.epsilons, threshold, driver.as_ref())?;
    let csv = dir.join("sweep.csv");
    write_sweep_csv(&points, &csv)?;
    let _ = writeln!(report, "driver = {:?}", config.sweep.driver);
    let _ = writeln!(report, "threshold = {threshold:?}");
    let fit = fit_report(&points);
    report.push_str(&fit);
    let fit_path = dir.join("fit.txt");
    std::fs::write(&fit_path, format!("config_hash = {}\n{fit}", config.hash()))?;
    finish(dir, report, vec![csv, fit_path])
}

/// Checks of the 3-D test function and the 3-D hypotheses.
pub fn testfn_report(config: &ExperimentConfig) -> Result<String> {
    let t = &config.testfn;
    let tf = TestFunction::default();
    let mut r = String::new();
    let _ = writeln!(
        r,
        "F(0) = {} (2π = {})",
        eval_f(0.0)?,
        std::f64::consts::TAU
    );
    let _ = writeln!(r, "F(1) = {:.10}", eval_f(1.0)?);
    let _ = writeln!(r, "F(2) = {:.10}", eval_f(2.0)?);
    let _ = writeln!(r, "|grad F(1, 0)| = {:.10}", eval_df(1.0)?);
    let mut agree = 0.0_f64;
    let n = 300;
    for k in 0..=n {
        let rr = t.r_max * k as f64 / n as f64;
        let (q, dq) = tf.quadrature(rr)?;
        let (s, ds) = tf.series(rr)?;
        let (b, db) = tf.bessel(rr)?;
        agree = agree.max(((q - s) / q).abs()).max(((q - b) / q).abs());
        if rr > 0.0 {
            agree = agree
                .max(((dq - ds) / dq).abs())
                .max(((dq - db) / dq).abs());
        }
    }
    let _ = writeln!(
        r,
        "max relative disagreement quadrature/series/bessel on [0, {}] = {agree:.3e}",
        t.r_max
    );
    let pde = verify_pde_identity(t.r_max, t.h)?;
    let _ = writeln!(
        r,
        "laplacian residual h = {}: max = {:.3e}, origin = {:.3e}",
        t.h, pde.max_residual, pde.origin_residual
    );
    let _ = writeln!(
        r,
        "laplacian residual h = {}: max = {:.3e}, origin = {:.3e}",
        0.5 * t.h,
        pde.max_residual_half,
        pde.origin_residual_half
    );
    let _ = writeln!(
        r,
        "laplacian order = {:.3}, origin order = {:.3}",
        pde.order, pde.origin_order
    );
    let g = verify_growth_bound(t.r_max)?;
    let _ = writeln!(r, "growth sup F r^(1/2) e^(-r) = {:.6} at r = {:.4}; tail at r_max = {:.6}; stable = {}; F >= 0 = {}", g.sup, g.sup_at, g.tail, g.stable(), g.nonnegative);
    let bg = config.background()?;
    let data = ThreeDInitialData::new(
        config.perturbation.epsilon,
        bg,
        std::sync::Arc::new(DefaultFamily3D::default()),
    )?;
    let h = three_d_initial_functionals(&data, t.cells)?;
    let _ = writeln!(
        r,
        "3-D X0 = {:.6e} (>= 0: {}), Y0 = {:.6e} (> 0: {})",
        h.x0,
        h.x0 >= 0.0,
        h.y0,
        h.y0 > 0.0
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Validation("x".into())), 2);
        let blow = Error::BlowUpSuspected {
            t: 1.0,
            i: 0,
            j: 0,
            x: 0.0,
            y: 0.0,
            reason: "r".into(),
        };
        assert_eq!(exit_code(&blow), 3);
        let wrapped = Error::Driver {
            epsilon: 0.1,
            source: Box::new(blow),
        };
        assert_eq!(exit_code(&wrapped), 3);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 4);
    }

    #[test]
    fn symmetric_fan_report() {
        let r =
            riemann_report(GasState::new(1.0, 1.0, 0.0), GasState::new(1.0, -1.0, 0.0)).unwrap();
        assert!(r.contains("2.618033988750"), "{r}");
        assert!(r.contains("Admissible"), "{r}");
    }
}
