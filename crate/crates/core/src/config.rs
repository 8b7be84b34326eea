//! TOML experiment configuration.
//!
//! Every key is optional; absent keys take the defaults below. Unknown keys
//! are rejected.
//!
//! ```toml
//! [background]
//! rho_l = 1.0
//! u_l = 1.0
//! rho_r = 1.0
//! u_r = -1.0
//!
//! [perturbation]
//! epsilon = 0.1
//! a = 0.5
//! b = 1.0
//! pi_amplitude = 0.5
//!
//! [grid]          # domain [-lx, lx] x [-ly, ly]
//! nx = 400
//! ny = 400
//! lx = 10.0
//! ly = 10.0
//!
//! [run]
//! cfl = 0.45
//! t_max = 4.0
//! sample_dt = 0.1     # diagnostic interval
//!
//! [sweep]
//! epsilons = [0.2, 0.3, 0.4, 0.6]
//! driver = "simulation"   # or "riccati"
//! threshold_factor = 1000.0
//! threshold_t0 = 1.0
//! # threshold_level = 0.5   (absolute level, overrides the factor)
//! horizon = 20.0
//! spacing = 0.1
//! riccati_c = 1.0
//! riccati_k = 0.5
//! riccati_ratio = 0.001
//!
//! [testfn]
//! r_max = 30.0
//! h = 0.01
//! cells = 48
//!
//! [output]
//! dir = "out"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::euler2d::{
    Background, ConeForm, DefaultFamily, Grid2D, PerturbationSpec, SupportCone, MAX_TIME,
};
use crate::lifespan::Threshold;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundConfig {
    pub rho_l: f64,
    pub u_l: f64,
    pub rho_r: f64,
    pub u_r: f64,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self {
            rho_l: 1.0,
            u_l: 1.0,
            rho_r: 1.0,
            u_r: -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub pi_amplitude: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        let f = DefaultFamily::default();
        Self {
            epsilon: 0.1,
            a: f.a,
            b: f.b,
            pi_amplitude: f.pi_amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: 400,
            ny: 400,
            lx: 10.0,
            ly: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cfl: f64,
    pub t_max: f64,
    pub sample_dt: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cfl: 0.45,
            t_max: 4.0,
            sample_dt: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriverKind {
    Simulation,
    Riccati,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    pub driver: DriverKind,
    pub threshold_factor: f64,
    pub threshold_t0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_level: Option<f64>,
    pub horizon: f64,
    pub spacing: f64,
    pub riccati_c: f64,
    pub riccati_k: f64,
    pub riccati_ratio: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.3, 0.4, 0.6],
            driver: DriverKind::Simulation,
            threshold_factor: Threshold::DEFAULT_FACTOR,
            threshold_t0: 1.0,
            threshold_level: None,
            horizon: 20.0,
            spacing: 0.1,
            riccati_c: 1.0,
            riccati_k: 0.5,
            riccati_ratio: 1e-3,
        }
    }
}

impl SweepConfig {
    pub fn threshold(&self) -> Threshold {
        match self.threshold_level {
            Some(level) => Threshold::Absolute(level),
            None => Threshold::OnsetMultiple {
                factor: self.threshold_factor,
                t0: self.threshold_t0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestfnConfig {
    pub r_max: f64,
    pub h: f64,
    /// Cells per direction of the 3-D quadrature.
    pub cells: usize,
}

impl Default for TestfnConfig {
    fn default() -> Self {
        Self {
            r_max: 30.0,
            h: 1e-2,
            cells: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub background: BackgroundConfig,
    pub perturbation: PerturbationConfig,
    pub grid: GridConfig,
    pub run: RunConfig,
    pub sweep: SweepConfig,
    pub testfn: TestfnConfig,
    pub output: OutputConfig,
}

/// 1-based line of byte offset `pos`.
fn line_of(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].matches('\n').count() + 1
}

/// Key named on the line holding `pos`, or the section header.
fn key_at(text: &str, pos: usize) -> String {
    let start = text[..pos.min(text.len())].rfind('\n').map_or(0, |k| k + 1);
    let line = text[start..].lines().next().unwrap_or("");
    match line.split_once('=') {
        Some((k, _)) => k.trim().to_string(),
        None => line
            .trim()
            .trim_matches(|c| c == '[' || c == ']')
            .to_string(),
    }
}

/// Line of `key` inside `[section]`, or 0 when absent.
fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = "";
    for (n, line) in text.lines().enumerate() {
        let l = line.trim();
        if let Some(rest) = l.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim();
            continue;
        }
        if current == section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim() == key {
                    return n + 1;
                }
            }
        }
    }
    0
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let pos = e.span().map_or(0, |s| s.start);
        Error::Config {
            key: key_at(text, pos),
            line: line_of(text, pos),
            message: e.message().to_string(),
        }
    })?;
    config
        .validate()
        .map_err(|(section, key, message)| Error::Config {
            line: locate(text, section, key),
            key: format!("{section}.{key}"),
            message,
        })?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

type Invalid = (&'static str, &'static str, String);

fn positive(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Invalid> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err((
            section,
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn finite(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Invalid> {
    if v.is_finite() {
        Ok(())
    } else {
        Err((section, key, format!("must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Checks the invariants; the error names the offending section and key.
    pub fn validate(&self) -> std::result::Result<(), Invalid> {
        let b = &self.background;
        positive("background", "rho_l", b.rho_l)?;
        positive("background", "rho_r", b.rho_r)?;
        finite("background", "u_l", b.u_l)?;
        finite("background", "u_r", b.u_r)?;
        let background = self
            .background()
            .map_err(|e| ("background", "u_r", e.to_string()))?;

        let p = &self.perturbation;
        if !(p.epsilon >= 0.0 && p.epsilon.is_finite()) {
            return Err((
                "perturbation",
                "epsilon",
                format!("must be finite and >= 0, got {}", p.epsilon),
            ));
        }
        finite("perturbation", "a", p.a)?;
        finite("perturbation", "b", p.b)?;
        finite("perturbation", "pi_amplitude", p.pi_amplitude)?;
        self.spec()
            .map_err(|e| ("perturbation", "epsilon", e.to_string()))?;

        let g = &self.grid;
        positive("grid", "lx", g.lx)?;
        positive("grid", "ly", g.ly)?;
        if g.nx < 2 {
            return Err(("grid", "nx", format!("must be at least 2, got {}", g.nx)));
        }
        if g.ny < 2 {
            return Err(("grid", "ny", format!("must be at least 2, got {}", g.ny)));
        }
        let grid = self.grid().map_err(|e| ("grid", "nx", e.to_string()))?;
        grid.check_resolves_unit_disk(20)
            .map_err(|e| ("grid", "nx", e.to_string()))?;

        let r = &self.run;
        if !(r.cfl > 0.0 && r.cfl < 1.0) {
            return Err(("run", "cfl", format!("must lie in (0, 1), got {}", r.cfl)));
        }
        positive("run", "t_max", r.t_max)?;
        if r.t_max > MAX_TIME {
            return Err(("run", "t_max", format!("exceeds the cap {MAX_TIME}")));
        }
        positive("run", "sample_dt", r.sample_dt)?;
        if r.sample_dt > r.t_max {
            return Err(("run", "sample_dt", format!("exceeds t_max = {}", r.t_max)));
        }
        let reach = SupportCone::for_background(&background).radius(r.t_max, ConeForm::AllTime);
        if reach > grid.lx.min(grid.ly) {
            return Err((
                "grid",
                "lx",
                format!(
                    "domain [-{}, {}] x [-{}, {}] does not contain the support cone of radius {reach} at t_max",
                    grid.lx, grid.lx, grid.ly, grid.ly
                ),
            ));
        }

        let s = &self.sweep;
        if s.epsilons.is_empty() {
            return Err(("sweep", "epsilons", "must not be empty".into()));
        }
        for &e in &s.epsilons {
            if !(e > 0.0 && e.is_finite()) {
                return Err((
                    "sweep",
                    "epsilons",
                    format!("entries must be positive, got {e}"),
                ));
            }
        }
        positive("sweep", "threshold_factor", s.threshold_factor)?;
        if !(s.threshold_t0 >= 0.0 && s.threshold_t0.is_finite()) {
            return Err((
                "sweep",
                "threshold_t0",
                format!("must be >= 0, got {}", s.threshold_t0),
            ));
        }
        if let Some(level) = s.threshold_level {
            positive("sweep", "threshold_level", level)?;
        }
        positive("sweep", "horizon", s.horizon)?;
        if s.horizon <= s.threshold_t0 {
            return Err((
                "sweep",
                "horizon",
                format!("must exceed threshold_t0 = {}", s.threshold_t0),
            ));
        }
        if s.driver == DriverKind::Simulation && s.horizon > MAX_TIME {
            return Err(("sweep", "horizon", format!("exceeds the cap {MAX_TIME}")));
        }
        positive("sweep", "spacing", s.spacing)?;
        if s.spacing > 0.1 {
            return Err((
                "sweep",
                "spacing",
                format!("must resolve the unit disk (<= 0.1), got {}", s.spacing),
            ));
        }
        positive("sweep", "riccati_c", s.riccati_c)?;
        positive("sweep", "riccati_k", s.riccati_k)?;
        positive("sweep", "riccati_ratio", s.riccati_ratio)?;

        let t = &self.testfn;
        positive("testfn", "r_max", t.r_max)?;
        if t.r_max > 300.0 {
            return Err((
                "testfn",
                "r_max",
                format!("must be <= 300, got {}", t.r_max),
            ));
        }
        if !(t.h > 0.0 && t.h < 1.0) {
            return Err(("testfn", "h", format!("must lie in (0, 1), got {}", t.h)));
        }
        if t.cells < 2 {
            return Err((
                "testfn",
                "cells",
                format!("must be at least 2, got {}", t.cells),
            ));
        }

        if self.output.dir.is_empty() {
            return Err(("output", "dir", "must not be empty".into()));
        }
        Ok(())
    }

    pub fn background(&self) -> Result<Background> {
        let b = &self.background;
        Background::new(b.rho_l, b.u_l, b.rho_r, b.u_r)
    }

    pub fn family(&self) -> DefaultFamily {
        DefaultFamily {
            a: self.perturbation.a,
            b: self.perturbation.b,
            pi_amplitude: self.perturbation.pi_amplitude,
        }
    }

    pub fn spec(&self) -> Result<PerturbationSpec> {
        PerturbationSpec::new(
            self.perturbation.epsilon,
            self.background()?,
            std::sync::Arc::new(self.family()),
        )
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let g = &self.grid;
        Grid2D::new(g.lx, g.ly, g.nx, g.ny)
    }

    /// Canonical TOML text; the config hash is taken over it.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`to_toml`](Self::to_toml).
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!((c.grid.nx, c.grid.ny), (400, 400));
        assert_eq!(c.perturbation.epsilon, 0.1);
        assert_eq!(c.run.cfl, 0.45);
        assert_eq!(c.background().unwrap(), Background::symmetric());
    }

    #[test]
    fn negative_epsilon_names_the_key() {
        let err = parse_config("[perturbation]\na = 0.5\nepsilon = -1\n").unwrap_err();
        match err {
            Error::Config { key, line, .. } => {
                assert_eq!(key, "perturbation.epsilon");
                assert_eq!(line, 3);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_and_malformed_keys() {
        match parse_config("[run]\ncfl = 0.4\nstride = 3\n").unwrap_err() {
            Error::Config { key, line, message } => {
                assert_eq!((key.as_str(), line), ("stride", 3), "{message}");
            }
            e => panic!("{e}"),
        }
        match parse_config("\n[grid]\nnx = \"many\"\n").unwrap_err() {
            Error::Config { key, line, .. } => assert_eq!((key.as_str(), line), ("nx", 3)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn cone_must_fit() {
        let err = parse_config("[run]\nt_max = 6.0\n").unwrap_err();
        assert!(err.to_string().contains("support cone"), "{err}");
    }

    #[test]
    fn round_trip_and_hash() {
        let c = parse_config("[perturbation]\nepsilon = 0.25\n[sweep]\nthreshold_level = 0.3\n")
            .unwrap();
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        assert_ne!(c.hash(), ExperimentConfig::default().hash());
        assert_eq!(c.sweep.threshold(), Threshold::Absolute(0.3));
    }
}
