//! Run configuration: a small sectioned key = value format
//!
//! ```text
//! # comment
//! [grid]
//! dimension = 1
//! nx = 1024
//! lx = 100.53096491487338
//!
//! [model]
//! nonlinearity = gp
//!
//! [run]
//! eps = 0.1
//! t_final = 1.0
//! dt = 1e-3
//! ```
//!
//! Unknown sections or keys are hard errors: a typo must never silently
//! fall back to a default. Every key is optional; defaults reproduce the
//! standard 1d Gross-Pitaevskii setup.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, DEFAULT_LENGTH};
use crate::nonlinearity::NonlinearityModel;
use crate::profiles::{InitialDataConfig, Preparedness, Profile};

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dimension: usize,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dimension: 1, nx: 1024, ny: 64, lx: DEFAULT_LENGTH, ly: DEFAULT_LENGTH }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<PeriodicGrid>> {
        let g = match self.dimension {
            1 => PeriodicGrid::new_1d(self.nx, self.lx)?,
            2 => PeriodicGrid::new_2d(self.nx, self.ny, self.lx, self.ly)?,
            d => return Err(Error::Config(format!("dimension must be 1 or 2, got {d}"))),
        };
        Ok(Arc::new(g))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub eps: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Optional hard cap; runs refuse a dt above it.
    pub dt_max: Option<f64>,
    /// Approximate number of recorded snapshots over the run.
    pub snapshots: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { eps: 0.1, t_final: 1.0, dt: 1e-3, dt_max: None, snapshots: 10 }
    }
}

impl TimeConfig {
    /// Snapshot stride delivering about `snapshots` records.
    pub fn snapshot_stride(&self) -> usize {
        schedule(self.t_final, self.dt, self.snapshots).1
    }
}

/// Turns (horizon, step ceiling, snapshot target) into a concrete step and
/// recording stride such that the stride divides the step count: kept
/// frames are then uniformly spaced in time, including the final one,
/// which the residual certificates' time stencils require.
pub fn schedule(t_final: f64, dt_cap: f64, snapshots: usize) -> (f64, usize) {
    let steps0 = (t_final / dt_cap).ceil().max(1.0) as usize;
    let stride = (steps0 / snapshots.max(1)).max(1);
    let steps = stride * steps0.div_ceil(stride);
    (t_final / steps as f64, stride)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// Strictly decreasing, each in (0, 1).
    pub eps_list: Vec<f64>,
    /// Sobolev index for the H^s error diagnostic.
    pub hs_order: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { eps_list: vec![0.2, 0.1, 0.05], hs_order: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSettings {
    /// Window half-width; defaults to lx/8 at build time.
    pub r: Option<f64>,
    /// Horizon; None = one traversal per eps.
    pub t: Option<f64>,
    pub allow_wrap: bool,
}

impl Default for TransportSettings {
    fn default() -> Self {
        TransportSettings { r: None, t: None, allow_wrap: false }
    }
}

/// Raw initial-data keys; assembled into [`InitialDataConfig`] once the
/// profile kind is known.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSettings {
    pub profile: String,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    pub sigma: Option<f64>,
    pub kmax: usize,
    pub seed: u64,
    pub preparedness: String,
    pub theta: f64,
    pub transverse: f64,
}

impl Default for InitialSettings {
    fn default() -> Self {
        InitialSettings {
            profile: "sech2".into(),
            amplitude: -0.5,
            width: 1.0,
            center: 0.0,
            sigma: None,
            kmax: 8,
            seed: 0,
            preparedness: "well".into(),
            theta: 1.0,
            transverse: 0.25,
        }
    }
}

impl InitialSettings {
    pub fn build(&self) -> Result<InitialDataConfig> {
        let profile = match self.profile.as_str() {
            "sech2" => Profile::Sech2 {
                amplitude: self.amplitude,
                width: self.width,
                center: self.center,
            },
            "gaussian" => Profile::Gaussian {
                amplitude: self.amplitude,
                width: self.width,
                center: self.center,
            },
            "random" | "random_band_limited" => Profile::RandomBandLimited {
                amplitude: self.amplitude,
                kmax: self.kmax,
                seed: self.seed,
            },
            "soliton" => Profile::Soliton { sigma: self.sigma },
            other => {
                return Err(Error::Config(format!(
                    "unknown profile '{other}' (expected sech2, gaussian, random, soliton)"
                )))
            }
        };
        let preparedness = match self.preparedness.as_str() {
            "well" => Preparedness::Well,
            "slightly" => Preparedness::Slightly { theta: self.theta },
            "ill" => Preparedness::Ill,
            other => {
                return Err(Error::Config(format!(
                    "unknown preparedness '{other}' (expected well, slightly, ill)"
                )))
            }
        };
        Ok(InitialDataConfig { profile, preparedness, transverse: self.transverse })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: NonlinearityModel,
    pub run: TimeConfig,
    pub initial: InitialSettings,
    pub sweep: SweepSettings,
    pub transport: TransportSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig::default(),
            model: NonlinearityModel::gross_pitaevskii(),
            run: TimeConfig::default(),
            initial: InitialSettings::default(),
            sweep: SweepSettings::default(),
            transport: TransportSettings::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Config(format!("line {line}: cannot parse '{value}' for key '{key}'"))
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("line {line}: key '{key}' wants true/false, got '{value}'"))),
    }
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_num::<f64>(line, key, s.trim()))
        .collect()
}

impl RunConfig {
    /// Parses the sectioned text; unknown sections/keys are errors.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {lineno}: unterminated section")))?
                    .trim();
                match name {
                    "grid" | "model" | "run" | "initial" | "sweep" | "transport" => {
                        section = name.to_string();
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "line {lineno}: unknown section [{other}]"
                        )))
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {lineno}: expected 'key = value', got '{line}'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(Error::Config(format!("line {lineno}: empty value for '{key}'")));
            }
            match (section.as_str(), key) {
                ("grid", "dimension") => cfg.grid.dimension = parse_num(lineno, key, value)?,
                ("grid", "nx") => cfg.grid.nx = parse_num(lineno, key, value)?,
                ("grid", "ny") => cfg.grid.ny = parse_num(lineno, key, value)?,
                ("grid", "lx") => cfg.grid.lx = parse_num(lineno, key, value)?,
                ("grid", "ly") => cfg.grid.ly = parse_num(lineno, key, value)?,
                ("model", "nonlinearity") => cfg.model = NonlinearityModel::parse(value)?,
                ("run", "eps") => cfg.run.eps = parse_num(lineno, key, value)?,
                ("run", "t_final") => cfg.run.t_final = parse_num(lineno, key, value)?,
                ("run", "dt") => cfg.run.dt = parse_num(lineno, key, value)?,
                ("run", "dt_max") => cfg.run.dt_max = Some(parse_num(lineno, key, value)?),
                ("run", "snapshots") => cfg.run.snapshots = parse_num(lineno, key, value)?,
                ("initial", "profile") => cfg.initial.profile = value.to_string(),
                ("initial", "amplitude") => cfg.initial.amplitude = parse_num(lineno, key, value)?,
                ("initial", "width") => cfg.initial.width = parse_num(lineno, key, value)?,
                ("initial", "center") => cfg.initial.center = parse_num(lineno, key, value)?,
                ("initial", "sigma") => cfg.initial.sigma = Some(parse_num(lineno, key, value)?),
                ("initial", "kmax") => cfg.initial.kmax = parse_num(lineno, key, value)?,
                ("initial", "seed") => cfg.initial.seed = parse_num(lineno, key, value)?,
                ("initial", "preparedness") => cfg.initial.preparedness = value.to_string(),
                ("initial", "theta") => cfg.initial.theta = parse_num(lineno, key, value)?,
                ("initial", "transverse") => cfg.initial.transverse = parse_num(lineno, key, value)?,
                ("sweep", "eps_list") => cfg.sweep.eps_list = parse_list(lineno, key, value)?,
                ("sweep", "hs_order") => cfg.sweep.hs_order = parse_num(lineno, key, value)?,
                ("transport", "R") => cfg.transport.r = Some(parse_num(lineno, key, value)?),
                ("transport", "T") => cfg.transport.t = Some(parse_num(lineno, key, value)?),
                ("transport", "allow_wrap") => {
                    cfg.transport.allow_wrap = parse_bool(lineno, key, value)?
                }
                ("", k) => {
                    return Err(Error::Config(format!(
                        "line {lineno}: key '{k}' appears before any [section]"
                    )))
                }
                (s, k) => {
                    return Err(Error::Config(format!(
                        "line {lineno}: unknown key '{k}' in section [{s}]"
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if !(self.run.eps > 0.0 && self.run.eps < 1.0) {
            return Err(Error::Config(format!("eps = {} outside (0, 1)", self.run.eps)));
        }
        if self.run.dt <= 0.0 || self.run.t_final <= 0.0 {
            return Err(Error::Config(format!(
                "dt = {} and t_final = {} must be positive",
                self.run.dt, self.run.t_final
            )));
        }
        if let Some(cap) = self.run.dt_max {
            if self.run.dt > cap {
                return Err(Error::Config(format!(
                    "dt = {} exceeds the configured dt_max = {cap}",
                    self.run.dt
                )));
            }
        }
        if self.sweep.eps_list.is_empty() {
            return Err(Error::Config("eps_list must not be empty".into()));
        }
        for w in self.sweep.eps_list.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Config(format!(
                    "eps_list must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for &e in &self.sweep.eps_list {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Config(format!("eps_list entry {e} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_an_empty_config() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
# production setup
[grid]
dimension = 2
nx = 256
ny = 64
lx = 100.0
ly = 50.0

[model]
nonlinearity = cubic_quintic

[run]
eps = 0.2
t_final = 0.5
dt = 5e-4
snapshots = 20

[initial]
profile = gaussian
amplitude = 0.3
width = 2.0
preparedness = slightly
theta = 0.5

[sweep]
eps_list = 0.2, 0.1
hs_order = 2

[transport]
R = 12.5
allow_wrap = true
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.grid.dimension, 2);
        assert_eq!(cfg.grid.nx, 256);
        assert_eq!(cfg.model.kind(), crate::nonlinearity::ModelKind::CubicQuintic);
        assert_eq!(cfg.run.eps, 0.2);
        assert_eq!(cfg.run.snapshots, 20);
        assert_eq!(cfg.initial.profile, "gaussian");
        assert_eq!(cfg.initial.theta, 0.5);
        assert_eq!(cfg.sweep.eps_list, vec![0.2, 0.1]);
        assert_eq!(cfg.sweep.hs_order, 2.0);
        assert_eq!(cfg.transport.r, Some(12.5));
        assert!(cfg.transport.allow_wrap);
        let init = cfg.initial.build().unwrap();
        assert!(matches!(init.preparedness, Preparedness::Slightly { theta } if theta == 0.5));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::parse("[grid]\nn_x = 12\n");
        assert!(matches!(err, Err(Error::Config(msg)) if msg.contains("n_x")));
    }

    #[test]
    fn unknown_section_is_rejected() {
        let err = RunConfig::parse("[grdi]\nnx = 12\n");
        assert!(matches!(err, Err(Error::Config(msg)) if msg.contains("grdi")));
    }

    #[test]
    fn key_outside_section_is_rejected() {
        let err = RunConfig::parse("nx = 12\n");
        assert!(matches!(err, Err(Error::Config(msg)) if msg.contains("before any")));
    }

    #[test]
    fn increasing_eps_list_is_rejected() {
        let err = RunConfig::parse("[sweep]\neps_list = 0.1, 0.2\n");
        assert!(matches!(err, Err(Error::Config(msg)) if msg.contains("decreasing")));
    }

    #[test]
    fn dt_above_cap_is_rejected() {
        let err = RunConfig::parse("[run]\ndt = 1e-2\ndt_max = 1e-3\n");
        assert!(matches!(err, Err(Error::Config(msg)) if msg.contains("dt_max")));
    }

    #[test]
    fn malformed_lines_are_rejected_with_line_numbers() {
        let err = RunConfig::parse("[run]\neps 0.1\n");
        assert!(matches!(err, Err(Error::Config(msg)) if msg.contains("line 2")));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse("# top\n\n[run]\neps = 0.2  # inline\n").unwrap();
        assert_eq!(cfg.run.eps, 0.2);
    }

    #[test]
    fn snapshot_stride_is_derived_from_the_count() {
        let cfg = RunConfig::parse("[run]\nt_final = 1.0\ndt = 1e-3\nsnapshots = 10\n").unwrap();
        assert_eq!(cfg.run.snapshot_stride(), 100);
    }

    #[test]
    fn schedule_keeps_frames_uniform() {
        // 50 steps at the cap, 6 snapshots: naive stride 8 leaves a short
        // 2-step tail; the schedule pads to 56 steps instead
        for (t, cap, snaps) in [(0.05, 1e-3, 6), (1.0, 1e-3, 7), (0.3, 2.3e-4, 10)] {
            let (dt, stride) = schedule(t, cap, snaps);
            assert!(dt <= cap * (1.0 + 1e-12), "dt {dt} above cap {cap}");
            let steps = (t / dt).round() as usize;
            assert!((t / dt - steps as f64).abs() < 1e-9);
            assert_eq!(steps % stride, 0, "stride {stride} must divide steps {steps}");
        }
    }
}
