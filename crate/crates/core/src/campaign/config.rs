//! Declarative experiment configuration.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ic::IcSpec;
use crate::diagnostics::{MonitorField, ScheduleKind, TimeGrid};
use crate::error::{Error, Result};
use crate::ns3d::BackgroundMode;
use crate::spectral::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Decay25d,
    RemainderSweep,
    WiegnerMonitor,
    Verify,
}

/// Grid with periods given in multiples of `2π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_h: usize,
    pub n_v: usize,
    #[serde(default = "one")]
    pub l_h_periods: f64,
    #[serde(default = "one")]
    pub l_v_periods: f64,
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.n_h, self.n_v, 2.0 * PI * self.l_h_periods, 2.0 * PI * self.l_v_periods)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub sample_every: usize,
    /// Write a `.fld` checkpoint every this many samples (0 disables).
    #[serde(default)]
    pub checkpoint_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_eps_list")]
    pub eps: Vec<f64>,
    /// Fixed `ε` for the 2.5-D system; by default each lift uses its own `ε`.
    #[serde(default)]
    pub eps_25d: Option<f64>,
    #[serde(default = "default_background")]
    pub background: BackgroundMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            eps: default_eps_list(),
            eps_25d: None,
            background: default_background(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    #[serde(default = "half")]
    pub delta: f64,
    /// Time scale `T` of the cut-off schedules.
    #[serde(default = "one")]
    pub t_scale: f64,
    #[serde(default = "default_schedules")]
    pub schedules: Vec<ScheduleKind>,
    #[serde(default = "default_fields")]
    pub fields: Vec<MonitorField>,
    /// Constant on the right-hand side of the monitored inequalities.
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub c_delta: f64,
    /// Generic constant in `C₁`.
    #[serde(default = "one")]
    pub c_generic: f64,
    #[serde(default)]
    pub t_grid: TimeGrid,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            delta: 0.5,
            t_scale: 1.0,
            schedules: default_schedules(),
            fields: default_fields(),
            c: 1.0,
            c_delta: 1.0,
            c_generic: 1.0,
            t_grid: TimeGrid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Decay fit window; defaults to `[5, (L_h/2π)²/4]`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// `ε` of single 2.5-D runs (decay and monitor experiments).
    #[serde(default = "quarter")]
    pub eps: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub grid: GridConfig,
    pub ic: IcSpec,
    pub time: TimeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}
fn one_usize() -> usize {
    1
}
fn default_seed() -> u64 {
    7
}
fn default_eps_list() -> Vec<f64> {
    ALLOWED_EPS.to_vec()
}
fn default_background() -> BackgroundMode {
    BackgroundMode::Stages
}
fn default_schedules() -> Vec<ScheduleKind> {
    vec![ScheduleKind::LogCube, ScheduleKind::PolyDelta]
}
fn default_fields() -> Vec<MonitorField> {
    vec![MonitorField::Velocity, MonitorField::Vorticity]
}

/// Values of `ε` a sweep may use; each halving keeps the slow grids nested.
pub const ALLOWED_EPS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

impl CampaignSpec {
    /// Parses TOML text, applies `KEY=VALUE` overrides and validates.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let spec: CampaignSpec = table.try_into().map_err(|e| Error::Config(format!("{e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, overrides).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.spec().validate()?;
        let t = &self.time;
        if !(t.dt > 0.0 && t.t_end > 0.0 && t.dt.is_finite() && t.t_end.is_finite()) {
            return Err(Error::Config(format!("times must be > 0 (dt = {}, t_end = {})", t.dt, t.t_end)));
        }
        if t.sample_every == 0 {
            return Err(Error::Config("sample_every must be >= 1".into()));
        }
        let m = &self.monitor;
        if !(m.delta > 0.0 && m.delta < 1.0) {
            return Err(Error::Config(format!("delta = {} outside (0, 1)", m.delta)));
        }
        if !(m.t_scale > 0.0) {
            return Err(Error::Config(format!("monitor time scale {} must be > 0", m.t_scale)));
        }
        m.t_grid.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps = {} must be >= 0", self.eps)));
        }
        if self.experiment == Experiment::RemainderSweep {
            if self.sweep.eps.is_empty() {
                return Err(Error::Config("empty eps list".into()));
            }
            for (i, e) in self.sweep.eps.iter().enumerate() {
                if !ALLOWED_EPS.contains(e) {
                    return Err(Error::Config(format!("eps {e} not in {{1/2, 1/4, 1/8, 1/16}}")));
                }
                if self.sweep.eps[..i].contains(e) {
                    return Err(Error::Config(format!("eps {e} listed twice")));
                }
            }
        }
        if let Some([a, b]) = self.fit.window {
            if !(a >= 0.0 && b > a) {
                return Err(Error::Config(format!("fit window [{a}, {b}] is empty")));
            }
        }
        self.ic.validate()
    }

    /// Canonical JSON of the resolved spec (what the hash covers).
    pub fn canonical_json(&self) -> String {
        let mut s = self.clone();
        // where outputs go does not change the numbers
        s.out_dir = None;
        serde_json::to_string(&s).expect("spec serialises")
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn fit_window(&self) -> (f64, f64) {
        match self.fit.window {
            Some([a, b]) => (a, b),
            None => (5.0, 0.25 * self.grid.l_h_periods.powi(2)),
        }
    }
}

/// Sets `a.b.c = value` in a TOML table. The value is parsed as TOML and
/// falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not KEY=VALUE")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?}: {p} is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
