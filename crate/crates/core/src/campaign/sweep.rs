//! `ε` sweeps of the remainder system and their manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::CampaignSpec;
use super::ic::make_initial_data;
use super::pool::with_workers;
use crate::diagnostics::{fit_line, n_app, running_integral, u0_functional, write_csv, write_json, LineFit};
use crate::error::{Error, Result};
use crate::ns25d::{RunOptions, SliceStackState};
use crate::ns3d::{run_remainder, MarchingSource, RemainderOptions, RemainderRun, SliceSource};
use crate::spectral::fld::write_fld;
use crate::spectral::Grid;

/// Remainder norms below this count as exactly zero.
pub const EXACT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// `‖F^ε‖_{L²_t(Ḣ^{-1/2})}`.
    pub force_norm: Option<f64>,
    /// `sup_t ‖R^ε‖_{Ḣ^{1/2}}`.
    pub remainder_sup_h_half: Option<f64>,
    /// `∫ ‖∇R^ε‖²_{Ḣ^{1/2}}`.
    pub remainder_grad_int: Option<f64>,
    /// `∫ N(u_app)` over the run.
    pub n_u_app: Option<f64>,
    pub u0: Option<f64>,
    /// Every remainder sample at most [`EXACT_TOL`].
    pub exact: Option<bool>,
    pub runtime_s: f64,
    pub config_hash: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitStatus {
    Ok,
    /// All values are (numerically) zero, so there is no slope to fit.
    Degenerate,
    Insufficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub status: FitStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<LineFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub config_hash: String,
    pub spec: CampaignSpec,
    /// One record per `ε`, largest first.
    pub records: Vec<SweepRecord>,
    pub force_slope: SlopeFit,
    pub remainder_slope: SlopeFit,
    /// `sup‖R^{ε/2}‖ / sup‖R^ε‖` for consecutive records.
    pub remainder_ratios: Vec<f64>,
}

/// Least-squares slope of `log value` against `log ε`.
pub fn order_of_convergence(values: &[(f64, f64)]) -> Result<LineFit> {
    if values.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "order of convergence needs >= 3 points, got {}",
            values.len()
        )));
    }
    if let Some((e, v)) = values.iter().find(|(e, v)| !(*v > 0.0 && *e > 0.0)) {
        return Err(Error::InvalidArgument(format!("nonpositive value {v} at eps = {e}")));
    }
    let x: Vec<f64> = values.iter().map(|(e, _)| e.ln()).collect();
    let y: Vec<f64> = values.iter().map(|(_, v)| v.ln()).collect();
    fit_line(&x, &y)
}

fn slope_of(records: &[SweepRecord], pick: impl Fn(&SweepRecord) -> Option<f64>) -> SlopeFit {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.status == RecordStatus::Ok)
        .filter_map(|r| pick(r).map(|v| (r.eps, v)))
        .collect();
    if pts.len() < 3 {
        return SlopeFit {
            status: FitStatus::Insufficient,
            fit: None,
        };
    }
    let scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    if scale <= EXACT_TOL {
        return SlopeFit {
            status: FitStatus::Degenerate,
            fit: None,
        };
    }
    match order_of_convergence(&pts) {
        Ok(f) => SlopeFit {
            status: FitStatus::Ok,
            fit: Some(f),
        },
        Err(_) => SlopeFit {
            status: FitStatus::Degenerate,
            fit: None,
        },
    }
}

impl SweepManifest {
    fn assemble(spec: &CampaignSpec, mut records: Vec<SweepRecord>) -> Self {
        records.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        let force_slope = slope_of(&records, |r| r.force_norm);
        let remainder_slope = slope_of(&records, |r| r.remainder_sup_h_half);
        let sups: Vec<f64> = records
            .iter()
            .filter(|r| r.status == RecordStatus::Ok)
            .filter_map(|r| r.remainder_sup_h_half)
            .collect();
        let remainder_ratios = sups
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect();
        SweepManifest {
            config_hash: spec.hash(),
            spec: spec.clone(),
            records,
            force_slope,
            remainder_slope,
            remainder_ratios,
        }
    }

    pub fn record(&self, eps: f64) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.eps == eps)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn persist(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(MANIFEST);
        write_json(&path, self)?;
        Ok(path)
    }
}

pub const MANIFEST: &str = "manifest.json";

/// Records `N(u_app)` at every new time the remainder solve asks for.
struct Recording<S> {
    inner: S,
    eps: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl<S: SliceSource<f64>> SliceSource<f64> for Recording<S> {
    fn slice_state(&mut self, t: f64) -> Result<SliceStackState<f64>> {
        let s = self.inner.slice_state(t)?;
        if self.times.last().is_none_or(|&last| t > last) {
            self.times.push(t);
            self.values.push(n_app(&s, self.eps)?);
        }
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
struct RemainderRow {
    t: f64,
    h_half: f64,
    grad_h_half_int: f64,
    force_h_minus_half: f64,
    force_sq_int: f64,
}

/// File stem for per-`ε` outputs.
pub fn eps_tag(eps: f64) -> String {
    format!("eps_{eps}")
}

/// Runs the remainder solve for one `ε`.
pub fn sweep_entry(spec: &CampaignSpec, eps: f64) -> Result<(SweepRecord, RemainderRun<f64>)> {
    let start = Instant::now();
    let grid = Grid::<f64>::new(spec.grid.spec())?;
    let eps25 = spec.sweep.eps_25d.unwrap_or(eps);
    let ic = make_initial_data(&spec.ic, &grid, eps25, spec.seed)?;
    let u0 = u0_functional(&ic.velocity()?, eps)?;

    let mut run = RunOptions::new(spec.time.t_end, spec.time.dt);
    run.sample_every = spec.time.sample_every;
    run.store_states = false;
    let (_, dt) = run.steps()?;
    let sub = match spec.sweep.background {
        crate::ns3d::BackgroundMode::Stages => 0.5 * dt,
        crate::ns3d::BackgroundMode::Frozen => dt,
    };
    let mut source = Recording {
        inner: MarchingSource::new(ic, sub)?,
        eps,
        times: Vec::new(),
        values: Vec::new(),
    };
    let opts = RemainderOptions {
        run,
        mode: spec.sweep.background,
    };
    let rr = run_remainder(&mut source, eps, &opts)?;
    let n_int = running_integral(&source.times, &source.values).last().copied().unwrap_or(0.0);
    let sup = rr.sup_h_half();
    let record = SweepRecord {
        eps,
        status: RecordStatus::Ok,
        error: None,
        force_norm: Some(rr.force_norm()),
        remainder_sup_h_half: Some(sup),
        remainder_grad_int: Some(rr.grad_h_half_int()),
        n_u_app: Some(n_int),
        u0: Some(u0),
        exact: Some(sup <= EXACT_TOL),
        runtime_s: start.elapsed().as_secs_f64(),
        config_hash: spec.hash(),
    };
    Ok((record, rr))
}

pub(crate) fn persist_entry(dir: &Path, spec: &CampaignSpec, rr: &RemainderRun<f64>) -> Result<()> {
    let tag = eps_tag(rr.eps);
    let rows: Vec<RemainderRow> = rr
        .samples
        .iter()
        .map(|s| RemainderRow {
            t: s.t,
            h_half: s.h_half,
            grad_h_half_int: s.grad_h_half_int,
            force_h_minus_half: s.force_h_minus_half,
            force_sq_int: s.force_sq_int,
        })
        .collect();
    write_csv(dir.join(format!("remainder_{tag}.csv")), &rows)?;
    if let Some(r) = &rr.final_state {
        write_fld(
            dir.join(format!("remainder_{tag}.fld")),
            &r.u,
            crate::real::to_f64(r.t),
            rr.eps,
            Some(&spec.hash()),
        )?;
    }
    Ok(())
}

fn failed(spec: &CampaignSpec, eps: f64, e: &Error, runtime_s: f64) -> SweepRecord {
    SweepRecord {
        eps,
        status: RecordStatus::Failed,
        error: Some(e.to_string()),
        force_norm: None,
        remainder_sup_h_half: None,
        remainder_grad_int: None,
        n_u_app: None,
        u0: None,
        exact: None,
        runtime_s,
        config_hash: spec.hash(),
    }
}

/// Result of [`run_sweep`]: the manifest and the `ε` values computed in this
/// call (the others were taken from a previous manifest).
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub manifest: SweepManifest,
    pub computed: Vec<f64>,
}

/// Runs every `ε` of the spec, one worker per `ε`. With `dir`, per-`ε` CSV
/// and `.fld` files are written, the manifest is rewritten after each entry
/// and a previous manifest with the same config hash is resumed: successful
/// entries are kept and only missing or failed ones are computed.
pub fn run_sweep(spec: &CampaignSpec, dir: Option<&Path>) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut kept = Vec::new();
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(MANIFEST);
        if path.exists() {
            let old = SweepManifest::load(&path)?;
            let found = spec.hash();
            if old.config_hash != found {
                return Err(Error::HashMismatch {
                    expected: old.config_hash,
                    found,
                });
            }
            kept = old
                .records
                .into_iter()
                .filter(|r| r.status == RecordStatus::Ok && spec.sweep.eps.contains(&r.eps))
                .collect();
            info!("resuming sweep: {} of {} entries present", kept.len(), spec.sweep.eps.len());
        }
    }
    let todo: Vec<f64> = spec
        .sweep
        .eps
        .iter()
        .copied()
        .filter(|e| !kept.iter().any(|r| r.eps == *e))
        .collect();

    let records = Mutex::new(kept);
    with_workers(todo.len(), || {
        todo.par_iter().for_each(|&eps| {
            let start = Instant::now();
            let rec = match sweep_entry(spec, eps) {
                Ok((rec, rr)) => match dir.map(|d| persist_entry(d, spec, &rr)) {
                    Some(Err(e)) => failed(spec, eps, &e, start.elapsed().as_secs_f64()),
                    _ => rec,
                },
                Err(e) => {
                    warn!("eps = {eps}: {e}");
                    failed(spec, eps, &e, start.elapsed().as_secs_f64())
                }
            };
            let mut all = records.lock().expect("sweep records lock");
            all.push(rec);
            if let Some(dir) = dir {
                let partial = SweepManifest::assemble(spec, all.clone());
                if let Err(e) = partial.persist(dir) {
                    warn!("could not write partial manifest: {e}");
                }
            }
        })
    });
    let manifest = SweepManifest::assemble(spec, records.into_inner().expect("sweep records lock"));
    if let Some(dir) = dir {
        manifest.persist(dir)?;
    }
    Ok(SweepOutcome {
        manifest,
        computed: todo,
    })
}
