//! Single-run experiments: 2.5-D decay runs with checkpoints, 3-D runs,
//! single-`ε` remainder solves, data functionals and the inequality
//! monitors.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use super::config::CampaignSpec;
use super::ic::make_initial_data;
use super::sweep::{eps_tag, sweep_entry, SweepRecord, MANIFEST};
use crate::diagnostics::{
    data_summary, fit_decay, lowfreq_check, norm_row, running_integral, wiegner_check, write_csv,
    write_json, AuxParams, DataSummary, DecayFit, LowFreqReport, NormRow, Schedule, WiegnerReport,
};
use crate::error::{Error, Result};
use crate::ns25d::{energy_ledger, run_with, RunOptions, SliceStackState};
use crate::ns3d::{lift_initial_data, run3d};
use crate::spectral::fld::{read_fld, write_fld};
use crate::spectral::{Grid, ScalarField, Space, VectorField};

pub const CHECKPOINT: &str = "checkpoint.fld";
pub const NORMS_CSV: &str = "norms.csv";

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Initial 2.5-D state of a spec with lift parameter `eps`.
pub fn initial_state(spec: &CampaignSpec, eps: f64) -> Result<SliceStackState<f64>> {
    let grid = Grid::<f64>::new(spec.grid.spec())?;
    make_initial_data(&spec.ic, &grid, eps, spec.seed)
}

fn aux_params(spec: &CampaignSpec) -> AuxParams {
    let m = &spec.monitor;
    let mut p = AuxParams::new(m.delta, spec.eps);
    p.c = m.c_generic;
    p.c_delta = m.c_delta;
    p.t_grid = m.t_grid.clone();
    p
}

/// Writes the vorticity of `state` as a one-component `.fld` in horizontal
/// spectral space, so a resumed run starts from the exact bits.
pub fn write_checkpoint(path: &Path, state: &SliceStackState<f64>, hash: &str) -> Result<()> {
    let omega = state.omega.to_space(Space::HSpectral);
    let tmp = path.with_extension("fld.tmp");
    write_fld(&tmp, &VectorField::new(vec![omega])?, state.t, state.eps, Some(hash))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Reads a checkpoint written by [`write_checkpoint`]; the stored config hash
/// must equal `hash`.
pub fn read_checkpoint(path: &Path, hash: &str) -> Result<SliceStackState<f64>> {
    let (header, field) = read_fld::<f64>(path)?;
    match &header.config_hash {
        Some(h) if h == hash => {}
        other => {
            return Err(Error::HashMismatch {
                expected: other.clone().unwrap_or_default(),
                found: hash.to_string(),
            })
        }
    }
    if header.components != 1 {
        return Err(Error::Format(format!(
            "{}: expected a 1-component vorticity checkpoint, found {}",
            path.display(),
            header.components
        )));
    }
    let omega: ScalarField<f64> = field.into_components().remove(0);
    SliceStackState::new(omega, header.eps, header.t)
}

fn read_rows(path: &Path, up_to: f64) -> Result<Vec<NormRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let tol = 1e-9 * up_to.abs().max(1.0);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: NormRow = row?;
        if row.t <= up_to + tol {
            rows.push(row);
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayManifest {
    pub experiment: String,
    pub config_hash: String,
    pub spec: CampaignSpec,
    pub eps: f64,
    pub samples: usize,
    /// Time of the checkpoint the run was resumed from.
    pub resumed_from: Option<f64>,
    pub fit_window: [f64; 2],
    /// Power-law fit of `‖u^h‖²_{L∞_v L²_h}` over the window.
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    pub initial: Option<DataSummary>,
    pub final_row: Option<NormRow>,
    pub runtime_s: f64,
}

#[derive(Clone, Debug)]
pub struct DecayOutcome {
    pub manifest: DecayManifest,
    pub rows: Vec<NormRow>,
    pub final_state: SliceStackState<f64>,
}

/// Runs the 2.5-D system from the spec's initial data at `spec.eps`,
/// recording a [`NormRow`] per sample. With `dir`, writes `norms.csv`,
/// `final.fld` and `manifest.json`, checkpoints every
/// `time.checkpoint_every` samples, and resumes from an existing checkpoint
/// with the same config hash.
pub fn run_decay(spec: &CampaignSpec, dir: Option<&Path>) -> Result<DecayOutcome> {
    spec.validate()?;
    let start = Instant::now();
    let hash = spec.hash();
    let ic = initial_state(spec, spec.eps)?;
    let initial = data_summary(&ic, &aux_params(spec)).ok();

    let mut rows = Vec::new();
    let mut from = ic;
    let mut resumed_from = None;
    if let Some(dir) = dir {
        ensure_dir(dir)?;
        let ck = dir.join(CHECKPOINT);
        if ck.exists() {
            from = read_checkpoint(&ck, &hash)?;
            rows = read_rows(&dir.join(NORMS_CSV), from.t)?;
            info!("resuming from t = {}", from.t);
            resumed_from = Some(from.t);
        }
    }

    let remaining = spec.time.t_end - from.t;
    let mut opts = RunOptions::new(remaining, spec.time.dt);
    opts.sample_every = spec.time.sample_every;
    opts.store_states = false;
    opts.track_energy = true;
    let mut final_state = from.clone();
    if remaining > 1e-9 * spec.time.t_end {
        let mut new_rows: Vec<NormRow> = Vec::new();
        let mut since = 0usize;
        let traj = run_with(&from, &opts, |s, st| {
            // the first sample repeats the checkpoint on resume
            if !(resumed_from.is_some() && s.step == 0) {
                new_rows.push(norm_row(st, spec.eps)?);
            }
            final_state = st.clone();
            since += 1;
            if let Some(dir) = dir {
                let every = spec.time.checkpoint_every;
                if every > 0 && since % every == 0 && s.step > 0 {
                    let mut all = rows.clone();
                    all.extend_from_slice(&new_rows);
                    write_csv(dir.join(NORMS_CSV), &all)?;
                    write_checkpoint(&dir.join(CHECKPOINT), st, &hash)?;
                }
            }
            Ok(())
        })?;
        // residuals of the energy identity since the run (segment) began
        let ledger = energy_ledger(&traj);
        for r in &mut new_rows {
            r.energy_residual = ledger
                .rows
                .iter()
                .find(|e| (e.t - r.t).abs() <= 1e-9 * r.t.abs().max(1.0))
                .map(|e| e.residual);
        }
        rows.extend(new_rows);
    }
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let n: Vec<f64> = rows.iter().map(|r| r.n).collect();
    for (r, acc) in rows.iter_mut().zip(running_integral(&times, &n)) {
        r.n_v = acc;
    }

    let (a, b) = spec.fit_window();
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.linf_v_l2_h * r.linf_v_l2_h)).collect();
    let (fit, fit_error) = match fit_decay(&series, (a, b)) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let manifest = DecayManifest {
        experiment: "decay25d".into(),
        config_hash: hash.clone(),
        spec: spec.clone(),
        eps: spec.eps,
        samples: rows.len(),
        resumed_from,
        fit_window: [a, b],
        fit,
        fit_error,
        initial,
        final_row: rows.last().copied(),
        runtime_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = dir {
        write_csv(dir.join(NORMS_CSV), &rows)?;
        write_checkpoint(&dir.join("final.fld"), &final_state, &hash)?;
        write_json(dir.join(MANIFEST), &manifest)?;
    }
    Ok(DecayOutcome {
        manifest,
        rows,
        final_state,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Row3D {
    pub t: f64,
    pub energy: f64,
    pub h_half: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Run3dManifest {
    pub experiment: String,
    pub config_hash: String,
    pub spec: CampaignSpec,
    pub eps: f64,
    pub grid: crate::spectral::GridSpec,
    pub samples: usize,
    pub final_energy: f64,
    pub final_h_half: f64,
    pub runtime_s: f64,
}

/// Full 3-D run from the lift `u_{0,ε}` of the spec's initial data at
/// `spec.eps`. With `dir`, writes `run3d.csv`, `final3d.fld` and the manifest.
pub fn run_full3d(spec: &CampaignSpec, dir: Option<&Path>) -> Result<(Run3dManifest, Vec<Row3D>)> {
    spec.validate()?;
    let start = Instant::now();
    let ic = initial_state(spec, spec.eps)?;
    let u0 = lift_initial_data(&ic, spec.eps)?;
    let mut opts = RunOptions::new(spec.time.t_end, spec.time.dt);
    opts.sample_every = spec.time.sample_every;
    opts.store_states = false;
    let traj = run3d(&u0, &opts)?;
    let rows: Vec<Row3D> = traj
        .samples
        .iter()
        .map(|s| Row3D {
            t: s.t,
            energy: s.energy,
            h_half: s.h_half,
        })
        .collect();
    let fin = rows.last().copied().expect("at least the initial sample");
    let manifest = Run3dManifest {
        experiment: "run3d".into(),
        config_hash: spec.hash(),
        spec: spec.clone(),
        eps: spec.eps,
        grid: u0.grid().spec(),
        samples: rows.len(),
        final_energy: fin.energy,
        final_h_half: fin.h_half,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = dir {
        ensure_dir(dir)?;
        write_csv(dir.join("run3d.csv"), &rows)?;
        if let Some(last) = &traj.final_state {
            write_fld(dir.join("final3d.fld"), &last.u, last.t, spec.eps, Some(&manifest.config_hash))?;
        }
        write_json(dir.join(MANIFEST), &manifest)?;
    }
    Ok((manifest, rows))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RemainderManifest {
    pub experiment: String,
    pub config_hash: String,
    pub spec: CampaignSpec,
    pub record: SweepRecord,
}

/// One remainder solve at `spec.eps`. With `dir`, writes the remainder CSV,
/// the final remainder `.fld` and the manifest.
pub fn run_single_remainder(spec: &CampaignSpec, dir: Option<&Path>) -> Result<RemainderManifest> {
    spec.validate()?;
    let (record, rr) = sweep_entry(spec, spec.eps)?;
    let manifest = RemainderManifest {
        experiment: "remainder".into(),
        config_hash: spec.hash(),
        spec: spec.clone(),
        record,
    };
    if let Some(dir) = dir {
        ensure_dir(dir)?;
        super::sweep::persist_entry(dir, spec, &rr)?;
        write_json(dir.join(MANIFEST), &manifest)?;
    }
    Ok(manifest)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DataManifest {
    pub experiment: String,
    pub config_hash: String,
    pub spec: CampaignSpec,
    pub eps: f64,
    pub params: AuxParams,
    pub summary: DataSummary,
    pub initial_row: NormRow,
}

/// Norms and functionals of the spec's initial data.
pub fn data_norms(spec: &CampaignSpec, dir: Option<&Path>) -> Result<DataManifest> {
    spec.validate()?;
    let ic = initial_state(spec, spec.eps)?;
    let params = aux_params(spec);
    let manifest = DataManifest {
        experiment: "norms".into(),
        config_hash: spec.hash(),
        spec: spec.clone(),
        eps: spec.eps,
        summary: data_summary(&ic, &params)?,
        params,
        initial_row: norm_row(&ic, spec.eps)?,
    };
    if let Some(dir) = dir {
        ensure_dir(dir)?;
        write_json(dir.join(MANIFEST), &manifest)?;
    }
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub schedule: Schedule,
    pub field: String,
    /// `None` when no finite constant works.
    pub smallest_c: Option<f64>,
    pub violations: usize,
    pub hypothesis_excess: Option<f64>,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowFreqSummary {
    pub schedule: Schedule,
    pub smallest_c_u: Option<f64>,
    pub smallest_c_w: Option<f64>,
    pub violations: usize,
    pub file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WiegnerManifest {
    pub experiment: String,
    pub config_hash: String,
    pub spec: CampaignSpec,
    pub eps: f64,
    pub monitors: Vec<MonitorSummary>,
    pub lowfreq: Vec<LowFreqSummary>,
    pub runtime_s: f64,
}

impl WiegnerManifest {
    /// Largest finite smallest-`C` over all monitors (`None` if any is
    /// infinite).
    pub fn worst_c(&self) -> Option<f64> {
        self.monitors
            .iter()
            .map(|m| m.smallest_c)
            .try_fold(0.0f64, |acc, c| c.map(|c| acc.max(c)))
    }

    pub fn worst_hypothesis_excess(&self) -> f64 {
        self.monitors
            .iter()
            .filter_map(|m| m.hypothesis_excess)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct WiegnerOutcome {
    pub manifest: WiegnerManifest,
    pub reports: Vec<WiegnerReport>,
    pub lowfreq: Vec<LowFreqReport>,
}

fn finite(c: f64) -> Option<f64> {
    c.is_finite().then_some(c)
}

/// Runs the 2.5-D system at `spec.eps` and evaluates the Wiegner and
/// low-frequency monitors for every configured schedule and field.
pub fn run_wiegner(spec: &CampaignSpec, dir: Option<&Path>) -> Result<WiegnerOutcome> {
    spec.validate()?;
    let start = Instant::now();
    let ic = initial_state(spec, spec.eps)?;
    let mut opts = RunOptions::new(spec.time.t_end, spec.time.dt);
    opts.sample_every = spec.time.sample_every;
    opts.track_energy = true;
    let traj = run_with(&ic, &opts, |_, _| Ok(()))?;
    let m = &spec.monitor;

    let mut reports = Vec::new();
    let mut monitors = Vec::new();
    let mut lowfreq = Vec::new();
    let mut lowfreq_sum = Vec::new();
    let mut files: Vec<(PathBuf, Box<dyn Fn(&Path) -> Result<()>>)> = Vec::new();
    for &kind in &m.schedules {
        let schedule = Schedule::new(kind, m.t_scale, m.delta)?;
        for &field in &m.fields {
            let rep = wiegner_check(&traj, field, &schedule, m.c)?;
            let file = format!("wiegner_{kind}_{}.csv", field_name(field));
            monitors.push(MonitorSummary {
                schedule,
                field: field_name(field).into(),
                smallest_c: finite(rep.smallest_c),
                violations: rep.violations,
                hypothesis_excess: rep.hypothesis_excess,
                file: file.clone(),
            });
            let rows = rep.rows.clone();
            files.push((file.into(), Box::new(move |p| write_csv(p, &rows))));
            reports.push(rep);
        }
        let lf = lowfreq_check(&traj, &schedule, m.c)?;
        let file = format!("lowfreq_{kind}.csv");
        lowfreq_sum.push(LowFreqSummary {
            schedule,
            smallest_c_u: finite(lf.smallest_c_u),
            smallest_c_w: finite(lf.smallest_c_w),
            violations: lf.violations,
            file: file.clone(),
        });
        let rows = lf.rows.clone();
        files.push((file.into(), Box::new(move |p| write_csv(p, &rows))));
        lowfreq.push(lf);
    }
    let manifest = WiegnerManifest {
        experiment: "wiegner_monitor".into(),
        config_hash: spec.hash(),
        spec: spec.clone(),
        eps: spec.eps,
        monitors,
        lowfreq: lowfreq_sum,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = dir {
        ensure_dir(dir)?;
        for (name, write) in &files {
            write(&dir.join(name))?;
        }
        write_json(dir.join(MANIFEST), &manifest)?;
    }
    Ok(WiegnerOutcome {
        manifest,
        reports,
        lowfreq,
    })
}

fn field_name(f: crate::diagnostics::MonitorField) -> &'static str {
    match f {
        crate::diagnostics::MonitorField::Velocity => "velocity",
        crate::diagnostics::MonitorField::Vorticity => "vorticity",
    }
}

/// Tag used in per-`ε` file names.
pub fn remainder_csv(eps: f64) -> String {
    format!("remainder_{}.csv", eps_tag(eps))
}
