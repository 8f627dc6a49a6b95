//! Per-sample norm tables and their CSV/JSON serialisation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::besov::besov_minus1_inf;
use super::functionals::{aux_constants, n_app, running_integral, AuxConstants, AuxParams, DataNorms};
use super::norms::{SliceSpectrum, VNorm};
use crate::error::{Error, Result};
use crate::ns25d::{energy_ledger, SliceStackState, Trajectory};
use crate::real::{to_f64, Real};

/// One CSV row; the field order is the column order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub t: f64,
    pub l2_global: f64,
    pub linf_v_l2_h: f64,
    pub l2_v_l2_h: f64,
    pub gradh_linf_v_l2_h: f64,
    pub omega_linf_v_l2_h: f64,
    pub omega_l2_v_l2_h: f64,
    pub linf_3d: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "N_v")]
    pub n_v: f64,
    pub energy_residual: Option<f64>,
}

pub const NORM_COLUMNS: [&str; 11] = [
    "t",
    "l2_global",
    "linf_v_l2_h",
    "l2_v_l2_h",
    "gradh_linf_v_l2_h",
    "omega_linf_v_l2_h",
    "omega_l2_v_l2_h",
    "linf_3d",
    "N",
    "N_v",
    "energy_residual",
];

/// Norms of one 2.5-D state; `n` is `N(u_app)` for lift parameter `eps`.
pub fn norm_row<T: Real>(state: &SliceStackState<T>, eps: f64) -> Result<NormRow> {
    let u = state.velocity()?;
    let us = SliceSpectrum::of_field(&u);
    let ws = SliceSpectrum::of_scalar(&state.omega);
    Ok(NormRow {
        t: to_f64(state.t),
        l2_global: to_f64(u.l2_norm()),
        linf_v_l2_h: us.mixed_sq(VNorm::LInf, 0.0).sqrt(),
        l2_v_l2_h: us.mixed_sq(VNorm::L2, 0.0).sqrt(),
        gradh_linf_v_l2_h: us.mixed_sq(VNorm::LInf, 1.0).sqrt(),
        omega_linf_v_l2_h: ws.mixed_sq(VNorm::LInf, 0.0).sqrt(),
        omega_l2_v_l2_h: ws.mixed_sq(VNorm::L2, 0.0).sqrt(),
        linf_3d: to_f64(u.linf_norm()),
        n: n_app(state, eps)?,
        n_v: 0.0,
        energy_residual: None,
    })
}

/// Initial-data functionals reported alongside a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub delta: f64,
    pub besov_minus_delta: f64,
    pub besov_minus1_inf: f64,
    pub a_delta: Option<f64>,
    pub aux: Option<AuxConstants>,
}

pub fn data_summary<T: Real>(u0: &SliceStackState<T>, p: &AuxParams) -> Result<DataSummary> {
    let u = u0.velocity()?;
    let norms = DataNorms::of(&u, p.delta, &p.t_grid)?;
    Ok(DataSummary {
        delta: p.delta,
        besov_minus_delta: norms.besov_sq,
        besov_minus1_inf: besov_minus1_inf(&u, &p.t_grid)?,
        a_delta: norms.a_delta(p.delta, p.c_delta).ok(),
        aux: aux_constants(&u, p).ok(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub eps: f64,
    pub rows: Vec<NormRow>,
    pub initial: Option<DataSummary>,
}

/// One row per stored state, with the running `∫N` and, where the sample
/// carries a ledger, the relative energy residual.
pub fn norm_report<T: Real>(traj: &Trajectory<T>, eps: f64) -> Result<NormReport> {
    let mut rows = Vec::new();
    for s in traj.samples() {
        if let Some(st) = &s.state {
            rows.push(norm_row(st, eps)?);
        }
    }
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let n: Vec<f64> = rows.iter().map(|r| r.n).collect();
    for (r, acc) in rows.iter_mut().zip(running_integral(&times, &n)) {
        r.n_v = acc;
    }
    let ledger = energy_ledger(traj);
    for r in &mut rows {
        r.energy_residual = ledger
            .rows
            .iter()
            .find(|e| (e.t - r.t).abs() <= 1e-9 * r.t.abs().max(1.0))
            .map(|e| e.residual);
    }
    Ok(NormReport {
        eps,
        rows,
        initial: None,
    })
}

impl NormReport {
    pub fn with_initial<T: Real>(mut self, u0: &SliceStackState<T>, p: &AuxParams) -> Result<Self> {
        self.initial = Some(data_summary(u0, p)?);
        Ok(self)
    }

    pub fn series(&self, f: impl Fn(&NormRow) -> f64) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, f(r))).collect()
    }
}

/// Writes serialisable rows as CSV with a header.
pub fn write_csv<R: Serialize>(path: impl AsRef<Path>, rows: &[R]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{other:?}")),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_json<R: Serialize + ?Sized>(path: impl AsRef<Path>, value: &R) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
