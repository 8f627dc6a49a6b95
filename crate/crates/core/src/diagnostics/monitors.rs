//! Monitors for the weighted slice-energy inequality and the low-frequency
//! bounds, evaluated along stored 2.5-D trajectories.

use serde::{Deserialize, Serialize};

use super::functionals::running_integral;
use super::norms::{SliceSpectrum, VNorm};
use super::schedule::{Schedule, ScheduleKind};
use crate::error::{Error, Result};
use crate::ns25d::{SliceLedger, SliceStackState, Trajectory};
use crate::real::{to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonitorField {
    Velocity,
    Vorticity,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WiegnerRow {
    pub t: f64,
    pub g: f64,
    /// `exp(2∫₀ᵗ g²)`.
    pub weight: f64,
    /// `‖U(t)‖²_{L^∞_v(L²_h)}`.
    pub norm_sq: f64,
    /// `‖U_{♭,g}(t)‖²_{L^∞_v(L²_h)}`.
    pub low_sq: f64,
    /// `∫₀ᵗ ‖U_{♭,g}‖² g² exp(2∫g²)`.
    pub integral: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `sup_{t'≤t}(e + t'/T)^{1+δ/2}‖ω(t')‖²`, vorticity with the
    /// polynomial schedule only.
    pub omega_delta: Option<f64>,
    pub violated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WiegnerReport {
    pub schedule: Schedule,
    pub field: Option<MonitorField>,
    /// Constant used for `rhs`.
    pub c: f64,
    pub rows: Vec<WiegnerRow>,
    /// Smallest `C` for which every sample satisfies the inequality
    /// (`inf` if some sample cannot be satisfied by any `C`).
    pub smallest_c: f64,
    pub violations: usize,
    /// Largest positive part of the integrated per-slice hypothesis
    /// `½(e(t)−e(0)) − ∫½ε²∂_z²e + ∫‖∇_hU‖²`, relative to the largest initial
    /// `½e`. `None` when the trajectory carries no ledgers.
    pub hypothesis_excess: Option<f64>,
}

fn states<T: Real>(traj: &Trajectory<T>) -> Result<Vec<(f64, &SliceStackState<T>)>> {
    traj.samples()
        .iter()
        .map(|s| {
            s.state
                .as_ref()
                .map(|st| (to_f64(s.t), st))
                .ok_or(Error::NotSampled { t: to_f64(s.t) })
        })
        .collect()
}

fn spectrum<T: Real>(state: &SliceStackState<T>, field: MonitorField) -> Result<SliceSpectrum> {
    Ok(match field {
        MonitorField::Velocity => SliceSpectrum::of_field(&state.velocity()?),
        MonitorField::Vorticity => SliceSpectrum::of_scalar(&state.omega),
    })
}

/// Inequality check along a trajectory with stored states. Time in the
/// schedule is measured from the first sample.
pub fn wiegner_check<T: Real>(
    traj: &Trajectory<T>,
    field: MonitorField,
    schedule: &Schedule,
    c: f64,
) -> Result<WiegnerReport> {
    let st = states(traj)?;
    let times: Vec<f64> = st.iter().map(|s| s.0).collect();
    let spectra = st
        .iter()
        .map(|(_, s)| spectrum(s, field))
        .collect::<Result<Vec<_>>>()?;
    let mut report = wiegner_series(&times, &spectra, schedule, c)?;
    report.field = Some(field);
    if field == MonitorField::Vorticity && schedule.kind == ScheduleKind::PolyDelta {
        let mut sup = 0.0f64;
        let t0 = times[0];
        for r in &mut report.rows {
            let s = std::f64::consts::E + (r.t - t0) / schedule.t_scale;
            sup = sup.max(s.powf(1.0 + 0.5 * schedule.delta) * r.norm_sq);
            r.omega_delta = Some(sup);
        }
    }
    let ledgers: Option<Vec<&SliceLedger<T>>> = traj.samples().iter().map(|s| s.ledger.as_ref()).collect();
    report.hypothesis_excess = ledgers.map(|l| hypothesis_excess(&l, field));
    Ok(report)
}

fn hypothesis_excess<T: Real>(ledgers: &[&SliceLedger<T>], field: MonitorField) -> f64 {
    let pick = |l: &SliceLedger<T>| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let f = |v: &[T]| v.iter().map(|&x| to_f64(x)).collect::<Vec<f64>>();
        match field {
            MonitorField::Velocity => (f(&l.u2), f(&l.grad_u), f(&l.flux_u)),
            MonitorField::Vorticity => (f(&l.w2), f(&l.grad_w), f(&l.flux_w)),
        }
    };
    let Some(first) = ledgers.first() else { return 0.0 };
    let (e0, _, _) = pick(first);
    let scale = 0.5 * e0.iter().copied().fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for l in ledgers {
        let (e, g, f) = pick(l);
        for k in 0..e.len() {
            worst = worst.max(0.5 * (e[k] - e0[k]) + g[k] - f[k]);
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Inequality check on precomputed spectra of `U` at `times`.
pub fn wiegner_series(
    times: &[f64],
    spectra: &[SliceSpectrum],
    schedule: &Schedule,
    c: f64,
) -> Result<WiegnerReport> {
    if times.is_empty() || times.len() != spectra.len() {
        return Err(Error::Shape(format!(
            "{} times for {} spectra",
            times.len(),
            spectra.len()
        )));
    }
    let t0 = times[0];
    let mut pre = Vec::with_capacity(times.len());
    for (&t, sp) in times.iter().zip(spectra) {
        let (g, weight) = schedule.eval(t - t0)?;
        let norm_sq = sp.reduce_sq(&sp.weighted(|_| 1.0), VNorm::LInf);
        let low_sq = sp.reduce_sq(&sp.lowpass(g), VNorm::LInf);
        pre.push((t, g, weight, norm_sq, low_sq));
    }
    let integrand: Vec<f64> = pre.iter().map(|p| p.4 * p.1 * p.1 * p.2).collect();
    let integral = running_integral(times, &integrand);
    let u0 = pre[0].3;
    let tol = 1e-12 * pre.iter().map(|p| p.3 * p.2).fold(0.0, f64::max);

    let mut rows = Vec::with_capacity(pre.len());
    let mut smallest = 0.0f64;
    let mut violations = 0;
    for (p, &i) in pre.iter().zip(&integral) {
        let lhs = p.3 * p.2;
        let rhs = u0 + c * i;
        let excess = lhs - u0;
        if excess > tol {
            smallest = smallest.max(if i > 0.0 { excess / i } else { f64::INFINITY });
        }
        let violated = lhs > rhs + tol;
        violations += violated as usize;
        rows.push(WiegnerRow {
            t: p.0,
            g: p.1,
            weight: p.2,
            norm_sq: p.3,
            low_sq: p.4,
            integral: i,
            lhs,
            rhs,
            omega_delta: None,
            violated,
        });
    }
    Ok(WiegnerReport {
        schedule: *schedule,
        field: None,
        c,
        rows,
        smallest_c: smallest,
        violations,
        hypothesis_excess: None,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LowFreqRow {
    pub t: f64,
    pub g: f64,
    /// `‖u_{♭,g}(t)‖_{L^∞_v(L²_h)}`.
    pub u_low: f64,
    /// `‖e^{tΔ_h}u₀‖_{L^∞_v(L²_h)}`.
    pub u_heat: f64,
    /// `∫₀ᵗ ‖u‖²_{L^∞_v(L²_h)}`.
    pub u_int: f64,
    pub u_rhs: f64,
    /// `‖ω_{♭,g}(t)‖_{L^∞_v(L²_h)}`.
    pub w_low: f64,
    /// `g(t)‖e^{tΔ_h}u₀‖_{L^∞_v(L²_h)}`.
    pub w_heat: f64,
    /// `∫₀ᵗ ‖u‖‖ω‖` in `L^∞_v(L²_h)`.
    pub w_int: f64,
    pub w_rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowFreqReport {
    pub schedule: Schedule,
    pub c: f64,
    pub rows: Vec<LowFreqRow>,
    pub smallest_c_u: f64,
    pub smallest_c_w: f64,
    pub violations: usize,
}

/// Both low-frequency bounds per sample. Time is measured from the first
/// sample, whose state plays the role of `u₀`.
pub fn lowfreq_check<T: Real>(traj: &Trajectory<T>, schedule: &Schedule, c: f64) -> Result<LowFreqReport> {
    let st = states(traj)?;
    let times: Vec<f64> = st.iter().map(|s| s.0).collect();
    let t0 = times[0];
    let mut u_sp = Vec::with_capacity(st.len());
    let mut w_sp = Vec::with_capacity(st.len());
    for (_, s) in &st {
        u_sp.push(spectrum(s, MonitorField::Velocity)?);
        w_sp.push(spectrum(s, MonitorField::Vorticity)?);
    }
    let linf = |sp: &SliceSpectrum| sp.reduce_sq(&sp.weighted(|_| 1.0), VNorm::LInf).sqrt();
    let u_n: Vec<f64> = u_sp.iter().map(linf).collect();
    let w_n: Vec<f64> = w_sp.iter().map(linf).collect();
    let u_int = running_integral(&times, &u_n.iter().map(|x| x * x).collect::<Vec<_>>());
    let w_int = running_integral(&times, &u_n.iter().zip(&w_n).map(|(a, b)| a * b).collect::<Vec<_>>());

    let scale_u = u_n.iter().copied().fold(0.0, f64::max);
    let scale_w = w_n.iter().copied().fold(0.0, f64::max);
    let mut rows = Vec::with_capacity(st.len());
    let (mut cu, mut cw, mut violations) = (0.0f64, 0.0f64, 0usize);
    let need = |excess: f64, denom: f64, tol: f64| -> f64 {
        if excess <= tol {
            0.0
        } else if denom > 0.0 {
            excess / denom
        } else {
            f64::INFINITY
        }
    };
    for i in 0..st.len() {
        let tau = times[i] - t0;
        let (g, _) = schedule.eval(tau)?;
        let heat = u_sp[0]
            .reduce_sq(&u_sp[0].weighted(|k| (-2.0 * tau * k).exp()), VNorm::LInf)
            .sqrt();
        let u_low = u_sp[i].reduce_sq(&u_sp[i].lowpass(g), VNorm::LInf).sqrt();
        let w_low = w_sp[i].reduce_sq(&w_sp[i].lowpass(g), VNorm::LInf).sqrt();
        let g2 = g * g;
        let row = LowFreqRow {
            t: times[i],
            g,
            u_low,
            u_heat: heat,
            u_int: u_int[i],
            u_rhs: heat + c * g2 * u_int[i],
            w_low,
            w_heat: g * heat,
            w_int: w_int[i],
            w_rhs: g * heat + c * g2 * w_int[i],
        };
        let (tu, tw) = (1e-12 * scale_u, 1e-12 * scale_w);
        cu = cu.max(need(u_low - heat, g2 * u_int[i], tu));
        cw = cw.max(need(w_low - g * heat, g2 * w_int[i], tw));
        violations += (row.u_low > row.u_rhs + tu) as usize + (row.w_low > row.w_rhs + tw) as usize;
        rows.push(row);
    }
    Ok(LowFreqReport {
        schedule: *schedule,
        c,
        rows,
        smallest_c_u: cu,
        smallest_c_w: cw,
        violations,
    })
}
