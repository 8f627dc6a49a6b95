use serde::Serialize;

use crate::real::{cst, to_f64, Real};

use super::solver::RATES;
use super::state::Trajectory;

/// Per-slice energies at a sample time together with the time integrals of
/// the per-slice rates from the start of the run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SliceLedger<T = f64> {
    /// `‖u^h(t, ·, z)‖²_{L²_h}`.
    pub u2: Vec<T>,
    /// `‖ω(t, ·, z)‖²_{L²_h}`.
    pub w2: Vec<T>,
    /// `∫₀ᵗ ‖∇_h u^h‖²`.
    pub grad_u: Vec<T>,
    /// `∫₀ᵗ ε²‖∂_z u^h‖²`.
    pub vert_u: Vec<T>,
    /// `∫₀ᵗ ½ε²∂_z²‖u^h‖²_{L²_h}`.
    pub flux_u: Vec<T>,
    pub grad_w: Vec<T>,
    pub vert_w: Vec<T>,
    pub flux_w: Vec<T>,
}

impl<T: Real> SliceLedger<T> {
    pub(crate) fn from_parts(u2: Vec<T>, w2: Vec<T>, acc: &[T], nv: usize) -> Self {
        debug_assert_eq!(acc.len(), RATES * nv);
        let block = |i: usize| acc[i * nv..(i + 1) * nv].to_vec();
        SliceLedger {
            u2,
            w2,
            grad_u: block(0),
            vert_u: block(1),
            flux_u: block(2),
            grad_w: block(3),
            vert_w: block(4),
            flux_w: block(5),
        }
    }
}

/// Energy balance at one sample time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    /// `½‖u^h(t)‖²_{L²}`.
    pub energy: f64,
    /// `∫₀ᵗ ‖∇_ε u^h‖²_{L²}`.
    pub dissipation: f64,
    /// `½‖u^h(t)‖² + ∫‖∇_ε u^h‖² − ½‖u₀^h‖²`, relative to `½‖u₀^h‖²`.
    pub residual: f64,
    /// Largest per-slice velocity residual, relative to the largest initial
    /// slice energy.
    pub slice_residual_u: f64,
    /// Same for the vorticity balance.
    pub slice_residual_w: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
}

impl EnergyReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_slice_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.slice_residual_u.abs().max(r.slice_residual_w.abs()))
            .fold(0.0, f64::max)
    }
}

fn relative(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        x
    }
}

/// Global and per-slice energy balances for every sample carrying a ledger.
pub fn energy_ledger<T: Real>(traj: &Trajectory<T>) -> EnergyReport {
    let mut rows = Vec::new();
    let Some(first) = traj.samples().iter().find_map(|s| s.ledger.as_ref()) else {
        return EnergyReport { rows };
    };
    let dz = to_f64(traj.grid.dz());
    let half = cst::<T>(0.5);
    let total = |v: &[T]| v.iter().map(|&x| to_f64(x)).sum::<f64>() * dz;
    let e0 = 0.5 * total(&first.u2);
    let su0 = first.u2.iter().map(|&x| to_f64(x)).fold(0.0, f64::max) * 0.5;
    let sw0 = first.w2.iter().map(|&x| to_f64(x)).fold(0.0, f64::max) * 0.5;

    for s in traj.samples() {
        let Some(l) = &s.ledger else { continue };
        let energy = 0.5 * total(&l.u2);
        let dissipation = total(&l.grad_u) + total(&l.vert_u);
        let slice = |e: &[T], e0: &[T], g: &[T], v: &[T], f: &[T]| {
            (0..e.len())
                .map(|k| to_f64(half * (e[k] - e0[k]) + g[k] + v[k] - f[k]).abs())
                .fold(0.0, f64::max)
        };
        rows.push(EnergyRow {
            t: to_f64(s.t),
            energy,
            dissipation,
            residual: relative(energy + dissipation - e0, e0),
            slice_residual_u: relative(slice(&l.u2, &first.u2, &l.grad_u, &l.vert_u, &l.flux_u), su0),
            slice_residual_w: relative(slice(&l.w2, &first.w2, &l.grad_w, &l.vert_w, &l.flux_w), sw0),
        });
    }
    EnergyReport { rows }
}
