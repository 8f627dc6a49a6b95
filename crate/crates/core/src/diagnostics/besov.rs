//! Heat-flow characterisations of negative-regularity Besov norms, as sups
//! over a finite logarithmic time grid.

use serde::{Deserialize, Serialize};

use super::norms::{SliceSpectrum, VNorm};
use crate::error::{Error, Result};
use crate::real::{cst, to_f64, Real};
use crate::spectral::{heat_semigroup, HeatKind, Space, VectorField};

/// Log-spaced sample times for the Besov sups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            t_min: 1e-3,
            t_max: 1e3,
            points: 201,
        }
    }
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        let g = TimeGrid { t_min, t_max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidArgument("empty time grid".into()));
        }
        if !(self.t_min > 0.0 && self.t_max >= self.t_min && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time grid [{}, {}] is not a positive interval",
                self.t_min, self.t_max
            )));
        }
        if self.points == 1 && self.t_max != self.t_min {
            return Err(Error::InvalidArgument("one-point grid needs t_min = t_max".into()));
        }
        Ok(())
    }

    /// Same bounds with `m` times as many intervals. Every point of `self`
    /// is reproduced bit for bit.
    pub fn refined(&self, m: usize) -> TimeGrid {
        TimeGrid {
            points: (self.points - 1) * m.max(1) + 1,
            ..self.clone()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.log10(), self.t_max.log10());
        if self.points == 1 {
            return vec![self.t_min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| 10f64.powf(a + (b - a) * (i as f64 / last)))
            .collect()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(())
}

/// `t ↦ ‖e^{tΔ_h}v‖²_{L^∞_v(L²_h)}` on the grid times.
pub(crate) fn heat_profile(spec: &SliceSpectrum, times: &[f64]) -> Vec<f64> {
    times
        .iter()
        .map(|&t| spec.reduce_sq(&spec.weighted(|k| (-2.0 * t * k).exp()), VNorm::LInf))
        .collect()
}

/// `sup_t t^δ ‖e^{tΔ_h}u₀‖²_{L^∞_v(L²_h)}` over the grid: the squared
/// `L^∞_v(Ḃ^{-δ}_{2,∞,h})` proxy.
pub fn besov_minus_delta<T: Real>(u0: &VectorField<T>, delta: f64, grid: &TimeGrid) -> Result<f64> {
    besov_of_spectrum(&SliceSpectrum::of_field(u0), delta, grid)
}

pub fn besov_of_spectrum(spec: &SliceSpectrum, delta: f64, grid: &TimeGrid) -> Result<f64> {
    check_delta(delta)?;
    grid.validate()?;
    let times = grid.times();
    Ok(times
        .iter()
        .zip(heat_profile(spec, &times))
        .map(|(t, h)| t.powf(delta) * h)
        .fold(0.0, f64::max))
}

/// `sup_t t^{1/2} ‖e^{tΔ}a‖_{L^∞}` over the grid, with the isotropic heat
/// flow and the pointwise maximum on the grid.
pub fn besov_minus1_inf<T: Real>(a: &VectorField<T>, grid: &TimeGrid) -> Result<f64> {
    grid.validate()?;
    let spectral = a.to_space(Space::Spectral);
    let mut best = 0.0f64;
    for t in grid.times() {
        let comps = spectral
            .components()
            .iter()
            .map(|c| heat_semigroup(c, cst::<T>(t), HeatKind::Full))
            .collect::<Result<Vec<_>>>()?;
        let m = to_f64(VectorField::new(comps)?.linf_norm());
        best = best.max(t.sqrt() * m);
    }
    Ok(best)
}
