//! Scalar functionals of initial data and of the approximate solution.

use serde::{Deserialize, Serialize};

use super::besov::{besov_of_spectrum, TimeGrid};
use super::norms::{multiplier, SliceSpectrum, VNorm};
use crate::error::{Error, Result};
use crate::ns25d::SliceStackState;
use crate::real::{to_f64, Real};
use crate::spectral::{derivative, Axis, ScalarField, VectorField};

fn dz_components<T: Real>(v: &VectorField<T>) -> Result<Vec<ScalarField<T>>> {
    v.components().iter().map(|c| derivative(c, Axis::X3)).collect()
}

/// `N(w) = ‖w‖²_{L^∞} + ‖∇_h w‖²_{L^∞_v(L²_h)} + ‖∂₃w‖²_{L²_v(Ḣ^{1/2}_h)}`.
pub fn n_functional<T: Real>(w: &VectorField<T>) -> Result<f64> {
    let linf = to_f64(w.linf_norm()).powi(2);
    let grad = SliceSpectrum::of_field(w).mixed_sq(VNorm::LInf, 1.0);
    let dz = SliceSpectrum::of_components(&dz_components(w)?).mixed_sq(VNorm::L2, 0.5);
    Ok(linf + grad + dz)
}

/// `N(u_app)` evaluated from the 2.5-D state: the vertical term carries the
/// factor `ε` picked up by the change of variables `z = εx₃`.
pub fn n_app<T: Real>(state: &SliceStackState<T>, eps: f64) -> Result<f64> {
    let u = state.velocity()?;
    let linf = to_f64(u.linf_norm()).powi(2);
    let grad = SliceSpectrum::of_field(&u).mixed_sq(VNorm::LInf, 1.0);
    let dz = SliceSpectrum::of_components(&dz_components(&u)?).mixed_sq(VNorm::L2, 0.5);
    Ok(linf + grad + eps * dz)
}

/// Cumulative trapezoid integral `∫_{t₀}^{t_i} f`.
pub fn running_integral(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(values.len());
    for i in 0..values.len().min(times.len()) {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Norms of horizontal initial data that enter the functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataNorms {
    /// `‖u₀‖²_{L^∞_v(L²_h)}`.
    pub l2_sq: f64,
    /// `‖∇_h u₀‖²_{L^∞_v(L²_h)}`.
    pub grad_sq: f64,
    /// Squared Besov proxy `sup_t t^δ‖e^{tΔ_h}u₀‖²`.
    pub besov_sq: f64,
}

impl DataNorms {
    pub fn of<T: Real>(u0: &VectorField<T>, delta: f64, grid: &TimeGrid) -> Result<Self> {
        let spec = SliceSpectrum::of_field(u0);
        Ok(DataNorms {
            l2_sq: spec.mixed_sq(VNorm::LInf, 0.0),
            grad_sq: spec.mixed_sq(VNorm::LInf, 1.0),
            besov_sq: besov_of_spectrum(&spec, delta, grid)?,
        })
    }

    /// `A_δ = C_δ(G·B^{1/δ}/L^{1/δ} + L)·exp(C_δ L(1 + L))` with `L`, `G`,
    /// `B` the squared norms above.
    pub fn a_delta(&self, delta: f64, c_delta: f64) -> Result<f64> {
        if !(self.l2_sq > 0.0) {
            return Err(Error::ADeltaUndefined);
        }
        let l = self.l2_sq;
        let ratio = (self.besov_sq / l).powf(1.0 / delta);
        Ok(c_delta * (self.grad_sq * ratio + l) * (c_delta * l * (1.0 + l)).exp())
    }

    /// `T_δ = C_δ^{1/δ}(B/L)^{1/δ}`.
    pub fn t_delta(&self, delta: f64, c_delta: f64) -> Result<f64> {
        if !(self.l2_sq > 0.0) {
            return Err(Error::ZeroData("T_delta of zero data".into()));
        }
        Ok((c_delta * self.besov_sq / self.l2_sq).powf(1.0 / delta))
    }
}

pub fn a_delta<T: Real>(u0: &VectorField<T>, delta: f64, c_delta: f64, grid: &TimeGrid) -> Result<f64> {
    if !(c_delta > 0.0) {
        return Err(Error::InvalidArgument(format!("C_delta = {c_delta} must be > 0")));
    }
    DataNorms::of(u0, delta, grid)?.a_delta(delta, c_delta)
}

/// `U₀ = ε‖∂_z u₀‖²_{L²_v(Ḣ^{-1/2}_h)} + (‖u₀‖‖∂_z u₀‖)^{1/2}_{L²_v(Ḣ^{-1/2}_h)}
/// (‖u₀‖‖∂_z u₀‖)^{1/2}_{L²_v(Ḣ^{1/2}_h)}`.
pub fn u0_functional<T: Real>(u0: &VectorField<T>, eps: f64) -> Result<f64> {
    for c in u0.components() {
        c.require_zero_slice_mean("u0_functional")?;
    }
    u0_functional_of(&SliceSpectrum::of_field(u0), u0, eps)
}

fn u0_functional_of<T: Real>(spec: &SliceSpectrum, u0: &VectorField<T>, eps: f64) -> Result<f64> {
    let dz = SliceSpectrum::of_components(&dz_components(u0)?);
    let a = spec.mixed_sq(VNorm::L2, -0.5).sqrt();
    let b = spec.mixed_sq(VNorm::L2, 0.5).sqrt();
    let da = dz.mixed_sq(VNorm::L2, -0.5).sqrt();
    let db = dz.mixed_sq(VNorm::L2, 0.5).sqrt();
    Ok(eps * da * da + (a * da * b * db).sqrt())
}

/// Parameters of [`aux_constants`]. `c` is the generic constant in `C₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxParams {
    pub delta: f64,
    pub eps: f64,
    pub c: f64,
    pub c_delta: f64,
    pub t_grid: TimeGrid,
}

impl AuxParams {
    pub fn new(delta: f64, eps: f64) -> Self {
        AuxParams {
            delta,
            eps,
            c: 1.0,
            c_delta: 1.0,
            t_grid: TimeGrid::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxConstants {
    pub c0: f64,
    pub c1: f64,
    pub u0: f64,
    pub t_delta: f64,
}

/// `C₀`, `C₁`, `U₀` and `T_δ` of horizontal initial data `u0`.
///
/// `C₀` uses `max_z(‖u₀‖_{L²_h} + ‖u₀‖_{Ḣ^{-δ}_h})` for the intersection norm.
pub fn aux_constants<T: Real>(u0: &VectorField<T>, p: &AuxParams) -> Result<AuxConstants> {
    for c in u0.components() {
        c.require_zero_slice_mean("aux_constants")?;
    }
    let spec = SliceSpectrum::of_field(u0);
    let norms = DataNorms {
        l2_sq: spec.mixed_sq(VNorm::LInf, 0.0),
        grad_sq: spec.mixed_sq(VNorm::LInf, 1.0),
        besov_sq: besov_of_spectrum(&spec, p.delta, &p.t_grid)?,
    };
    if !(norms.l2_sq > 0.0) {
        return Err(Error::ZeroData("auxiliary constants of zero data".into()));
    }

    let l2 = spec.weighted(|_| 1.0);
    let neg = spec.weighted(|k| multiplier(k, -p.delta));
    let inter = l2
        .iter()
        .zip(&neg)
        .map(|(a, b)| a.sqrt() + b.sqrt())
        .fold(0.0, f64::max);
    let c0 = inter * (1.0 + norms.l2_sq.sqrt());
    let grad_l2 = spec.mixed_sq(VNorm::L2, 1.0).sqrt();
    let c1 = (1.0 + grad_l2) * (p.c * c0 * c0).exp();

    let u0v = u0_functional_of(&spec, u0, p.eps)?;

    Ok(AuxConstants {
        c0,
        c1,
        u0: u0v,
        t_delta: norms.t_delta(p.delta, p.c_delta)?,
    })
}
