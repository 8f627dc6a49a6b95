//! Fourier multiplier operators. Every operator returns its result in the
//! same space as its input.

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::{ScalarField, Space, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
    X3,
}

/// Kind of heat flow used by [`heat_semigroup`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeatKind<T> {
    /// `e^{tΔ_h}`.
    Horizontal,
    /// `e^{tΔ_ε}` with `Δ_ε = Δ_h + ε²∂₃²`.
    Anisotropic(T),
    /// `e^{tΔ}`, the isotropic 3-D flow.
    Full,
}


pub(crate) fn work_space(space: Space, vertical: bool) -> Space {
    match (space, vertical) {
        (Space::Spectral, _) | (_, true) => Space::Spectral,
        _ => Space::HSpectral,
    }
}

/// Multiplies every coefficient by `m(i1, i2)` (horizontal positions). The
/// field must be in a spectral space.
pub(crate) fn apply_h<T: Real>(
    f: &mut ScalarField<T>,
    m: impl Fn(usize, usize) -> Complex<T> + Sync,
) {
    debug_assert_ne!(f.space(), Space::Real);
    let n = f.grid().n_h();
    let s = n * n;
    f.data_mut().iter_mut().enumerate().for_each(|(idx, c)| {
        let h = idx % s;
        *c = *c * m(h % n, h / n);
    });
}

/// Multiplies every coefficient by `m(i1, i2, i3)`. The field must be fully
/// spectral.
pub(crate) fn apply_3d<T: Real>(
    f: &mut ScalarField<T>,
    m: impl Fn(usize, usize, usize) -> Complex<T>,
) {
    debug_assert_eq!(f.space(), Space::Spectral);
    let n = f.grid().n_h();
    let s = n * n;
    f.data_mut().iter_mut().enumerate().for_each(|(idx, c)| {
        let h = idx % s;
        *c = *c * m(h % n, h / n, idx / s);
    });
}

fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

fn im<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

/// Spectral derivative along `axis` (multiplication by `i k`, Nyquist mode
/// dropped).
pub fn derivative<T: Real>(f: &ScalarField<T>, axis: Axis) -> Result<ScalarField<T>> {
    let grid = f.grid().clone();
    if axis == Axis::X3 && grid.n_v() == 1 {
        return Err(Error::NoVerticalResolution);
    }
    let space = f.space();
    let mut w = f.to_space(work_space(space, axis == Axis::X3));
    match axis {
        Axis::X1 => {
            let k = grid.kh_deriv();
            apply_h(&mut w, |i1, _| im(k[i1]));
        }
        Axis::X2 => {
            let k = grid.kh_deriv();
            apply_h(&mut w, |_, i2| im(k[i2]));
        }
        Axis::X3 => {
            let k = grid.kv_deriv();
            apply_3d(&mut w, |_, _, i3| im(k[i3]));
        }
    }
    Ok(w.into_space(space))
}

/// `Δ_h^{-1}` on fields with zero horizontal mean on every slice.
pub fn inv_laplacian_h<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    f.require_zero_slice_mean("inv_laplacian_h")?;
    let space = f.space();
    let grid = f.grid().clone();
    let mut w = f.to_space(work_space(space, false));
    apply_h(&mut w, |i1, i2| {
        let k2 = grid.kh2(i1, i2);
        if k2 == T::zero() {
            Complex::default()
        } else {
            re(-T::one() / k2)
        }
    });
    Ok(w.into_space(space))
}

fn require_dim<T: Real>(v: &VectorField<T>, dim: usize, op: &str) -> Result<()> {
    if v.dim() != dim {
        return Err(Error::Shape(format!(
            "{op} expects {dim} components, got {}",
            v.dim()
        )));
    }
    Ok(())
}

/// Horizontal Leray projector `ℙ^h = I − ∇_h Δ_h^{-1} div_h`, slice by slice.
pub fn leray_h<T: Real>(v: &VectorField<T>) -> Result<VectorField<T>> {
    require_dim(v, 2, "leray_h")?;
    let space = v.space();
    let grid = v.grid().clone();
    let w = v.to_space(work_space(space, false));
    let k = grid.kh_deriv();
    let n = grid.n_h();
    let s = n * n;
    let (a, b) = (w.component(0).data(), w.component(1).data());
    let mut out0 = Vec::with_capacity(a.len());
    let mut out1 = Vec::with_capacity(a.len());
    for idx in 0..a.len() {
        let h = idx % s;
        let (k1, k2) = (k[h % n], k[h / n]);
        let kk = k1 * k1 + k2 * k2;
        if kk == T::zero() {
            out0.push(a[idx]);
            out1.push(b[idx]);
        } else {
            let dot = (a[idx] * k1 + b[idx] * k2) / kk;
            out0.push(a[idx] - dot * k1);
            out1.push(b[idx] - dot * k2);
        }
    }
    let ws = w.space();
    VectorField::new(vec![
        ScalarField::from_data(&grid, ws, out0)?.into_space(space),
        ScalarField::from_data(&grid, ws, out1)?.into_space(space),
    ])
}

/// Full 3-D Leray projector `v̂ − ξ(ξ·v̂)/|ξ|²`.
pub fn leray_3d<T: Real>(v: &VectorField<T>) -> Result<VectorField<T>> {
    require_dim(v, 3, "leray_3d")?;
    let space = v.space();
    let w = v.to_space(Space::Spectral);
    let mut comps: Vec<Vec<Complex<T>>> = w
        .components()
        .iter()
        .map(|c| c.data().to_vec())
        .collect();
    project_3d_in_place(w.grid(), &mut comps);
    let grid = w.grid().clone();
    let out = comps
        .into_iter()
        .map(|d| ScalarField::from_data(&grid, Space::Spectral, d).map(|f| f.into_space(space)))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(out)
}

/// Leray projection on raw spectral component arrays.
pub(crate) fn project_3d_in_place<T: Real>(grid: &Grid<T>, comps: &mut [Vec<Complex<T>>]) {
    let kh = grid.kh_deriv();
    let kv = grid.kv_deriv();
    let n = grid.n_h();
    let s = n * n;
    let (c0, rest) = comps.split_at_mut(1);
    let (c1, c2) = rest.split_at_mut(1);
    let (c0, c1, c2) = (&mut c0[0], &mut c1[0], &mut c2[0]);
    for idx in 0..c0.len() {
        let h = idx % s;
        let (k1, k2, k3) = (kh[h % n], kh[h / n], kv[idx / s]);
        let kk = k1 * k1 + k2 * k2 + k3 * k3;
        if kk == T::zero() {
            continue;
        }
        let dot = (c0[idx] * k1 + c1[idx] * k2 + c2[idx] * k3) / kk;
        c0[idx] = c0[idx] - dot * k1;
        c1[idx] = c1[idx] - dot * k2;
        c2[idx] = c2[idx] - dot * k3;
    }
}

/// Heat flow for time `t ≥ 0`.
pub fn heat_semigroup<T: Real>(
    f: &ScalarField<T>,
    t: T,
    kind: HeatKind<T>,
) -> Result<ScalarField<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "heat_semigroup needs t >= 0, got {t}"
        )));
    }
    let space = f.space();
    let grid = f.grid().clone();
    let vertical_weight = match kind {
        HeatKind::Horizontal => None,
        HeatKind::Anisotropic(eps) if eps == T::zero() || grid.n_v() == 1 => None,
        HeatKind::Anisotropic(eps) => Some(eps * eps),
        HeatKind::Full if grid.n_v() == 1 => None,
        HeatKind::Full => Some(T::one()),
    };
    let mut w = f.to_space(work_space(space, vertical_weight.is_some()));
    match vertical_weight {
        None => apply_h(&mut w, |i1, i2| re((-t * grid.kh2(i1, i2)).exp())),
        Some(e2) => {
            let kv = grid.kv();
            apply_3d(&mut w, |i1, i2, i3| {
                re((-t * (grid.kh2(i1, i2) + e2 * kv[i3] * kv[i3])).exp())
            })
        }
    }
    Ok(w.into_space(space))
}

/// Keeps horizontal modes with `|ξ_h| ≤ g` (closed ball), zeroes the rest.
pub fn lowpass<T: Real>(f: &ScalarField<T>, g: T) -> Result<ScalarField<T>> {
    if !(g >= T::zero()) {
        return Err(Error::InvalidArgument(format!("lowpass radius {g} < 0")));
    }
    let space = f.space();
    let grid = f.grid().clone();
    let g2 = g * g;
    let mut w = f.to_space(work_space(space, false));
    apply_h(&mut w, |i1, i2| {
        if grid.kh2(i1, i2) <= g2 {
            re(T::one())
        } else {
            Complex::default()
        }
    });
    Ok(w.into_space(space))
}

/// Dealiasing on all three axes (axes with one point are untouched).
pub fn dealias<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let space = f.space();
    let grid = f.grid().clone();
    let mut w = f.to_space(Space::Spectral);
    let (kh, kv) = (grid.keep_h(), grid.keep_v());
    apply_3d(&mut w, |i1, i2, i3| {
        if kh[i1] && kh[i2] && kv[i3] {
            re(T::one())
        } else {
            Complex::default()
        }
    });
    w.into_space(space)
}

/// Dealiasing on the horizontal axes only.
pub fn dealias_h<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let space = f.space();
    let grid = f.grid().clone();
    let mut w = f.to_space(work_space(space, false));
    let kh = grid.keep_h();
    apply_h(&mut w, |i1, i2| {
        if kh[i1] && kh[i2] {
            re(T::one())
        } else {
            Complex::default()
        }
    });
    w.into_space(space)
}

/// Horizontal divergence for 2-component fields, full divergence for 3.
pub fn divergence<T: Real>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    let axes = match v.dim() {
        2 => &[Axis::X1, Axis::X2][..],
        3 => &[Axis::X1, Axis::X2, Axis::X3][..],
        d => return Err(Error::Shape(format!("divergence of a {d}-component field"))),
    };
    let mut out = ScalarField::zeros(v.grid(), v.space());
    for (c, &ax) in v.components().iter().zip(axes) {
        out.add_scaled(T::one(), &derivative(c, ax)?)?;
    }
    Ok(out)
}

/// `‖div v‖_{L²} / ‖v‖_{L²}`, zero for the zero field.
pub fn div_check<T: Real>(v: &VectorField<T>) -> Result<T> {
    let norm = v.l2_norm();
    if norm == T::zero() {
        return Ok(T::zero());
    }
    Ok(divergence(v)?.l2_norm() / norm)
}

/// `∇_h f = (∂₁f, ∂₂f)`.
pub fn gradient_h<T: Real>(f: &ScalarField<T>) -> Result<VectorField<T>> {
    VectorField::new(vec![derivative(f, Axis::X1)?, derivative(f, Axis::X2)?])
}

/// `∇_h^⊥ f = (−∂₂f, ∂₁f)`.
pub fn perp_gradient_h<T: Real>(f: &ScalarField<T>) -> Result<VectorField<T>> {
    let mut a = derivative(f, Axis::X2)?;
    a.scale(-T::one());
    VectorField::new(vec![a, derivative(f, Axis::X1)?])
}

/// Horizontal curl `∂₁v² − ∂₂v¹` of the first two components.
pub fn curl_h<T: Real>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    if v.dim() < 2 {
        return Err(Error::Shape("curl_h needs two components".into()));
    }
    let mut w = derivative(v.component(1), Axis::X1)?;
    w.add_scaled(-T::one(), &derivative(v.component(0), Axis::X2)?)?;
    Ok(w)
}
