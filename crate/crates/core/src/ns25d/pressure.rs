use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{Axis, ScalarField, Space, derivative};

use super::solver::{HTables, SliceBuf};
use super::state::SliceStackState;

type C<T> = Complex<T>;

/// Pressure `p^h` with `Δ_h p^h = −Σ ∂_j∂_k(u^j u^k)` on every slice
/// (HSpectral, zero slice means).
pub fn pressure<T: Real>(state: &SliceStackState<T>) -> Result<ScalarField<T>> {
    let w = state.omega.to_space(Space::HSpectral);
    let grid = w.grid().clone();
    let tab = HTables::new(&grid);
    let s = grid.slice_len();
    let mut out = vec![C::default(); grid.len()];
    out.par_chunks_mut(s)
        .zip(w.data().par_chunks(s))
        .for_each_init(
            || (SliceBuf::new(&grid), vec![C::default(); s], vec![C::default(); s]),
            |(buf, p12, p22), (o, ws)| {
                for (h, &c) in ws.iter().enumerate() {
                    buf.a[h] = tab.packed_velocity(h, c);
                }
                grid.fft_h_slice(&mut buf.a, false, &mut buf.work);
                for h in 0..s {
                    let u = buf.a[h];
                    o[h] = C::new(u.re * u.re, T::zero());
                    p12[h] = C::new(u.re * u.im, T::zero());
                    p22[h] = C::new(u.im * u.im, T::zero());
                }
                grid.fft_h_slice(o, true, &mut buf.work);
                grid.fft_h_slice(p12, true, &mut buf.work);
                grid.fft_h_slice(p22, true, &mut buf.work);
                let two = T::one() + T::one();
                for h in 0..s {
                    let (k1, k2) = (tab.kx[h], tab.ky[h]);
                    o[h] = if tab.keep[h] {
                        -(o[h] * (k1 * k1) + p12[h] * (two * k1 * k2) + p22[h] * (k2 * k2))
                            * tab.inv_k2[h]
                    } else {
                        C::default()
                    };
                }
            },
        );
    ScalarField::from_data(&grid, Space::HSpectral, out)
}

/// Pressure and its vertical derivative
/// `∂_z p^h = 2 Σ (−Δ_h)^{-1}∂_j∂_k(u^j ∂_z u^k)` (both HSpectral).
pub fn pressure_and_dz<T: Real>(
    state: &SliceStackState<T>,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let grid = state.grid().clone();
    if grid.n_v() < 2 {
        return Err(Error::NoVerticalResolution);
    }
    let p = pressure(state)?;
    let w = state.omega.to_space(Space::HSpectral);
    let dzw = derivative(&w, Axis::X3)?;
    let tab = HTables::new(&grid);
    let s = grid.slice_len();
    let mut out = vec![C::default(); grid.len()];
    out.par_chunks_mut(s)
        .zip(w.data().par_chunks(s).zip(dzw.data().par_chunks(s)))
        .for_each_init(
            || (SliceBuf::new(&grid), vec![C::default(); s], vec![C::default(); s]),
            |(buf, q12, q22), (o, (ws, ds))| {
                for h in 0..s {
                    buf.a[h] = tab.packed_velocity(h, ws[h]);
                    buf.b[h] = tab.packed_velocity(h, ds[h]);
                }
                grid.fft_h_slice(&mut buf.a, false, &mut buf.work);
                grid.fft_h_slice(&mut buf.b, false, &mut buf.work);
                for h in 0..s {
                    let (u, v) = (buf.a[h], buf.b[h]);
                    o[h] = C::new(u.re * v.re, T::zero());
                    q12[h] = C::new(u.re * v.im + u.im * v.re, T::zero());
                    q22[h] = C::new(u.im * v.im, T::zero());
                }
                grid.fft_h_slice(o, true, &mut buf.work);
                grid.fft_h_slice(q12, true, &mut buf.work);
                grid.fft_h_slice(q22, true, &mut buf.work);
                let two = T::one() + T::one();
                for h in 0..s {
                    let (k1, k2) = (tab.kx[h], tab.ky[h]);
                    o[h] = if tab.keep[h] {
                        -(o[h] * (k1 * k1) + q12[h] * (k1 * k2) + q22[h] * (k2 * k2))
                            * (two * tab.inv_k2[h])
                    } else {
                        C::default()
                    };
                }
            },
        );
    Ok((p, ScalarField::from_data(&grid, Space::HSpectral, out)?))
}
