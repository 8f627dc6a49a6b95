//! Discrete torus `T²_h × T_v` and its Fourier dual.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{cst, Real};

/// Geometry of a grid, independent of the scalar type. This is what gets
/// serialized into checkpoints and configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_h: usize,
    pub n_v: usize,
    pub l_h: f64,
    pub l_v: f64,
    /// Dealiasing fraction as `(numerator, denominator)`, default `2/3`.
    #[serde(default = "default_dealias")]
    pub dealias: (u32, u32),
}

fn default_dealias() -> (u32, u32) {
    (2, 3)
}

impl GridSpec {
    pub fn new(n_h: usize, n_v: usize, l_h: f64, l_v: f64) -> Self {
        GridSpec {
            n_h,
            n_v,
            l_h,
            l_v,
            dealias: default_dealias(),
        }
    }

    /// `n_h × n_h × n_v` points on `[0, 2π)³`.
    pub fn periodic(n_h: usize, n_v: usize) -> Self {
        Self::new(n_h, n_v, 2.0 * PI, 2.0 * PI)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_h", self.n_h), ("n_v", self.n_v)] {
            if n == 0 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} is not a positive power of two"
                )));
            }
        }
        if !(self.l_h > 0.0 && self.l_h.is_finite() && self.l_v > 0.0 && self.l_v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "periods must be positive, got l_h = {}, l_v = {}",
                self.l_h, self.l_v
            )));
        }
        let (num, den) = self.dealias;
        if num == 0 || den == 0 || num > den {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {num}/{den} outside (0, 1]"
            )));
        }
        Ok(())
    }
}

pub(crate) struct FftPlans<T: Real> {
    h_fwd: Arc<dyn Fft<T>>,
    h_inv: Arc<dyn Fft<T>>,
    v_fwd: Arc<dyn Fft<T>>,
    v_inv: Arc<dyn Fft<T>>,
}

/// A grid together with its wavenumber tables and FFT plans.
///
/// Cloning is cheap: plans are shared. Equality compares geometry only.
#[derive(Clone)]
pub struct Grid<T: Real = f64> {
    spec: GridSpec,
    l_h: T,
    l_v: T,
    kh: Arc<Vec<T>>,
    kh_d: Arc<Vec<T>>,
    kv: Arc<Vec<T>>,
    kv_d: Arc<Vec<T>>,
    keep_h: Arc<Vec<bool>>,
    keep_v: Arc<Vec<bool>>,
    plans: Arc<FftPlans<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// Signed Fourier index of storage position `i` on an axis with `n` points.
/// The Nyquist position maps to `-n/2`.
#[inline]
pub fn mode_index(i: usize, n: usize) -> i64 {
    if i < n / 2 || n == 1 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn wavenumbers<T: Real>(n: usize, l: f64, zero_nyquist: bool) -> Vec<T> {
    (0..n)
        .map(|i| {
            let m = mode_index(i, n);
            if zero_nyquist && n > 1 && i == n / 2 {
                T::zero()
            } else {
                cst(2.0 * PI * m as f64 / l)
            }
        })
        .collect()
}

fn dealias_mask(n: usize, (num, den): (u32, u32)) -> Vec<bool> {
    // keep |m| <= fraction * n/2
    (0..n)
        .map(|i| {
            let m = mode_index(i, n).unsigned_abs() as u128;
            m * 2 * den as u128 <= num as u128 * n as u128
        })
        .collect()
}

impl<T: Real> Grid<T> {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let mut planner = FftPlanner::<T>::new();
        let plans = FftPlans {
            h_fwd: planner.plan_fft(spec.n_h, FftDirection::Forward),
            h_inv: planner.plan_fft(spec.n_h, FftDirection::Inverse),
            v_fwd: planner.plan_fft(spec.n_v, FftDirection::Forward),
            v_inv: planner.plan_fft(spec.n_v, FftDirection::Inverse),
        };
        Ok(Grid {
            spec,
            l_h: cst(spec.l_h),
            l_v: cst(spec.l_v),
            kh: Arc::new(wavenumbers(spec.n_h, spec.l_h, false)),
            kh_d: Arc::new(wavenumbers(spec.n_h, spec.l_h, true)),
            kv: Arc::new(wavenumbers(spec.n_v, spec.l_v, false)),
            kv_d: Arc::new(wavenumbers(spec.n_v, spec.l_v, true)),
            keep_h: Arc::new(dealias_mask(spec.n_h, spec.dealias)),
            keep_v: Arc::new(dealias_mask(spec.n_v, spec.dealias)),
            plans: Arc::new(plans),
        })
    }

    /// Same horizontal geometry and point counts, different vertical period.
    pub fn with_vertical_period(&self, l_v: f64) -> Result<Self> {
        let spec = GridSpec { l_v, ..self.spec };
        spec.validate()?;
        Ok(Grid {
            spec,
            l_v: cst(l_v),
            kv: Arc::new(wavenumbers(spec.n_v, l_v, false)),
            kv_d: Arc::new(wavenumbers(spec.n_v, l_v, true)),
            ..self.clone()
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn n_h(&self) -> usize {
        self.spec.n_h
    }
    pub fn n_v(&self) -> usize {
        self.spec.n_v
    }
    pub fn l_h(&self) -> T {
        self.l_h
    }
    pub fn l_v(&self) -> T {
        self.l_v
    }
    /// Points per horizontal slice.
    pub fn slice_len(&self) -> usize {
        self.spec.n_h * self.spec.n_h
    }
    pub fn len(&self) -> usize {
        self.slice_len() * self.spec.n_v
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// Area of one horizontal slice.
    pub fn area(&self) -> T {
        self.l_h * self.l_h
    }
    pub fn volume(&self) -> T {
        self.area() * self.l_v
    }
    /// Vertical quadrature weight `L_v / n_v`.
    pub fn dz(&self) -> T {
        self.l_v / cst(self.spec.n_v as f64)
    }
    pub fn x_h(&self, i: usize) -> T {
        self.l_h * cst(i as f64 / self.spec.n_h as f64)
    }
    pub fn x_v(&self, i: usize) -> T {
        self.l_v * cst(i as f64 / self.spec.n_v as f64)
    }

    /// Linear index, x₁ fastest.
    #[inline]
    pub fn idx(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.spec.n_h * (i2 + self.spec.n_h * i3)
    }

    /// Horizontal wavenumbers `2π m / L_h` (Nyquist kept).
    pub fn kh(&self) -> &[T] {
        &self.kh
    }
    /// Horizontal wavenumbers for odd derivatives (Nyquist zeroed).
    pub fn kh_deriv(&self) -> &[T] {
        &self.kh_d
    }
    pub fn kv(&self) -> &[T] {
        &self.kv
    }
    pub fn kv_deriv(&self) -> &[T] {
        &self.kv_d
    }
    pub(crate) fn keep_h(&self) -> &[bool] {
        &self.keep_h
    }
    pub(crate) fn keep_v(&self) -> &[bool] {
        &self.keep_v
    }

    /// `|ξ_h|²` at horizontal storage position `(i1, i2)`.
    #[inline]
    pub fn kh2(&self, i1: usize, i2: usize) -> T {
        self.kh[i1] * self.kh[i1] + self.kh[i2] * self.kh[i2]
    }

    /// Largest horizontal wavenumber modulus present on the grid.
    pub fn max_kh(&self) -> T {
        let k = cst::<T>(2.0 * PI / self.spec.l_h) * cst((self.spec.n_h / 2) as f64);
        (k * k + k * k).sqrt()
    }

    /// In-place horizontal 2-D transform of every slice in `data`.
    /// The forward direction carries the `1/n_h²` factor.
    pub(crate) fn fft_h(&self, data: &mut [Complex<T>], forward: bool) {
        let s = self.slice_len();
        debug_assert_eq!(data.len() % s, 0);
        data.par_chunks_mut(s).for_each_init(
            || SliceWork::new(self),
            |w, slice| self.fft_h_slice(slice, forward, w),
        );
    }

    /// Transforms one horizontal slice in place, serially.
    pub(crate) fn fft_h_slice(&self, slice: &mut [Complex<T>], forward: bool, w: &mut SliceWork<T>) {
        let n = self.spec.n_h;
        let fft = if forward {
            &self.plans.h_fwd
        } else {
            &self.plans.h_inv
        };
        fft.process_with_scratch(slice, &mut w.scratch);
        transpose(slice, &mut w.tmp, n);
        fft.process_with_scratch(&mut w.tmp, &mut w.scratch);
        transpose(&w.tmp, slice, n);
        if forward {
            let scale = cst::<T>(1.0 / (n * n) as f64);
            slice.iter_mut().for_each(|c| *c = *c * scale);
        }
    }

    pub(crate) fn fft_v(&self, data: &mut [Complex<T>], forward: bool) {
        let nv = self.spec.n_v;
        if nv == 1 {
            return;
        }
        let s = self.slice_len();
        debug_assert_eq!(data.len(), s * nv);
        let fft = if forward {
            &self.plans.v_fwd
        } else {
            &self.plans.v_inv
        };
        let scale = cst::<T>(1.0 / nv as f64);
        let mut cols = vec![Complex::default(); data.len()];
        {
            let src: &[Complex<T>] = data;
            cols.par_chunks_mut(nv * 64.min(s))
                .enumerate()
                .for_each(|(block, chunk)| {
                    let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
                    let c0 = block * 64.min(s);
                    for (j, col) in chunk.chunks_mut(nv).enumerate() {
                        let c = c0 + j;
                        for (k, v) in col.iter_mut().enumerate() {
                            *v = src[k * s + c];
                        }
                    }
                    fft.process_with_scratch(chunk, &mut scratch);
                    if forward {
                        chunk.iter_mut().for_each(|c| *c = *c * scale);
                    }
                });
        }
        let cols = &cols;
        data.par_chunks_mut(s).enumerate().for_each(|(k, slice)| {
            for (c, v) in slice.iter_mut().enumerate() {
                *v = cols[c * nv + k];
            }
        });
    }
}

/// Scratch space for [`Grid::fft_h_slice`].
pub(crate) struct SliceWork<T: Real> {
    scratch: Vec<Complex<T>>,
    tmp: Vec<Complex<T>>,
}

impl<T: Real> SliceWork<T> {
    pub(crate) fn new(grid: &Grid<T>) -> Self {
        let len = grid
            .plans
            .h_fwd
            .get_inplace_scratch_len()
            .max(grid.plans.h_inv.get_inplace_scratch_len());
        SliceWork {
            scratch: vec![Complex::default(); len],
            tmp: vec![Complex::default(); grid.slice_len()],
        }
    }
}

fn transpose<T: Copy>(src: &[T], dst: &mut [T], n: usize) {
    const B: usize = 16;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}
