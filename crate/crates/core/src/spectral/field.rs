//! Scalar and vector fields on a [`Grid`], in real, horizontally spectral, or
//! fully spectral representation.
//!
//! Normalization: the forward transform carries `1/(n_h² n_v)`, so spectral
//! coefficients are Fourier-series coefficients, `f(x) = Σ f̂(ξ) e^{iξ·x}`.
//! Parseval then reads `‖f‖²_{L²} = |Ω| Σ |f̂(ξ)|²` over the full torus and
//! `‖f(·,z)‖²_{L²_h} = L_h² Σ_{ξ_h} |f̂(ξ_h, z)|²` per slice.

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::real::{cst, Real};

/// Representation of a field's data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Point values.
    Real,
    /// Fourier in `(x₁, x₂)`, point values in `x₃`.
    HSpectral,
    /// Fourier in all three directions.
    Spectral,
}

#[derive(Clone, Debug)]
pub struct ScalarField<T: Real = f64> {
    grid: Grid<T>,
    space: Space,
    data: Vec<Complex<T>>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: &Grid<T>, space: Space) -> Self {
        ScalarField {
            grid: grid.clone(),
            space,
            data: vec![Complex::default(); grid.len()],
        }
    }

    pub fn from_data(grid: &Grid<T>, space: Space, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Shape(format!(
                "data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            space,
            data,
        })
    }

    /// Samples `f(x₁, x₂, x₃)` at the grid points.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T, T, T) -> T) -> Self {
        let n = grid.n_h();
        let mut data = Vec::with_capacity(grid.len());
        for i3 in 0..grid.n_v() {
            let z = grid.x_v(i3);
            for i2 in 0..n {
                let y = grid.x_h(i2);
                for i1 in 0..n {
                    data.push(Complex::new(f(grid.x_h(i1), y, z), T::zero()));
                }
            }
        }
        ScalarField {
            grid: grid.clone(),
            space: Space::Real,
            data,
        }
    }

    pub fn from_real(grid: &Grid<T>, values: &[T]) -> Result<Self> {
        let data = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        Self::from_data(grid, Space::Real, data)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn space(&self) -> Space {
        self.space
    }
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Real parts of the point values (converts if needed).
    pub fn real_values(&self) -> Vec<T> {
        self.to_space(Space::Real).data.iter().map(|c| c.re).collect()
    }

    pub fn into_space(mut self, target: Space) -> Self {
        self.convert(target);
        self
    }

    pub fn to_space(&self, target: Space) -> Self {
        if self.space == target {
            self.clone()
        } else {
            self.clone().into_space(target)
        }
    }

    /// Converts in place.
    pub fn convert(&mut self, target: Space) {
        use Space::*;
        let g = self.grid.clone();
        match (self.space, target) {
            (a, b) if a == b => {}
            (Real, HSpectral) => g.fft_h(&mut self.data, true),
            (Real, Spectral) => {
                g.fft_h(&mut self.data, true);
                g.fft_v(&mut self.data, true);
            }
            (HSpectral, Spectral) => g.fft_v(&mut self.data, true),
            (Spectral, HSpectral) => g.fft_v(&mut self.data, false),
            (HSpectral, Real) => {
                g.fft_h(&mut self.data, false);
                self.drop_imaginary();
            }
            (Spectral, Real) => {
                g.fft_v(&mut self.data, false);
                g.fft_h(&mut self.data, false);
                self.drop_imaginary();
            }
            _ => unreachable!(),
        }
        self.space = target;
    }

    fn drop_imaginary(&mut self) {
        self.data.iter_mut().for_each(|c| c.im = T::zero());
    }

    pub fn scale(&mut self, a: T) {
        self.data.iter_mut().for_each(|c| *c = *c * a);
    }

    /// `self += a * other`; `other` is converted to `self`'s space if needed.
    pub fn add_scaled(&mut self, a: T, other: &Self) -> Result<()> {
        self.check_same_grid(other)?;
        let o = if other.space == self.space {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.to_space(self.space))
        };
        self.data
            .iter_mut()
            .zip(o.data.iter())
            .for_each(|(x, y)| *x = *x + *y * a);
        Ok(())
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "fields live on different grids: {:?} vs {:?}",
                self.grid.spec(),
                other.grid.spec()
            )));
        }
        Ok(())
    }

    /// `Σ |f̂|²` in spectral spaces; mean square in real space.
    fn mean_square(&self) -> T {
        match self.space {
            Space::Real => {
                self.data.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b)
                    / cst(self.grid.len() as f64)
            }
            Space::Spectral => self.data.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b),
            Space::HSpectral => {
                self.data.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b)
                    / cst(self.grid.n_v() as f64)
            }
        }
    }

    /// `‖f‖_{L²}` over the torus, computed in the field's own space.
    pub fn l2_norm(&self) -> T {
        (self.mean_square() * self.grid.volume()).sqrt()
    }

    /// Root-mean-square value.
    pub fn rms(&self) -> T {
        self.mean_square().sqrt()
    }

    /// Maximum absolute point value.
    pub fn linf_norm(&self) -> T {
        let r = self.to_space(Space::Real);
        r.data.iter().map(|c| c.re.abs()).fold(T::zero(), T::max)
    }

    /// Horizontal mean of every slice.
    pub fn slice_means(&self) -> Vec<T> {
        let h = self.to_space(Space::HSpectral);
        let s = self.grid.slice_len();
        (0..self.grid.n_v()).map(|k| h.data[k * s].re).collect()
    }

    /// Errors with [`Error::NonZeroMean`] unless every slice mean is below
    /// `1e-10 · rms(f)`.
    pub fn require_zero_slice_mean(&self, op: &'static str) -> Result<()> {
        let tol = cst::<T>(1e-10) * self.rms();
        let h = self.to_space(Space::HSpectral);
        let s = self.grid.slice_len();
        for k in 0..self.grid.n_v() {
            if h.data[k * s].norm() > tol {
                return Err(Error::NonZeroMean { op });
            }
        }
        Ok(())
    }

    /// Sets every slice's horizontal mean to zero. Field must be in a
    /// spectral space.
    pub(crate) fn zero_slice_means(&mut self) {
        debug_assert_ne!(self.space, Space::Real);
        let s = self.grid.slice_len();
        match self.space {
            Space::HSpectral | Space::Spectral => {
                for k in 0..self.grid.n_v() {
                    self.data[k * s] = Complex::default();
                }
            }
            Space::Real => {}
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Copies slice `k` into a one-slice field on `grid` (which must have
    /// `n_v = 1` and the same horizontal size).
    pub fn extract_slice(&self, k: usize, grid: &Grid<T>) -> Result<Self> {
        if grid.n_v() != 1 || grid.n_h() != self.grid.n_h() || k >= self.grid.n_v() {
            return Err(Error::Shape("slice extraction needs a matching one-slice grid".into()));
        }
        if self.space == Space::Spectral {
            return Err(Error::Shape("slice extraction needs a real or HSpectral field".into()));
        }
        let s = self.grid.slice_len();
        Ok(ScalarField {
            grid: grid.clone(),
            space: self.space,
            data: self.data[k * s..(k + 1) * s].to_vec(),
        })
    }
}

/// A list of scalar components sharing one grid and one space tag.
#[derive(Clone, Debug)]
pub struct VectorField<T: Real = f64> {
    components: Vec<ScalarField<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(components: Vec<ScalarField<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Shape("vector field needs at least one component".into()))?;
        let (g, sp) = (first.grid().clone(), first.space());
        for c in &components[1..] {
            c.check_same_grid(first)?;
            if c.space() != sp {
                return Err(Error::Shape("components in different spaces".into()));
            }
        }
        let _ = g;
        Ok(VectorField { components })
    }

    pub fn zeros(grid: &Grid<T>, space: Space, n: usize) -> Self {
        VectorField {
            components: (0..n).map(|_| ScalarField::zeros(grid, space)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
    pub fn grid(&self) -> &Grid<T> {
        self.components[0].grid()
    }
    pub fn space(&self) -> Space {
        self.components[0].space()
    }
    pub fn components(&self) -> &[ScalarField<T>] {
        &self.components
    }
    pub fn components_mut(&mut self) -> &mut [ScalarField<T>] {
        &mut self.components
    }
    pub fn into_components(self) -> Vec<ScalarField<T>> {
        self.components
    }
    pub fn component(&self, i: usize) -> &ScalarField<T> {
        &self.components[i]
    }

    pub fn to_space(&self, space: Space) -> Self {
        VectorField {
            components: self.components.iter().map(|c| c.to_space(space)).collect(),
        }
    }
    pub fn into_space(self, space: Space) -> Self {
        VectorField {
            components: self
                .components
                .into_iter()
                .map(|c| c.into_space(space))
                .collect(),
        }
    }

    pub fn scale(&mut self, a: T) {
        self.components.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn add_scaled(&mut self, a: T, other: &Self) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::Shape("component count mismatch".into()));
        }
        for (x, y) in self.components.iter_mut().zip(other.components.iter()) {
            x.add_scaled(a, y)?;
        }
        Ok(())
    }

    pub fn l2_norm(&self) -> T {
        self.components
            .iter()
            .map(|c| {
                let n = c.l2_norm();
                n * n
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Maximum over grid points of the Euclidean length.
    pub fn linf_norm(&self) -> T {
        let reals: Vec<Vec<T>> = self.components.iter().map(|c| c.real_values()).collect();
        (0..self.grid().len())
            .map(|i| {
                reals
                    .iter()
                    .map(|r| r[i] * r[i])
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            })
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}
