use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{to_f64, Real};
use crate::spectral::{
    curl_h, div_check, inv_laplacian_h, perp_gradient_h, Grid, ScalarField, Space, VectorField,
};

use super::energy::SliceLedger;

/// Vorticity of a 2.5-D flow on every horizontal slice, with its `ε` and time.
///
/// The solver keeps `omega` in [`Space::HSpectral`].
#[derive(Clone, Debug)]
pub struct SliceStackState<T: Real = f64> {
    pub omega: ScalarField<T>,
    pub eps: T,
    pub t: T,
}

impl<T: Real> SliceStackState<T> {
    pub fn new(omega: ScalarField<T>, eps: T, t: T) -> Result<Self> {
        if !(eps >= T::zero()) {
            return Err(Error::InvalidArgument(format!("eps must be >= 0, got {eps}")));
        }
        omega.require_zero_slice_mean("SliceStackState")?;
        let mut omega = omega.into_space(Space::HSpectral);
        omega.zero_slice_means();
        Ok(SliceStackState { omega, eps, t })
    }

    /// Builds the state from a horizontal velocity field; the field must be
    /// divergence-free per slice.
    pub fn from_velocity(u: &VectorField<T>, eps: T, t: T) -> Result<Self> {
        if u.dim() != 2 {
            return Err(Error::Shape(format!("expected 2 components, got {}", u.dim())));
        }
        let d = div_check(u)?;
        if d > T::from_f64(1e-8).unwrap() {
            return Err(Error::InvalidArgument(format!(
                "initial velocity is not divergence-free (relative divergence {d:e})"
            )));
        }
        for c in u.components() {
            c.require_zero_slice_mean("SliceStackState::from_velocity")?;
        }
        Self::new(curl_h(u)?, eps, t)
    }

    pub fn zeros(grid: &Grid<T>, eps: T) -> Self {
        SliceStackState {
            omega: ScalarField::zeros(grid, Space::HSpectral),
            eps,
            t: T::zero(),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.omega.grid()
    }

    /// `u^h = ∇_h^⊥ Δ_h^{-1} ω`, in the space of `omega`.
    pub fn velocity(&self) -> Result<VectorField<T>> {
        biot_savart(&self.omega)
    }

    pub fn check_invariants(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::Diverged { t: to_f64(self.t) });
        }
        self.omega.require_zero_slice_mean("SliceStackState")
    }
}

/// Per-slice Biot–Savart law `u^h = ∇_h^⊥ Δ_h^{-1} ω`.
pub fn biot_savart<T: Real>(omega: &ScalarField<T>) -> Result<VectorField<T>> {
    omega.require_zero_slice_mean("biot_savart")?;
    perp_gradient_h(&inv_laplacian_h(omega)?)
}

/// One stored sample of a 2.5-D run.
#[derive(Clone, Debug)]
pub struct Sample<T: Real = f64> {
    pub step: usize,
    pub t: T,
    pub state: Option<SliceStackState<T>>,
    pub ledger: Option<SliceLedger<T>>,
}

/// Samples of a 2.5-D run in increasing time order.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real = f64> {
    pub grid: Grid<T>,
    pub eps: T,
    pub dt: T,
    pub config_hash: String,
    samples: Vec<Sample<T>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySummary {
    pub eps: f64,
    pub dt: f64,
    pub samples: usize,
    pub t_end: f64,
}

impl<T: Real> Trajectory<T> {
    pub fn new(grid: &Grid<T>, eps: T, dt: T) -> Self {
        Trajectory {
            grid: grid.clone(),
            eps,
            dt,
            config_hash: String::new(),
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, sample: Sample<T>) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(Error::InvalidArgument(format!(
                    "sample times must increase ({} after {})",
                    sample.t, last.t
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The stored state at time `t`. Matching tolerates `1e-9·max(1, |t|)`.
    pub fn state_at(&self, t: T) -> Result<&SliceStackState<T>> {
        let tol = T::from_f64(1e-9).unwrap() * T::one().max(t.abs());
        let i = self.samples.partition_point(|s| s.t < t - tol);
        match self.samples.get(i) {
            Some(s) if (s.t - t).abs() <= tol => s
                .state
                .as_ref()
                .ok_or(Error::NotSampled { t: to_f64(t) }),
            _ => Err(Error::NotSampled { t: to_f64(t) }),
        }
    }

    pub fn last_state(&self) -> Option<&SliceStackState<T>> {
        self.samples.iter().rev().find_map(|s| s.state.as_ref())
    }

    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            eps: to_f64(self.eps),
            dt: to_f64(self.dt),
            samples: self.samples.len(),
            t_end: self.samples.last().map_or(0.0, |s| to_f64(s.t)),
        }
    }
}
