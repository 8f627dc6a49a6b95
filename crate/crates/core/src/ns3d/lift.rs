use crate::error::{Error, Result};
use crate::real::{cst, to_f64, Real};
use crate::spectral::{div_check, Grid, ScalarField, Space, VectorField};
use crate::ns25d::{pressure_and_dz, SliceStackState, Trajectory};

/// A 3-D velocity (or remainder) field with its time and `ε`.
#[derive(Clone, Debug)]
pub struct State3D<T: Real = f64> {
    pub u: VectorField<T>,
    pub t: T,
    pub eps: T,
}

impl<T: Real> State3D<T> {
    pub fn zeros(grid: &Grid<T>, eps: T) -> Self {
        State3D {
            u: VectorField::zeros(grid, Space::Spectral, 3),
            t: T::zero(),
            eps,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.u.grid()
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.u.dim() != 3 {
            return Err(Error::Shape(format!("3-D state with {} components", self.u.dim())));
        }
        if !self.u.is_finite() {
            return Err(Error::Diverged { t: to_f64(self.t) });
        }
        let d = div_check(&self.u)?;
        if d > cst(1e-10) {
            return Err(Error::InvalidArgument(format!("3-D field not divergence-free ({d:e})")));
        }
        Ok(())
    }
}

/// The 3-D grid on which `x₃ ↦ εx₃` maps the vertical grid of `grid25`
/// onto itself: same point counts, vertical period `L_v/ε`.
pub fn slow_grid<T: Real>(grid25: &Grid<T>, eps: T) -> Result<Grid<T>> {
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(Error::Incommensurate(format!("eps = {eps} is not positive")));
    }
    grid25.with_vertical_period(grid25.spec().l_v / to_f64(eps))
}

/// Slice stride `k` such that 3-D slice `j` sits at 2.5-D slice `j·k`.
pub fn commensurate_stride<T: Real>(grid25: &Grid<T>, grid3: &Grid<T>, eps: T) -> Result<usize> {
    let (a, b) = (grid25.spec(), grid3.spec());
    if a.n_h != b.n_h || (a.l_h - b.l_h).abs() > 1e-12 * a.l_h {
        return Err(Error::Incommensurate(format!(
            "horizontal grids differ ({}·{} vs {}·{})",
            a.n_h, a.l_h, b.n_h, b.l_h
        )));
    }
    let e = to_f64(eps);
    if !(e > 0.0) || (e * b.l_v - a.l_v).abs() > 1e-12 * a.l_v {
        return Err(Error::Incommensurate(format!(
            "eps·L_v3 = {} but L_v = {}",
            e * b.l_v,
            a.l_v
        )));
    }
    if b.n_v > a.n_v || a.n_v % b.n_v != 0 {
        return Err(Error::Incommensurate(format!(
            "n_v = {} does not subsample n_v = {}",
            b.n_v, a.n_v
        )));
    }
    Ok(a.n_v / b.n_v)
}

/// Copies real point values of a 2.5-D field onto `grid3` via `z = εx₃`.
pub(crate) fn lift_values<T: Real>(values: &[T], grid25: &Grid<T>, grid3: &Grid<T>, stride: usize) -> Vec<T> {
    let s = grid25.slice_len();
    let mut out = Vec::with_capacity(grid3.len());
    for j in 0..grid3.n_v() {
        let k = j * stride;
        out.extend_from_slice(&values[k * s..(k + 1) * s]);
    }
    out
}

/// Lifts a scalar 2.5-D field to `grid3` (Real space).
pub fn lift_scalar<T: Real>(f: &ScalarField<T>, grid3: &Grid<T>, eps: T) -> Result<ScalarField<T>> {
    let stride = commensurate_stride(f.grid(), grid3, eps)?;
    ScalarField::from_real(grid3, &lift_values(&f.real_values(), f.grid(), grid3, stride))
}

/// `(u^h(x_h, εx₃), 0)` on `grid3` (Real space).
pub fn lift_onto<T: Real>(state: &SliceStackState<T>, grid3: &Grid<T>, eps: T) -> Result<State3D<T>> {
    let u = state.velocity()?;
    let comps = vec![
        lift_scalar(u.component(0), grid3, eps)?,
        lift_scalar(u.component(1), grid3, eps)?,
        ScalarField::zeros(grid3, Space::Real),
    ];
    Ok(State3D {
        u: VectorField::new(comps)?,
        t: state.t,
        eps,
    })
}

/// `u_{0,ε}(x_h, x₃) = (u₀^h(x_h, εx₃), 0)` on [`slow_grid`].
pub fn lift_initial_data<T: Real>(u0: &SliceStackState<T>, eps: T) -> Result<State3D<T>> {
    lift_onto(u0, &slow_grid(u0.grid(), eps)?, eps)
}

/// `u_app` at a stored sample time of `traj`.
pub fn build_u_app<T: Real>(traj: &Trajectory<T>, eps: T, t: T) -> Result<State3D<T>> {
    lift_initial_data(traj.state_at(t)?, eps)
}

/// `F^ε = (0, 0, ε∂_z p^h)(x_h, εx₃)` for a 2.5-D state, on `grid3`
/// (Real space). Zero when the 2.5-D grid has a single slice.
pub fn forcing_onto<T: Real>(state: &SliceStackState<T>, grid3: &Grid<T>, eps: T) -> Result<VectorField<T>> {
    let mut f3 = if state.grid().n_v() < 2 {
        commensurate_stride(state.grid(), grid3, eps)?;
        ScalarField::zeros(grid3, Space::Real)
    } else {
        let (_, dz) = pressure_and_dz(state)?;
        lift_scalar(&dz, grid3, eps)?
    };
    f3.scale(eps);
    VectorField::new(vec![
        ScalarField::zeros(grid3, Space::Real),
        ScalarField::zeros(grid3, Space::Real),
        f3,
    ])
}

/// `F^ε` at a stored sample time of `traj`.
pub fn forcing_f_eps<T: Real>(traj: &Trajectory<T>, eps: T, t: T) -> Result<VectorField<T>> {
    let s = traj.state_at(t)?;
    forcing_onto(s, &slow_grid(s.grid(), eps)?, eps)
}
