use crate::error::{Error, Result};
use crate::ns25d::RunOptions;
use crate::real::{cst, to_f64, Real};

use super::lift::State3D;
use super::solver::{sobolev_sq, Background, Ns3d};

#[derive(Clone, Debug)]
pub struct Sample3D<T: Real = f64> {
    pub step: usize,
    pub t: f64,
    pub state: Option<State3D<T>>,
    /// `½‖u‖²_{L²}`.
    pub energy: f64,
    /// `‖u‖_{Ḣ^{1/2}}`.
    pub h_half: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory3D<T: Real = f64> {
    pub eps: f64,
    pub dt: f64,
    pub samples: Vec<Sample3D<T>>,
    /// State at the last step, kept even when samples store none.
    pub final_state: Option<State3D<T>>,
}

impl<T: Real> Trajectory3D<T> {
    pub fn state_at(&self, t: f64) -> Result<&State3D<T>> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.samples
            .iter()
            .find(|s| (s.t - t).abs() <= tol)
            .and_then(|s| s.state.as_ref())
            .ok_or(Error::NotSampled { t })
    }
}

/// Unforced 3-D Navier–Stokes from `ic`.
pub fn run3d<T: Real>(ic: &State3D<T>, opts: &RunOptions<T>) -> Result<Trajectory3D<T>> {
    let (n, dt) = opts.steps()?;
    ic.check_invariants()?;
    let solver = Ns3d::new(ic.grid(), dt)?;
    let bg = Background::none();
    let mut u = solver.comps_of(ic)?;
    let grid = ic.grid().clone();
    let mut traj = Trajectory3D {
        eps: to_f64(ic.eps),
        dt: to_f64(dt),
        samples: Vec::new(),
        final_state: None,
    };
    let time = |k: usize| ic.t + dt * cst(k as f64);
    let mut record = |k: usize, u: &Vec<Vec<_>>| -> Result<()> {
        let state = if opts.store_states {
            Some(solver.state_of(u.clone(), time(k), ic.eps)?)
        } else {
            None
        };
        traj.samples.push(Sample3D {
            step: k,
            t: to_f64(time(k)),
            state,
            energy: 0.5 * sobolev_sq(&grid, u, 0.0),
            h_half: sobolev_sq(&grid, u, 0.5).sqrt(),
        });
        Ok(())
    };
    record(0, &u)?;
    for k in 0..n {
        let t = time(k);
        u = solver
            .step_raw(&u, [&bg, &bg, &bg], t)
            .map_err(|e| e.at("3-D run", to_f64(t)))?;
        if (k + 1) % opts.sample_every == 0 || k + 1 == n {
            record(k + 1, &u)?;
        }
    }
    traj.final_state = Some(solver.state_of(u, time(n), ic.eps)?);
    Ok(traj)
}
