use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ns25d::{Ns25d, RunOptions, SliceStackState, Trajectory};
use crate::real::{cst, to_f64, Real};
use crate::spectral::{project_3d_in_place, Grid, Space};

use super::lift::{forcing_onto, lift_onto, slow_grid, State3D};
use super::solver::{sobolev_sq, Background, Comps, Ns3d};

/// Supplies 2.5-D states at the times a remainder solve asks for.
pub trait SliceSource<T: Real> {
    fn slice_state(&mut self, t: T) -> Result<SliceStackState<T>>;
}

/// Exact lookup in a stored trajectory; times that were not sampled are an
/// error.
impl<T: Real> SliceSource<T> for Trajectory<T> {
    fn slice_state(&mut self, t: T) -> Result<SliceStackState<T>> {
        self.state_at(t).cloned()
    }
}

/// Integrates the 2.5-D system alongside the consumer with a fixed substep,
/// so no trajectory has to be stored. Requested times must not decrease.
pub struct MarchingSource<T: Real = f64> {
    solver: Ns25d<T>,
    current: SliceStackState<T>,
    steps: usize,
    t0: T,
}

impl<T: Real> MarchingSource<T> {
    pub fn new(ic: SliceStackState<T>, substep: T) -> Result<Self> {
        ic.check_invariants()?;
        let solver = Ns25d::new(ic.grid(), ic.eps, substep)?;
        let t0 = ic.t;
        Ok(MarchingSource {
            solver,
            current: ic,
            steps: 0,
            t0,
        })
    }
}

impl<T: Real> SliceSource<T> for MarchingSource<T> {
    fn slice_state(&mut self, t: T) -> Result<SliceStackState<T>> {
        let tol = cst::<T>(1e-9) * T::one().max(t.abs());
        if t < self.current.t - tol {
            return Err(Error::NotSampled { t: to_f64(t) });
        }
        while self.current.t < t - tol {
            let mut next = self.solver.step(&self.current)?;
            self.steps += 1;
            // avoid drift from repeated addition
            next.t = self.t0 + self.solver.dt() * cst(self.steps as f64);
            self.current = next;
        }
        if (self.current.t - t).abs() > tol {
            return Err(Error::NotSampled { t: to_f64(t) });
        }
        Ok(self.current.clone())
    }
}

/// How the background `u_app`, `F^ε` enters the RK stages of a remainder step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundMode {
    /// Held at the step's start time for all stages.
    #[default]
    Frozen,
    /// Evaluated at the stage times `t`, `t + dt/2`, `t + dt`.
    Stages,
}

#[derive(Clone, Debug)]
pub struct RemainderOptions<T> {
    pub run: RunOptions<T>,
    pub mode: BackgroundMode,
}

/// Remainder diagnostics at a sample time.
#[derive(Clone, Debug)]
pub struct RemainderSample<T: Real = f64> {
    pub step: usize,
    pub t: f64,
    pub state: Option<State3D<T>>,
    /// `‖R(t)‖_{Ḣ^{1/2}}`.
    pub h_half: f64,
    /// `∫₀ᵗ ‖∇R‖²_{Ḣ^{1/2}}` (trapezoid over steps).
    pub grad_h_half_int: f64,
    /// `‖F^ε(t)‖_{Ḣ^{-1/2}}`.
    pub force_h_minus_half: f64,
    /// `∫₀ᵗ ‖F^ε‖²_{Ḣ^{-1/2}}` (trapezoid over steps).
    pub force_sq_int: f64,
}

#[derive(Clone, Debug)]
pub struct RemainderRun<T: Real = f64> {
    pub eps: f64,
    pub dt: f64,
    pub grid: Grid<T>,
    pub samples: Vec<RemainderSample<T>>,
    /// Remainder at the last step, kept regardless of `store_states`.
    pub final_state: Option<State3D<T>>,
}

impl<T: Real> RemainderRun<T> {
    pub fn sup_h_half(&self) -> f64 {
        self.samples.iter().map(|s| s.h_half).fold(0.0, f64::max)
    }

    /// `‖F^ε‖_{L²_t Ḣ^{-1/2}}` over the run.
    pub fn force_norm(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.force_sq_int.sqrt())
    }

    pub fn grad_h_half_int(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.grad_h_half_int)
    }

    pub fn state_at(&self, t: f64) -> Result<&State3D<T>> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.samples
            .iter()
            .find(|s| (s.t - t).abs() <= tol)
            .and_then(|s| s.state.as_ref())
            .ok_or(Error::NotSampled { t })
    }
}

struct Prepared<T: Real> {
    bg: Background<T>,
    force_sq: f64,
}

fn prepare<T: Real>(s25: &SliceStackState<T>, grid3: &Grid<T>, eps: T) -> Result<Prepared<T>> {
    let a = lift_onto(s25, grid3, eps)?;
    let f = forcing_onto(s25, grid3, eps)?;
    let mut comps: Comps<T> = f
        .into_space(Space::Spectral)
        .into_components()
        .into_iter()
        .map(|c| c.into_data())
        .collect();
    let force_sq = sobolev_sq(grid3, &comps, -0.5);
    project_3d_in_place(grid3, &mut comps);
    // u_app solves the forced 3-D system with +ℙF, so R = u − u_app sees −ℙF
    for c in comps.iter_mut() {
        c.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(Prepared {
        bg: Background {
            advect: Some(a.u.components().iter().map(|c| c.real_values()).collect()),
            force: Some(comps),
        },
        force_sq,
    })
}

/// Solves the remainder system `R(0) = 0` about the lifted 2.5-D solution.
pub fn run_remainder<T: Real>(
    source: &mut impl SliceSource<T>,
    eps: T,
    opts: &RemainderOptions<T>,
) -> Result<RemainderRun<T>> {
    run_remainder_with(source, eps, opts, |_| Ok(()))
}

/// Like [`run_remainder`], calling `on_sample` for each recorded sample.
pub fn run_remainder_with<T: Real>(
    source: &mut impl SliceSource<T>,
    eps: T,
    opts: &RemainderOptions<T>,
    mut on_sample: impl FnMut(&RemainderSample<T>) -> Result<()>,
) -> Result<RemainderRun<T>> {
    let (n, dt) = opts.run.steps()?;
    let t0 = T::zero();
    let first = source.slice_state(t0)?;
    let grid3 = slow_grid(first.grid(), eps)?;
    let solver = Ns3d::new(&grid3, dt)?;
    debug!("remainder solve: eps = {eps}, {n} steps of {dt}, grid {:?}", grid3.spec());

    let h = dt * cst(0.5);
    let time = |k: usize| t0 + dt * cst(k as f64);
    let mut start = prepare(&first, &grid3, eps)?;
    let mut r: Comps<T> = vec![vec![Default::default(); grid3.len()]; 3];
    let mut run = RemainderRun {
        eps: to_f64(eps),
        dt: to_f64(dt),
        grid: grid3.clone(),
        samples: Vec::new(),
        final_state: None,
    };
    let mut grad_int = 0.0;
    let mut force_int = 0.0;
    let mut prev_grad = 0.0;

    let mut record = |k: usize, r: &Comps<T>, force_sq: f64, grad_int: f64, force_int: f64| -> Result<()> {
        let state = if opts.run.store_states {
            Some(solver.state_of(r.clone(), time(k), eps)?)
        } else {
            None
        };
        let sample = RemainderSample {
            step: k,
            t: to_f64(time(k)),
            state,
            h_half: sobolev_sq(&grid3, r, 0.5).sqrt(),
            grad_h_half_int: grad_int,
            force_h_minus_half: force_sq.sqrt(),
            force_sq_int: force_int,
        };
        on_sample(&sample)?;
        run.samples.push(sample);
        Ok(())
    };
    record(0, &r, start.force_sq, 0.0, 0.0)?;

    for k in 0..n {
        let t = time(k);
        let ctx = |e: Error| e.at("remainder solve", to_f64(t));
        let mid = match opts.mode {
            BackgroundMode::Frozen => None,
            BackgroundMode::Stages => {
                let mid_state = source.slice_state(t + h).map_err(ctx)?;
                Some(prepare(&mid_state, &grid3, eps).map_err(ctx)?)
            }
        };
        let end_state = source.slice_state(time(k + 1)).map_err(ctx)?;
        let end = prepare(&end_state, &grid3, eps).map_err(ctx)?;
        r = match &mid {
            None => solver.step_raw(&r, [&start.bg, &start.bg, &start.bg], t),
            Some(mid) => solver.step_raw(&r, [&start.bg, &mid.bg, &end.bg], t),
        }
        .map_err(ctx)?;
        let grad = sobolev_sq(&grid3, &r, 1.5);
        grad_int += 0.5 * to_f64(dt) * (prev_grad + grad);
        force_int += 0.5 * to_f64(dt) * (start.force_sq + end.force_sq);
        prev_grad = grad;
        start = end;
        if (k + 1) % opts.run.sample_every == 0 || k + 1 == n {
            record(k + 1, &r, start.force_sq, grad_int, force_int)?;
        }
    }
    run.final_state = Some(solver.state_of(r, time(n), eps)?);
    Ok(run)
}
