use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;
use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::{cst, to_f64, Real};
use crate::spectral::{project_3d_in_place, Grid, ScalarField, Space, VectorField};

use super::lift::State3D;

type C<T> = Complex<T>;
pub(crate) type Comps<T> = Vec<Vec<C<T>>>;

pub(crate) fn to_real<T: Real>(grid: &Grid<T>, data: &mut [C<T>]) {
    grid.fft_v(data, false);
    grid.fft_h(data, false);
}

pub(crate) fn to_spectral<T: Real>(grid: &Grid<T>, data: &mut [C<T>]) {
    grid.fft_h(data, true);
    grid.fft_v(data, true);
}

/// `Σ_ξ |ξ|^{2s} |v̂(ξ)|²` times the volume, over all components. The mean
/// mode is skipped for `s ≠ 0`.
pub(crate) fn sobolev_sq<T: Real>(grid: &Grid<T>, comps: &[Vec<C<T>>], s: f64) -> f64 {
    let n = grid.n_h();
    let sl = grid.slice_len();
    let (kh, kv) = (grid.kh(), grid.kv());
    // per-slice partial sums keep the summation order fixed across runs
    let total: f64 = comps
        .iter()
        .flat_map(|c| {
            c.par_chunks(sl)
                .enumerate()
                .map(|(k, slice)| {
                    let z = kv[k];
                    slice
                        .iter()
                        .enumerate()
                        .map(|(h, v)| {
                            let (a, b) = (kh[h % n], kh[h / n]);
                            let k2 = to_f64(a * a + b * b + z * z);
                            let a2 = to_f64(v.norm_sqr());
                            if s == 0.0 {
                                a2
                            } else if k2 == 0.0 {
                                0.0
                            } else {
                                k2.powf(s) * a2
                            }
                        })
                        .sum::<f64>()
                })
                .collect::<Vec<f64>>()
        })
        .sum();
    total * to_f64(grid.volume())
}

/// Background fields for one stage: an advecting field `a` (point values)
/// and a forcing already Leray-projected (spectral).
#[derive(Clone, Debug, Default)]
pub struct Background<T: Real = f64> {
    pub(crate) advect: Option<Vec<Vec<T>>>,
    pub(crate) force: Option<Comps<T>>,
}

impl<T: Real> Background<T> {
    pub fn none() -> Self {
        Background {
            advect: None,
            force: None,
        }
    }

    /// Builds a background from optional 3-component fields on `grid`.
    pub fn new(grid: &Grid<T>, advect: Option<&VectorField<T>>, force: Option<&VectorField<T>>) -> Result<Self> {
        let check = |v: &VectorField<T>| -> Result<()> {
            if v.dim() != 3 || v.grid() != grid {
                return Err(Error::Shape("background field must be 3-component on the solver grid".into()));
            }
            Ok(())
        };
        let advect = match advect {
            Some(a) => {
                check(a)?;
                Some(a.components().iter().map(|c| c.real_values()).collect())
            }
            None => None,
        };
        let force = match force {
            Some(f) => {
                check(f)?;
                let mut comps: Comps<T> = f
                    .to_space(Space::Spectral)
                    .into_components()
                    .into_iter()
                    .map(|c| c.into_data())
                    .collect();
                project_3d_in_place(grid, &mut comps);
                Some(comps)
            }
            None => None,
        };
        Ok(Background { advect, force })
    }
}

/// Integrating-factor RK4 for the Leray-projected 3-D Navier–Stokes system,
/// optionally linearised about a background `a` and forced:
/// `∂_t R = ΔR − ℙ div((R+a)⊗(R+a) − a⊗a) + ℙF`.
pub struct Ns3d<T: Real = f64> {
    grid: Grid<T>,
    dt: T,
    half: Vec<T>,
    keep: Vec<bool>,
    cfl_warned: AtomicBool,
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    PAIRS.iter().position(|&p| p == (i, j)).unwrap()
}

impl<T: Real> Ns3d<T> {
    pub fn new(grid: &Grid<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let n = grid.n_h();
        let s = grid.slice_len();
        let (kh, kv) = (grid.kh(), grid.kv());
        let (kh_keep, kv_keep) = (grid.keep_h(), grid.keep_v());
        let h = dt * cst(0.5);
        let mut half = Vec::with_capacity(grid.len());
        let mut keep = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let hh = idx % s;
            let (i1, i2, i3) = (hh % n, hh / n, idx / s);
            let k2 = kh[i1] * kh[i1] + kh[i2] * kh[i2] + kv[i3] * kv[i3];
            half.push((-h * k2).exp());
            keep.push(kh_keep[i1] && kh_keep[i2] && kv_keep[i3]);
        }
        Ok(Ns3d {
            grid: grid.clone(),
            dt,
            half,
            keep,
            cfl_warned: AtomicBool::new(false),
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn dt(&self) -> T {
        self.dt
    }

    fn propagate(&self, comps: &mut Comps<T>) {
        for c in comps.iter_mut() {
            c.par_iter_mut().zip(self.half.par_iter()).for_each(|(v, &e)| *v = *v * e);
        }
    }

    fn nonlinear(&self, u: &Comps<T>, bg: &Background<T>) -> (Comps<T>, T) {
        let grid = &self.grid;
        let len = grid.len();
        let mut r: Comps<T> = u.clone();
        for c in r.iter_mut() {
            to_real(grid, c);
        }
        let vals: Vec<Vec<T>> = match &bg.advect {
            Some(a) => r
                .iter()
                .zip(a)
                .map(|(c, a)| c.par_iter().zip(a.par_iter()).map(|(c, &a)| c.re + a).collect())
                .collect(),
            None => r.iter().map(|c| c.par_iter().map(|c| c.re).collect()).collect(),
        };
        let umax2 = (0..len)
            .into_par_iter()
            .map(|i| vals[0][i] * vals[0][i] + vals[1][i] * vals[1][i] + vals[2][i] * vals[2][i])
            .reduce(T::zero, T::max);
        let mut prods: Comps<T> = PAIRS
            .par_iter()
            .map(|&(i, j)| {
                let mut p: Vec<C<T>> = (0..len)
                    .map(|k| {
                        let mut v = vals[i][k] * vals[j][k];
                        if let Some(a) = &bg.advect {
                            v = v - a[i][k] * a[j][k];
                        }
                        C::new(v, T::zero())
                    })
                    .collect();
                to_spectral(grid, &mut p);
                p
            })
            .collect();
        let n = grid.n_h();
        let s = grid.slice_len();
        let (kh, kv) = (grid.kh_deriv(), grid.kv_deriv());
        let mut out: Comps<T> = (0..3)
            .map(|i| {
                (0..len)
                    .into_par_iter()
                    .map(|idx| {
                        if !self.keep[idx] {
                            return C::default();
                        }
                        let h = idx % s;
                        let k = [kh[h % n], kh[h / n], kv[idx / s]];
                        let mut acc: C<T> = C::default();
                        for (j, &kj) in k.iter().enumerate() {
                            acc = acc + prods[pair_index(i, j)][idx] * kj;
                        }
                        // −i k_j P_ij
                        C::new(acc.im, -acc.re)
                    })
                    .collect()
            })
            .collect();
        prods.clear();
        project_3d_in_place(grid, &mut out);
        if let Some(f) = &bg.force {
            for (o, f) in out.iter_mut().zip(f) {
                o.par_iter_mut().zip(f.par_iter()).for_each(|(o, &f)| *o = *o + f);
            }
        }
        (out, umax2.sqrt())
    }

    /// One step from `t` with backgrounds at `t`, `t + dt/2` and `t + dt`.
    pub(crate) fn step_raw(&self, u: &Comps<T>, bgs: [&Background<T>; 3], t: T) -> Result<Comps<T>> {
        let dt = self.dt;
        let h = dt * cst(0.5);
        let axpy = |y: &mut Comps<T>, a: T, x: &Comps<T>| {
            for (y, x) in y.iter_mut().zip(x) {
                y.par_iter_mut().zip(x.par_iter()).for_each(|(y, &x)| *y = *y + x * a);
            }
        };
        let (k1, umax) = self.nonlinear(u, bgs[0]);
        self.check_cfl(umax, t);
        let mut a = u.clone();
        axpy(&mut a, h, &k1);
        self.propagate(&mut a);
        let (k2, _) = self.nonlinear(&a, bgs[1]);

        let mut ew = u.clone();
        self.propagate(&mut ew);
        let mut b = ew.clone();
        axpy(&mut b, h, &k2);
        let (k3, _) = self.nonlinear(&b, bgs[1]);

        let mut c = ew;
        axpy(&mut c, dt, &k3);
        self.propagate(&mut c);
        let (k4, _) = self.nonlinear(&c, bgs[2]);

        let mut out = u.clone();
        axpy(&mut out, dt / cst(6.0), &k1);
        self.propagate(&mut out);
        axpy(&mut out, dt / cst(3.0), &k2);
        axpy(&mut out, dt / cst(3.0), &k3);
        self.propagate(&mut out);
        axpy(&mut out, dt / cst(6.0), &k4);

        if out.iter().any(|c| c.par_iter().any(|v| !(v.re.is_finite() && v.im.is_finite()))) {
            return Err(Error::Diverged { t: to_f64(t + dt) });
        }
        Ok(out)
    }

    fn check_cfl(&self, umax: T, t: T) {
        let dx = (self.grid.l_h() / cst(self.grid.n_h() as f64)).min(self.grid.dz());
        let bound = cst::<T>(0.5) * dx / umax;
        if umax > T::zero() && self.dt > bound && !self.cfl_warned.swap(true, Ordering::Relaxed) {
            warn!("dt = {} exceeds the advisory CFL bound {:.3e} at t = {}", self.dt, to_f64(bound), t);
        }
    }

    pub(crate) fn comps_of(&self, state: &State3D<T>) -> Result<Comps<T>> {
        if state.grid() != &self.grid || state.u.dim() != 3 {
            return Err(Error::Shape("state does not match the 3-D solver grid".into()));
        }
        Ok(state
            .u
            .to_space(Space::Spectral)
            .into_components()
            .into_iter()
            .map(|c| c.into_data())
            .collect())
    }

    pub(crate) fn state_of(&self, comps: Comps<T>, t: T, eps: T) -> Result<State3D<T>> {
        let fields = comps
            .into_iter()
            .map(|d| ScalarField::from_data(&self.grid, Space::Spectral, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(State3D {
            u: VectorField::new(fields)?,
            t,
            eps,
        })
    }

    /// One step with the same background at every stage.
    pub fn step(&self, state: &State3D<T>, bg: &Background<T>) -> Result<State3D<T>> {
        let u = self.comps_of(state)?;
        let out = self.step_raw(&u, [bg, bg, bg], state.t)?;
        self.state_of(out, state.t + self.dt, state.eps)
    }
}

/// One IF-RK4 step of size `dt`, optionally linearised about `advect_by`
/// and forced by `force` (both held fixed over the step).
pub fn step3d<T: Real>(
    state: &State3D<T>,
    dt: T,
    advect_by: Option<&VectorField<T>>,
    force: Option<&VectorField<T>>,
) -> Result<State3D<T>> {
    let solver = Ns3d::new(state.grid(), dt)?;
    let bg = Background::new(state.grid(), advect_by, force)?;
    solver.step(state, &bg)
}
