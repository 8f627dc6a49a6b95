use std::sync::atomic::{AtomicBool, Ordering};

use log::{debug, warn};
use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::{cst, to_f64, Real};
use crate::spectral::{Grid, ScalarField, SliceWork, Space};

use super::energy::SliceLedger;
use super::state::{Sample, SliceStackState, Trajectory};

type C<T> = Complex<T>;

/// Horizontal multiplier tables shared by the per-slice kernels.
pub(crate) struct HTables<T: Real> {
    /// Derivative wavenumbers (Nyquist dropped) per horizontal index.
    pub(crate) kx: Vec<T>,
    pub(crate) ky: Vec<T>,
    /// `1/|k_h|²`, zero on the mean mode.
    pub(crate) inv_k2: Vec<T>,
    pub(crate) kh2: Vec<T>,
    pub(crate) keep: Vec<bool>,
}

impl<T: Real> HTables<T> {
    pub(crate) fn new(grid: &Grid<T>) -> Self {
        let n = grid.n_h();
        let kd = grid.kh_deriv();
        let keep = grid.keep_h();
        let s = n * n;
        let mut t = HTables {
            kx: Vec::with_capacity(s),
            ky: Vec::with_capacity(s),
            inv_k2: Vec::with_capacity(s),
            kh2: Vec::with_capacity(s),
            keep: Vec::with_capacity(s),
        };
        for h in 0..s {
            let (i1, i2) = (h % n, h / n);
            let k2 = grid.kh2(i1, i2);
            t.kx.push(kd[i1]);
            t.ky.push(kd[i2]);
            t.kh2.push(k2);
            t.inv_k2.push(if k2 == T::zero() { T::zero() } else { k2.recip() });
            t.keep.push(keep[i1] && keep[i2]);
        }
        t
    }

    /// `|û|²/|ω̂|²` for the Biot–Savart velocity.
    #[inline]
    pub(crate) fn velocity_weight(&self, h: usize) -> T {
        let kap2 = self.kx[h] * self.kx[h] + self.ky[h] * self.ky[h];
        kap2 * self.inv_k2[h] * self.inv_k2[h]
    }

    /// Spectrum of `u¹ + i u²` for a vorticity spectrum.
    #[inline]
    pub(crate) fn packed_velocity(&self, h: usize, w: C<T>) -> C<T> {
        w * C::new(self.kx[h], self.ky[h]) * self.inv_k2[h]
    }
}

/// Per-slice buffers for the pseudospectral products.
pub(crate) struct SliceBuf<T: Real> {
    pub(crate) work: SliceWork<T>,
    pub(crate) a: Vec<C<T>>,
    pub(crate) b: Vec<C<T>>,
}

impl<T: Real> SliceBuf<T> {
    pub(crate) fn new(grid: &Grid<T>) -> Self {
        SliceBuf {
            work: SliceWork::new(grid),
            a: vec![C::default(); grid.slice_len()],
            b: vec![C::default(); grid.slice_len()],
        }
    }
}

/// Number of per-slice rates tracked by the energy ledger.
pub(crate) const RATES: usize = 6;

/// Integrating-factor RK4 integrator for the 2.5-D vorticity equation
/// `∂_t ω + u·∇_h ω = Δ_ε ω`, `u = ∇_h^⊥Δ_h^{-1}ω`.
///
/// The vertical operator is the square of the spectral first derivative, so
/// slice identities and their vertical sums hold exactly at the discrete
/// level.
pub struct Ns25d<T: Real = f64> {
    grid: Grid<T>,
    eps: T,
    dt: T,
    tab: HTables<T>,
    coupled: bool,
    half: Vec<T>,
    kz: Vec<T>,
    cfl_warned: AtomicBool,
}

impl<T: Real> Ns25d<T> {
    pub fn new(grid: &Grid<T>, eps: T, dt: T) -> Result<Self> {
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if !(eps >= T::zero() && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be >= 0, got {eps}")));
        }
        let tab = HTables::new(grid);
        let coupled = eps > T::zero() && grid.n_v() > 1;
        let h = dt * cst(0.5);
        let kz = grid.kv_deriv().to_vec();
        let half = if coupled {
            let e2 = eps * eps;
            let s = grid.slice_len();
            (0..grid.len())
                .map(|idx| {
                    let k = kz[idx / s];
                    (-h * (tab.kh2[idx % s] + e2 * k * k)).exp()
                })
                .collect()
        } else {
            tab.kh2.iter().map(|&k2| (-h * k2).exp()).collect()
        };
        Ok(Ns25d {
            grid: grid.clone(),
            eps,
            dt,
            tab,
            coupled,
            half,
            kz,
            cfl_warned: AtomicBool::new(false),
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn eps(&self) -> T {
        self.eps
    }
    pub fn dt(&self) -> T {
        self.dt
    }

    /// Applies `e^{(dt/2)Δ_ε}` in place to HSpectral data.
    fn propagate(&self, data: &mut [C<T>]) {
        if self.coupled {
            self.grid.fft_v(data, true);
            data.par_iter_mut()
                .zip(self.half.par_iter())
                .for_each(|(c, &e)| *c = *c * e);
            self.grid.fft_v(data, false);
        } else {
            data.par_chunks_mut(self.grid.slice_len()).for_each(|slice| {
                slice.iter_mut().zip(&self.half).for_each(|(c, &e)| *c = *c * e);
            });
        }
    }

    /// `−dealias_h(u·∇_h ω)` and the largest pointwise speed.
    fn nonlinear(&self, w: &[C<T>]) -> (Vec<C<T>>, T) {
        let s = self.grid.slice_len();
        let mut out = vec![C::default(); w.len()];
        let umax2 = out
            .par_chunks_mut(s)
            .zip(w.par_chunks(s))
            .map_init(
                || SliceBuf::new(&self.grid),
                |buf, (o, ws)| self.nonlinear_slice(ws, o, buf),
            )
            .reduce(T::zero, T::max);
        (out, umax2.sqrt())
    }

    fn nonlinear_slice(&self, w: &[C<T>], out: &mut [C<T>], buf: &mut SliceBuf<T>) -> T {
        let t = &self.tab;
        for (h, &wi) in w.iter().enumerate() {
            buf.a[h] = t.packed_velocity(h, wi);
            // ∂₁ω + i∂₂ω
            buf.b[h] = wi * C::new(-t.ky[h], t.kx[h]);
        }
        self.grid.fft_h_slice(&mut buf.a, false, &mut buf.work);
        self.grid.fft_h_slice(&mut buf.b, false, &mut buf.work);
        let mut umax2 = T::zero();
        for h in 0..w.len() {
            let (u, g) = (buf.a[h], buf.b[h]);
            out[h] = C::new(u.re * g.re + u.im * g.im, T::zero());
            umax2 = umax2.max(u.norm_sqr());
        }
        self.grid.fft_h_slice(out, true, &mut buf.work);
        for (h, c) in out.iter_mut().enumerate() {
            *c = if t.keep[h] && h != 0 { -*c } else { C::default() };
        }
        umax2
    }

    /// `ε²∂₃ω` and `ε²∂₃²ω`; `None` when the slices are decoupled.
    fn vertical_derivatives(&self, w: &[C<T>]) -> Option<(Vec<C<T>>, Vec<C<T>>)> {
        if !self.coupled {
            return None;
        }
        let s = self.grid.slice_len();
        let mut spec = w.to_vec();
        self.grid.fft_v(&mut spec, true);
        let mut d1 = spec.clone();
        let mut d2 = spec;
        d1.par_chunks_mut(s)
            .zip(d2.par_chunks_mut(s))
            .enumerate()
            .for_each(|(k, (a, b))| {
                let kz = self.kz[k];
                a.iter_mut().for_each(|c| *c = *c * C::new(T::zero(), kz));
                b.iter_mut().for_each(|c| *c = *c * (-kz * kz));
            });
        self.grid.fft_v(&mut d1, false);
        self.grid.fft_v(&mut d2, false);
        Some((d1, d2))
    }

    /// Per-slice rates, stored as `RATES` blocks of `n_v` values:
    /// `‖∇_h u‖²`, `ε²‖∂₃u‖²`, `ε²(‖∂₃u‖² + ⟨u, ∂₃²u⟩)` and the same for `ω`.
    pub(crate) fn rates(&self, w: &[C<T>]) -> Vec<T> {
        let s = self.grid.slice_len();
        let nv = self.grid.n_v();
        let dz = self.vertical_derivatives(w);
        let area = self.grid.area();
        let e2 = self.eps * self.eps;
        let per: Vec<[T; RATES]> = (0..nv)
            .into_par_iter()
            .map(|k| {
                let t = &self.tab;
                let mut r = [T::zero(); RATES];
                for h in 0..s {
                    let idx = k * s + h;
                    let a = w[idx].norm_sqr();
                    let kap2 = t.kx[h] * t.kx[h] + t.ky[h] * t.ky[h];
                    let wu = t.velocity_weight(h);
                    r[0] = r[0] + kap2 * wu * a;
                    r[3] = r[3] + kap2 * a;
                    if let Some((d1, d2)) = &dz {
                        let d = d1[idx].norm_sqr();
                        let f = d + (w[idx].conj() * d2[idx]).re;
                        r[1] = r[1] + wu * d;
                        r[2] = r[2] + wu * f;
                        r[4] = r[4] + d;
                        r[5] = r[5] + f;
                    }
                }
                for (i, v) in r.iter_mut().enumerate() {
                    *v = *v * area * if matches!(i, 1 | 2 | 4 | 5) { e2 } else { T::one() };
                }
                r
            })
            .collect();
        let mut out = vec![T::zero(); RATES * nv];
        for (k, r) in per.iter().enumerate() {
            for i in 0..RATES {
                out[i * nv + k] = r[i];
            }
        }
        out
    }

    /// Per-slice `‖u‖²_{L²_h}` and `‖ω‖²_{L²_h}`.
    pub(crate) fn slice_energies(&self, w: &[C<T>]) -> (Vec<T>, Vec<T>) {
        let s = self.grid.slice_len();
        let area = self.grid.area();
        w.par_chunks(s)
            .map(|slice| {
                let mut eu = T::zero();
                let mut ew = T::zero();
                for (h, c) in slice.iter().enumerate() {
                    let a = c.norm_sqr();
                    eu = eu + self.tab.velocity_weight(h) * a;
                    ew = ew + a;
                }
                (eu * area, ew * area)
            })
            .unzip()
    }

    /// `Δ_ε ω` on HSpectral data.
    fn linear(&self, w: &[C<T>]) -> Vec<C<T>> {
        let s = self.grid.slice_len();
        let mut out: Vec<C<T>> = w
            .iter()
            .enumerate()
            .map(|(idx, &c)| c * (-self.tab.kh2[idx % s]))
            .collect();
        if let Some((_, d2)) = self.vertical_derivatives(w) {
            let e2 = self.eps * self.eps;
            out.iter_mut().zip(d2).for_each(|(o, d)| *o = *o + d * e2);
        }
        out
    }

    /// Right-hand side `−dealias_h(u·∇_h ω) + Δ_ε ω` (HSpectral).
    pub fn rhs(&self, state: &SliceStackState<T>) -> Result<ScalarField<T>> {
        let w = self.prepare(state)?;
        let (mut n, _) = self.nonlinear(w.data());
        let lin = self.linear(w.data());
        n.iter_mut().zip(lin).for_each(|(a, b)| *a = *a + b);
        ScalarField::from_data(&self.grid, Space::HSpectral, n)
    }

    fn prepare(&self, state: &SliceStackState<T>) -> Result<ScalarField<T>> {
        if state.grid() != &self.grid {
            return Err(Error::Shape("state grid differs from solver grid".into()));
        }
        Ok(state.omega.to_space(Space::HSpectral))
    }

    /// One IF-RK4 step on raw HSpectral data starting at time `t`. When
    /// `acc` is given, the per-slice rates are integrated with the RK4
    /// weights and added to it.
    pub(crate) fn step_raw(&self, w: &[C<T>], t: T, acc: Option<&mut [T]>) -> Result<Vec<C<T>>> {
        let dt = self.dt;
        let h = dt * cst(0.5);
        let axpy = |y: &mut [C<T>], a: T, x: &[C<T>]| {
            y.par_iter_mut().zip(x.par_iter()).for_each(|(y, &x)| *y = *y + x * a);
        };

        let (k1, umax) = self.nonlinear(w);
        self.check_cfl(umax, t);
        let mut a = w.to_vec();
        axpy(&mut a, h, &k1);
        self.propagate(&mut a);
        let (k2, _) = self.nonlinear(&a);

        let mut ew = w.to_vec();
        self.propagate(&mut ew);
        let mut b = ew.clone();
        axpy(&mut b, h, &k2);
        let (k3, _) = self.nonlinear(&b);

        let mut c = ew;
        axpy(&mut c, dt, &k3);
        self.propagate(&mut c);
        let (k4, _) = self.nonlinear(&c);

        if let Some(acc) = acc {
            let (q1, q2, q3, q4) = (self.rates(w), self.rates(&a), self.rates(&b), self.rates(&c));
            let sixth = dt / cst(6.0);
            for i in 0..acc.len() {
                acc[i] = acc[i] + sixth * (q1[i] + cst::<T>(2.0) * (q2[i] + q3[i]) + q4[i]);
            }
        }

        let mut out = w.to_vec();
        axpy(&mut out, dt / cst(6.0), &k1);
        self.propagate(&mut out);
        axpy(&mut out, dt / cst(3.0), &k2);
        axpy(&mut out, dt / cst(3.0), &k3);
        self.propagate(&mut out);
        axpy(&mut out, dt / cst(6.0), &k4);

        if out.par_iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Diverged { t: to_f64(t + dt) });
        }
        for slice in out.chunks_mut(self.grid.slice_len()) {
            slice[0] = C::default();
        }
        Ok(out)
    }

    fn check_cfl(&self, umax: T, t: T) {
        let dx = self.grid.l_h() / cst(self.grid.n_h() as f64);
        if umax > T::zero() && self.dt > cst::<T>(0.5) * dx / umax && !self.cfl_warned.swap(true, Ordering::Relaxed) {
            warn!(
                "dt = {} exceeds the advisory CFL bound {:.3e} at t = {}",
                self.dt,
                to_f64(cst::<T>(0.5) * dx / umax),
                t
            );
        }
    }

    /// Advances `state` by one step.
    pub fn step(&self, state: &SliceStackState<T>) -> Result<SliceStackState<T>> {
        let w = self.prepare(state)?;
        let out = self.step_raw(w.data(), state.t, None)?;
        Ok(SliceStackState {
            omega: ScalarField::from_data(&self.grid, Space::HSpectral, out)?,
            eps: self.eps,
            t: state.t + self.dt,
        })
    }
}

/// Right-hand side of the vorticity equation for `state`.
pub fn rhs<T: Real>(state: &SliceStackState<T>) -> Result<ScalarField<T>> {
    Ns25d::new(state.grid(), state.eps, T::one())?.rhs(state)
}

/// One IF-RK4 step of size `dt`.
pub fn step<T: Real>(state: &SliceStackState<T>, dt: T) -> Result<SliceStackState<T>> {
    Ns25d::new(state.grid(), state.eps, dt)?.step(state)
}

/// What a 2.5-D run records.
#[derive(Clone, Debug)]
pub struct RunOptions<T> {
    pub t_end: T,
    pub dt: T,
    /// Record every `sample_every`-th step; the final step is always recorded.
    pub sample_every: usize,
    pub store_states: bool,
    pub track_energy: bool,
}

impl<T: Real> RunOptions<T> {
    pub fn new(t_end: T, dt: T) -> Self {
        RunOptions {
            t_end,
            dt,
            sample_every: 1,
            store_states: true,
            track_energy: false,
        }
    }

    /// Step count and the step size that divides `t_end` exactly.
    pub fn steps(&self) -> Result<(usize, T)> {
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidArgument("sample_every must be >= 1".into()));
        }
        let n = (to_f64(self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize;
        let dt = self.t_end / cst(n as f64);
        if (to_f64(dt) - to_f64(self.dt)).abs() > 1e-12 * to_f64(self.dt) {
            debug!("dt adjusted from {} to {} to land on t_end", self.dt, dt);
        }
        Ok((n, dt))
    }
}

/// Integrates from `ic` to `ic.t + t_end`.
pub fn run<T: Real>(ic: &SliceStackState<T>, opts: &RunOptions<T>) -> Result<Trajectory<T>> {
    run_with(ic, opts, |_, _| Ok(()))
}

/// Like [`run`], calling `on_sample` for every recorded sample together with
/// the state at that time (available even when states are not stored).
pub fn run_with<T: Real>(
    ic: &SliceStackState<T>,
    opts: &RunOptions<T>,
    mut on_sample: impl FnMut(&Sample<T>, &SliceStackState<T>) -> Result<()>,
) -> Result<Trajectory<T>> {
    let (n, dt) = opts.steps()?;
    ic.check_invariants()?;
    let solver = Ns25d::new(ic.grid(), ic.eps, dt)?;
    let grid = ic.grid().clone();
    let nv = grid.n_v();
    let mut traj = Trajectory::new(&grid, ic.eps, dt);
    let mut w = ic.omega.to_space(Space::HSpectral).into_data();
    let mut acc = vec![T::zero(); RATES * nv];

    let record = |k: usize, w: &[C<T>], acc: &[T], traj: &mut Trajectory<T>| -> Result<(Sample<T>, SliceStackState<T>)> {
        let t = ic.t + dt * cst(k as f64);
        let state = SliceStackState {
            omega: ScalarField::from_data(&grid, Space::HSpectral, w.to_vec())?,
            eps: ic.eps,
            t,
        };
        state.check_invariants().map_err(|e| e.at("2.5-D run", to_f64(t)))?;
        let ledger = opts.track_energy.then(|| {
            let (u2, w2) = solver.slice_energies(w);
            SliceLedger::from_parts(u2, w2, acc, nv)
        });
        let sample = Sample {
            step: k,
            t,
            state: opts.store_states.then(|| state.clone()),
            ledger,
        };
        traj.push(sample.clone())?;
        Ok((sample, state))
    };

    let (s0, st0) = record(0, &w, &acc, &mut traj)?;
    on_sample(&s0, &st0)?;
    for k in 1..=n {
        let t = ic.t + dt * cst((k - 1) as f64);
        w = solver
            .step_raw(&w, t, opts.track_energy.then_some(&mut acc[..]))
            .map_err(|e| e.at("2.5-D run", to_f64(t)))?;
        if k % opts.sample_every == 0 || k == n {
            let (s, st) = record(k, &w, &acc, &mut traj)?;
            on_sample(&s, &st)?;
        }
    }
    Ok(traj)
}
