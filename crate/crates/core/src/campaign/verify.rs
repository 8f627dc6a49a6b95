//! The invariant suite: analytic oracles, the energy ledger, maximum
//! principles, projector and semigroup laws, and remainder exactness.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::CampaignSpec;
use super::ic::{make_initial_data, IcSpec, NamedProfile, Profile};
use super::sweep::sweep_entry;
use crate::diagnostics::write_json;
use crate::error::Result;
use crate::ns25d::{energy_ledger, run, run_with, RunOptions, SliceStackState, Trajectory};
use crate::spectral::{
    dealias, derivative, gradient_h, heat_semigroup, leray_3d, leray_h, lowpass, Axis, Grid, GridSpec, HeatKind,
    ScalarField, Space, VectorField,
};

/// Sizes and tolerances of the suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub tg_n_h: usize,
    pub tg_n_v: usize,
    pub tg_dt: f64,
    pub energy_n_h: usize,
    pub energy_n_v: usize,
    pub energy_dt: f64,
    pub t_end: f64,
    pub eps: f64,
    pub seeds: usize,
    pub projector_n_h: usize,
    pub projector_n_v: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tg_n_h: 64,
            tg_n_v: 4,
            tg_dt: 1e-3,
            energy_n_h: 64,
            energy_n_v: 32,
            energy_dt: 5e-3,
            t_end: 1.0,
            eps: 0.25,
            seeds: 100,
            projector_n_h: 32,
            projector_n_v: 8,
            seed: 7,
        }
    }
}

impl VerifyOptions {
    /// A fast variant for smoke tests.
    pub fn quick() -> Self {
        VerifyOptions {
            tg_n_h: 16,
            tg_n_v: 2,
            tg_dt: 1e-2,
            energy_n_h: 16,
            energy_n_v: 8,
            energy_dt: 1e-2,
            t_end: 0.4,
            seeds: 5,
            projector_n_h: 8,
            projector_n_v: 4,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail,
        }
    }

    fn at_least(name: &str, value: f64, threshold: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<Check>,
    pub runtime_s: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn periodic(n_h: usize, n_v: usize) -> Result<Grid<f64>> {
    Grid::new(GridSpec::periodic(n_h, n_v))
}

fn tg_spec(profile: NamedProfile) -> IcSpec {
    IcSpec::TaylorGreen {
        amplitude: 1.0,
        profile: Profile::Named(profile),
    }
}

/// Relative `L²` error of the Taylor–Green run against `ω₀e^{−2t}`, plus the
/// trajectory (states stored at every step) and the wall time.
pub fn taylor_green_error(n_h: usize, n_v: usize, eps: f64, dt: f64, t_end: f64) -> Result<(f64, f64, Trajectory<f64>)> {
    let grid = periodic(n_h, n_v)?;
    let s0 = make_initial_data(&tg_spec(NamedProfile::One), &grid, eps, 0)?;
    let start = Instant::now();
    let mut opts = RunOptions::new(t_end, dt);
    opts.store_states = false;
    opts.track_energy = true;
    let mut last = s0.clone();
    let traj = run_with(&s0, &opts, |_, st| {
        last = st.clone();
        Ok(())
    })?;
    let secs = start.elapsed().as_secs_f64();
    let mut expect = s0.omega.to_space(Space::Real);
    expect.scale((-2.0 * t_end).exp());
    let mut d = last.omega.to_space(Space::Real);
    d.add_scaled(-1.0, &expect)?;
    Ok((d.l2_norm() / expect.l2_norm(), secs, traj))
}

/// Largest relative one-step growth of `‖u^h‖` and `‖ω^h‖` in `L^p_v L²_h`
/// for `p ∈ {2, ∞}`, from the per-slice energies of an energy-tracking
/// trajectory sampled at every step.
pub fn max_principle_growth(traj: &Trajectory<f64>) -> f64 {
    let dz = crate::real::to_f64(traj.grid.dz());
    let norms = |sq: &[f64]| {
        let inf = sq.iter().cloned().fold(0.0, f64::max).sqrt();
        let two = (sq.iter().sum::<f64>() * dz).sqrt();
        [inf, two]
    };
    let mut worst = f64::NEG_INFINITY;
    let mut prev: Option<[f64; 4]> = None;
    for s in traj.samples() {
        let Some(l) = &s.ledger else { continue };
        let [ui, u2] = norms(&l.u2);
        let [wi, w2] = norms(&l.w2);
        let now = [ui, u2, wi, w2];
        if let Some(p) = prev {
            for i in 0..4 {
                if p[i] > 0.0 {
                    worst = worst.max((now[i] - p[i]) / p[i]);
                }
            }
        }
        prev = Some(now);
    }
    worst.max(0.0)
}

/// Random band-limited 2.5-D state used by the energy checks.
pub fn random_state(n_h: usize, n_v: usize, eps: f64, seed: u64) -> Result<SliceStackState<f64>> {
    let grid = periodic(n_h, n_v)?;
    let ic = IcSpec::Random {
        slope: -1.0,
        band: [1.0, 4.0],
        amplitude: 1.0,
        vertical_modes: 3.min((n_v / 2).saturating_sub(1)),
        seed: None,
    };
    make_initial_data(&ic, &grid, eps, seed)
}

/// Largest relative energy-identity residual over `[0, t_end]`.
pub fn energy_residual(s0: &SliceStackState<f64>, dt: f64, t_end: f64) -> Result<(f64, Trajectory<f64>)> {
    let mut opts = RunOptions::new(t_end, dt);
    opts.store_states = false;
    opts.track_energy = true;
    let traj = run(s0, &opts)?;
    Ok((energy_ledger(&traj).max_residual(), traj))
}

fn random_field(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> Result<ScalarField<f64>> {
    let vals: Vec<f64> = (0..grid.len()).map(|_| StandardNormal.sample(rng)).collect();
    Ok(dealias(&ScalarField::from_real(grid, &vals)?))
}

fn rel(a: &VectorField<f64>, b: &VectorField<f64>) -> Result<f64> {
    let mut d = a.to_space(Space::Real);
    d.add_scaled(-1.0, &b.to_space(Space::Real))?;
    let scale = b.l2_norm().max(a.l2_norm());
    Ok(if scale == 0.0 { 0.0 } else { d.l2_norm() / scale })
}

fn rel_s(a: &ScalarField<f64>, b: &ScalarField<f64>) -> Result<f64> {
    rel(&VectorField::new(vec![a.clone()])?, &VectorField::new(vec![b.clone()])?)
}

/// Worst errors over `seeds` random fields: Leray idempotence (horizontal
/// and 3-D), gradient annihilation, Parseval, the semigroup law, and the
/// number of random fields for which a lowpass law failed bit-for-bit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectorErrors {
    pub leray_idempotence: f64,
    pub gradient_annihilation: f64,
    pub parseval: f64,
    pub heat_semigroup: f64,
    pub lowpass_failures: usize,
}

pub fn projector_errors(n_h: usize, n_v: usize, seeds: usize, seed: u64) -> Result<ProjectorErrors> {
    let grid = periodic(n_h, n_v)?;
    let mut e = ProjectorErrors::default();
    for k in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let v3 = VectorField::new((0..3).map(|_| random_field(&grid, &mut rng)).collect::<Result<_>>()?)?;
        let v2 = VectorField::new(v3.components()[..2].to_vec())?;
        let phi = random_field(&grid, &mut rng)?;

        let p3 = leray_3d(&v3)?;
        let p2 = leray_h(&v2)?;
        e.leray_idempotence = e.leray_idempotence.max(rel(&leray_3d(&p3)?, &p3)?).max(rel(&leray_h(&p2)?, &p2)?);

        let g3 = VectorField::new(vec![
            derivative(&phi, Axis::X1)?,
            derivative(&phi, Axis::X2)?,
            derivative(&phi, Axis::X3)?,
        ])?;
        let gh = gradient_h(&phi)?;
        e.gradient_annihilation = e
            .gradient_annihilation
            .max(leray_3d(&g3)?.l2_norm() / g3.l2_norm())
            .max(leray_h(&gh)?.l2_norm() / gh.l2_norm());

        for c in v3.components() {
            let a = c.to_space(Space::Real).l2_norm();
            let b = c.to_space(Space::Spectral).l2_norm();
            let h = c.to_space(Space::HSpectral).l2_norm();
            e.parseval = e.parseval.max((a - b).abs() / a).max((a - h).abs() / a);
        }

        for kind in [HeatKind::Horizontal, HeatKind::Anisotropic(0.3), HeatKind::Full] {
            let (s, t) = (0.05 + 0.1 * (k % 3) as f64, 0.02);
            let two = heat_semigroup(&heat_semigroup(&phi, s, kind)?, t, kind)?;
            let one = heat_semigroup(&phi, s + t, kind)?;
            e.heat_semigroup = e.heat_semigroup.max(rel_s(&two, &one)?);
        }

        let f = phi.to_space(Space::HSpectral);
        let (g, h) = (1.0 + (k % 4) as f64, 2.5);
        let lg = lowpass(&f, g)?;
        let idempotent = lowpass(&lg, g)?.data() == lg.data();
        let nested = lowpass(&lowpass(&f, h)?, g)?.data() == lowpass(&lowpass(&f, g)?, h)?.data()
            && lowpass(&lowpass(&f, h)?, g)?.data() == lowpass(&f, g.min(h))?.data();
        let mut high = f.clone();
        high.add_scaled(-1.0, &lg)?;
        let complement = lowpass(&high, g)?.data().iter().all(|z| z.re == 0.0 && z.im == 0.0);
        let zero = lowpass(&f, 0.0)?.data().iter().enumerate().all(|(i, z)| {
            i % grid.slice_len() == 0 || (z.re == 0.0 && z.im == 0.0)
        });
        if !(idempotent && nested && complement && zero) {
            e.lowpass_failures += 1;
        }
    }
    Ok(e)
}

/// `sup_t ‖R^ε‖_{Ḣ^{1/2}}` for z-independent Taylor–Green data; the lift is
/// an exact 3-D solution, so this is zero up to roundoff.
pub fn remainder_exactness(n_h: usize, n_v: usize, eps: f64, dt: f64, t_end: f64) -> Result<f64> {
    let text = format!(
        r#"
experiment = "remainder_sweep"
eps = {eps}
[grid]
n_h = {n_h}
n_v = {n_v}
[ic]
kind = "taylor_green"
[time]
dt = {dt}
t_end = {t_end}
[sweep]
eps = [{eps}]
"#
    );
    let spec = CampaignSpec::from_toml(&text, &[])?;
    Ok(sweep_entry(&spec, eps)?.0.remainder_sup_h_half.unwrap_or(f64::INFINITY))
}

/// Runs every check of the suite. With `dir`, writes `verify.json`.
pub fn run_verify(opts: &VerifyOptions, dir: Option<&Path>) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut checks = Vec::new();

    let (tg_err, tg_secs, tg_traj) = taylor_green_error(opts.tg_n_h, opts.tg_n_v, opts.eps, opts.tg_dt, opts.t_end)?;
    checks.push(Check::at_most(
        "taylor_green",
        tg_err,
        1e-6,
        format!("relative L2 error at t = {} ({tg_secs:.2} s)", opts.t_end),
    ));

    let s0 = random_state(opts.energy_n_h, opts.energy_n_v, opts.eps, opts.seed)?;
    let (r1, traj1) = energy_residual(&s0, opts.energy_dt, opts.t_end)?;
    let (r2, _) = energy_residual(&s0, 0.5 * opts.energy_dt, opts.t_end)?;
    checks.push(Check::at_most(
        "energy_identity",
        r1,
        1e-6,
        format!("relative residual at dt = {}", opts.energy_dt),
    ));
    checks.push(Check::at_least(
        "energy_order",
        r1 / r2,
        8.0,
        format!("residual ratio under dt halving ({r1:.3e} / {r2:.3e})"),
    ));

    let sep = make_initial_data(&tg_spec(NamedProfile::Sin), &periodic(opts.tg_n_h, opts.tg_n_v.max(4))?, opts.eps, 0)?;
    let mut sep_opts = RunOptions::new(opts.t_end, opts.tg_dt);
    sep_opts.store_states = false;
    sep_opts.track_energy = true;
    let sep_traj = run(&sep, &sep_opts)?;
    let growth = [&tg_traj, &traj1, &sep_traj].iter().map(|t| max_principle_growth(t)).fold(0.0, f64::max);
    checks.push(Check::at_most(
        "maximum_principle",
        growth,
        1e-10,
        "largest relative one-step growth of mixed norms".into(),
    ));

    let p = projector_errors(opts.projector_n_h, opts.projector_n_v, opts.seeds, opts.seed)?;
    checks.push(Check::at_most("leray_idempotence", p.leray_idempotence, 1e-12, format!("{} seeds", opts.seeds)));
    checks.push(Check::at_most("gradient_annihilation", p.gradient_annihilation, 1e-12, format!("{} seeds", opts.seeds)));
    checks.push(Check::at_most("parseval", p.parseval, 1e-12, format!("{} seeds", opts.seeds)));
    checks.push(Check::at_most("heat_semigroup", p.heat_semigroup, 1e-12, format!("{} seeds", opts.seeds)));
    checks.push(Check::at_most(
        "lowpass_laws",
        p.lowpass_failures as f64,
        0.0,
        "fields violating a lowpass law bit-for-bit".into(),
    ));

    let exact = remainder_exactness(16, 4, 0.25, 0.01, 0.2)?;
    checks.push(Check::at_most(
        "remainder_exactness",
        exact,
        1e-10,
        "sup_t |R|_{H^1/2} for z-independent data".into(),
    ));

    let report = VerifyReport {
        options: opts.clone(),
        checks,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
        write_json(dir.join("verify.json"), &report)?;
    }
    Ok(report)
}
