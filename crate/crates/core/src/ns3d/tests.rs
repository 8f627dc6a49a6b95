use std::f64::consts::PI;

use rustfft::num_complex::Complex;

use super::*;
use crate::ns25d::{self, RunOptions, SliceStackState};
use crate::spectral::{div_check, leray_3d, Grid, GridSpec, ScalarField, Space, VectorField};

fn grid25(n_h: usize, n_v: usize) -> Grid<f64> {
    Grid::new(GridSpec::periodic(n_h, n_v)).unwrap()
}

fn max_diff(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
    let (a, b) = (a.real_values(), b.real_values());
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn vec_diff(a: &VectorField<f64>, b: &VectorField<f64>) -> f64 {
    let mut d = a.to_space(Space::Real);
    d.add_scaled(-1.0, b).unwrap();
    d.l2_norm()
}

/// Taylor–Green velocity times a vertical profile, as vorticity.
fn tg_profile(g: &Grid<f64>, eps: f64, amp: f64, profile: fn(f64) -> f64) -> SliceStackState<f64> {
    let w = ScalarField::from_fn(g, |x, y, z| -2.0 * amp * x.cos() * y.cos() * profile(z));
    SliceStackState::new(w, eps, 0.0).unwrap()
}

#[test]
fn lift_examples() {
    let g = grid25(16, 8);
    let s = tg_profile(&g, 0.5, 1.0, |_| 1.0);
    let u = lift_initial_data(&s, 0.5).unwrap();
    assert!((u.grid().l_v() - 4.0 * PI).abs() < 1e-12);
    let expect = ScalarField::from_fn(u.grid(), |x, y, _| x.cos() * y.sin());
    assert!(max_diff(u.u.component(0), &expect) < 1e-13);
    assert_eq!(u.u.component(2).linf_norm(), 0.0);

    let s = tg_profile(&g, 0.25, 1.0, f64::sin);
    let u = lift_initial_data(&s, 0.25).unwrap();
    assert!((u.grid().l_v() - 8.0 * PI).abs() < 1e-12);
    let expect = ScalarField::from_fn(u.grid(), |x, y, x3| x.cos() * y.sin() * (x3 / 4.0).sin());
    assert!(max_diff(u.u.component(0), &expect) < 1e-13);
    assert!(div_check(&u.u).unwrap() < 1e-12);

    let z = lift_initial_data(&SliceStackState::zeros(&g, 0.25), 0.25).unwrap();
    assert_eq!(z.u.linf_norm(), 0.0);
}

#[test]
fn lift_rejects_incommensurate_grids() {
    let g = grid25(16, 8);
    let s = tg_profile(&g, 0.5, 1.0, f64::sin);
    let wrong_period = Grid::new(GridSpec::new(16, 8, 2.0 * PI, 3.0 * PI)).unwrap();
    let err = lift_onto(&s, &wrong_period, 0.5).unwrap_err();
    assert!(err.to_string().starts_with("slow-variable grids incommensurate"));
    let finer = Grid::new(GridSpec::new(16, 16, 2.0 * PI, 4.0 * PI)).unwrap();
    assert!(lift_onto(&s, &finer, 0.5).is_err());
    // a coarser 3-D grid subsamples exactly
    let coarser = Grid::new(GridSpec::new(16, 4, 2.0 * PI, 4.0 * PI)).unwrap();
    let u = lift_onto(&s, &coarser, 0.5).unwrap();
    let expect = ScalarField::from_fn(&coarser, |x, y, x3| x.cos() * y.sin() * (x3 / 2.0).sin());
    assert!(max_diff(u.u.component(0), &expect) < 1e-13);
    assert!(slow_grid(&g, 0.0).is_err());
}

#[test]
fn u_app_and_forcing_need_sampled_times() {
    let g = grid25(16, 8);
    let s0 = tg_profile(&g, 0.5, 1.0, f64::sin);
    let mut opts = RunOptions::new(0.1, 0.01);
    opts.sample_every = 5;
    let traj = ns25d::run(&s0, &opts).unwrap();
    let a = build_u_app(&traj, 0.5, 0.05).unwrap();
    let direct = lift_initial_data(traj.state_at(0.05).unwrap(), 0.5).unwrap();
    assert_eq!(vec_diff(&a.u, &direct.u), 0.0);
    assert!(a.u.l2_norm() > 0.0);
    assert!(matches!(build_u_app(&traj, 0.5, 0.03), Err(crate::Error::NotSampled { .. })));
    assert!(forcing_f_eps(&traj, 0.5, 0.03).is_err());
}

#[test]
fn forcing_vanishes_for_z_independent_and_shear_data() {
    let g = grid25(16, 8);
    let s0 = tg_profile(&g, 0.5, 1.0, |_| 1.0);
    let traj = ns25d::run(&s0, &RunOptions::new(0.02, 0.01)).unwrap();
    for t in [0.0, 0.02] {
        assert!(forcing_f_eps(&traj, 0.5, t).unwrap().linf_norm() < 1e-13);
    }
    let w = ScalarField::from_fn(&g, |_, y, z| -y.cos() * z.cos());
    let shear = SliceStackState::new(w, 0.5, 0.0).unwrap();
    let traj = ns25d::run(&shear, &RunOptions::new(0.02, 0.01)).unwrap();
    assert!(forcing_f_eps(&traj, 0.5, 0.02).unwrap().linf_norm() < 1e-13);
}

/// Direct (non-FFT) evaluation of `2Σ(−Δ_h)^{-1}∂_j∂_k(u^j ∂_z u^k)` on one
/// slice from point values, by explicit DFT sums and per-mode division.
fn dz_pressure_bruteforce(u: [&[f64]; 2], v: [&[f64]; 2], n: usize) -> Vec<f64> {
    let x = |i: usize| 2.0 * PI * i as f64 / n as f64;
    let m = |i: usize| if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
    let dft = |f: &dyn Fn(usize) -> f64| -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); n * n];
        for q2 in 0..n {
            for q1 in 0..n {
                let mut acc = Complex::new(0.0, 0.0);
                for i2 in 0..n {
                    for i1 in 0..n {
                        let ph = -(m(q1) * x(i1) + m(q2) * x(i2));
                        acc += Complex::from_polar(f(i1 + n * i2), ph);
                    }
                }
                out[q1 + n * q2] = acc / (n * n) as f64;
            }
        }
        out
    };
    let mut hat = vec![Complex::new(0.0, 0.0); n * n];
    for j in 0..2 {
        for k in 0..2 {
            let prod = dft(&|i| u[j][i] * v[k][i]);
            for q2 in 0..n {
                for q1 in 0..n {
                    let xi = [m(q1), m(q2)];
                    let k2 = xi[0] * xi[0] + xi[1] * xi[1];
                    if k2 == 0.0 || q1 == n / 2 || q2 == n / 2 {
                        continue;
                    }
                    hat[q1 + n * q2] += prod[q1 + n * q2] * (-2.0 * xi[j] * xi[k] / k2);
                }
            }
        }
    }
    (0..n * n)
        .map(|i| {
            let (i1, i2) = (i % n, i / n);
            let mut acc = 0.0;
            for q2 in 0..n {
                for q1 in 0..n {
                    acc += (hat[q1 + n * q2] * Complex::from_polar(1.0, m(q1) * x(i1) + m(q2) * x(i2))).re;
                }
            }
            acc
        })
        .collect()
}

#[test]
fn forcing_matches_bruteforce_convolution() {
    let n = 16;
    let g = grid25(n, 16);
    let eps = 0.5;
    let s0 = tg_profile(&g, eps, 1.0, f64::sin);
    let traj = ns25d::run(&s0, &RunOptions::new(0.01, 0.01)).unwrap();
    let f = forcing_f_eps(&traj, eps, 0.0).unwrap();
    let f3 = f.component(2).real_values();
    assert!(f.component(0).linf_norm() == 0.0 && f.component(1).linf_norm() == 0.0);

    let s = n * n;
    let l_v3 = 2.0 * PI / eps;
    for j in [1usize, 3, 6] {
        let z = eps * l_v3 * j as f64 / 16.0;
        let pts = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
            (0..s)
                .map(|i| f(2.0 * PI * (i % n) as f64 / n as f64, 2.0 * PI * (i / n) as f64 / n as f64))
                .collect()
        };
        let u1 = pts(&|x, y| x.cos() * y.sin() * z.sin());
        let u2 = pts(&|x, y| -x.sin() * y.cos() * z.sin());
        let v1 = pts(&|x, y| x.cos() * y.sin() * z.cos());
        let v2 = pts(&|x, y| -x.sin() * y.cos() * z.cos());
        let oracle = dz_pressure_bruteforce([&u1, &u2], [&v1, &v2], n);
        // closed form: ∂_z p = 2 g g' p_TG with p_TG = −(cos 2x₁ + cos 2x₂)/4
        let closed = pts(&|x, y| -z.sin() * z.cos() * ((2.0 * x).cos() + (2.0 * y).cos()) / 2.0);
        for i in 0..s {
            assert!((oracle[i] - closed[i]).abs() < 1e-12);
            assert!((f3[j * s + i] - eps * oracle[i]).abs() < 1e-12, "slice {j} point {i}");
        }
    }
}

#[test]
fn step3d_zero_and_shear_decay() {
    let g3: Grid<f64> = Grid::new(GridSpec::new(16, 16, 2.0 * PI, 8.0 * PI)).unwrap();
    let z = State3D::zeros(&g3, 0.25);
    assert_eq!(step3d(&z, 0.01, None, None).unwrap().u.linf_norm(), 0.0);

    let k = 2.0 * PI / (8.0 * PI);
    let u = VectorField::new(vec![
        ScalarField::from_fn(&g3, |_, _, x3| (k * x3).sin()),
        ScalarField::zeros(&g3, Space::Real),
        ScalarField::zeros(&g3, Space::Real),
    ])
    .unwrap();
    let mut s = State3D { u, t: 0.0, eps: 0.25 };
    let solver = Ns3d::new(&g3, 0.05).unwrap();
    for _ in 0..20 {
        s = solver.step(&s, &Background::none()).unwrap();
    }
    let expect = ScalarField::from_fn(&g3, |_, _, x3| (-k * k).exp() * (k * x3).sin());
    assert!(max_diff(s.u.component(0), &expect) < 1e-13);
    assert!((s.t - 1.0).abs() < 1e-12);
}

#[test]
fn step3d_forced_first_step_is_duhamel() {
    let g = grid25(16, 16);
    let eps = 0.5;
    let s0 = tg_profile(&g, eps, 1.0, f64::sin);
    let grid3 = slow_grid(&g, eps).unwrap();
    let f = forcing_onto(&s0, &grid3, eps).unwrap();
    let pf = leray_3d(&f).unwrap();
    let r0 = State3D::zeros(&grid3, eps);
    let mut errs = Vec::new();
    for dt in [1e-3, 5e-4] {
        let r = step3d(&r0, dt, None, Some(&f)).unwrap();
        let mut expect = pf.clone();
        expect.scale(dt);
        errs.push(vec_diff(&r.u, &expect) / expect.l2_norm());
        assert!(div_check(&r.u).unwrap() < 1e-10);
    }
    assert!(errs[0] < 1e-2, "{errs:?}");
    // O(dt²) defect: halving dt halves the relative error
    assert!((errs[0] / errs[1] - 2.0).abs() < 0.1, "{errs:?}");
}

#[test]
fn step3d_is_divergence_free_and_dissipative() {
    let g3: Grid<f64> = Grid::new(GridSpec::new(16, 16, 2.0 * PI, 4.0 * PI)).unwrap();
    let raw = VectorField::new(vec![
        ScalarField::from_fn(&g3, |x, y, z| (x + 0.5 * z).sin() * y.cos() + 0.3 * (2.0 * y).cos()),
        ScalarField::from_fn(&g3, |x, y, z| (y - z).cos() * (2.0 * x).sin()),
        ScalarField::from_fn(&g3, |x, y, z| (x + y).cos() * (0.5 * z).sin()),
    ])
    .unwrap();
    let mut s = State3D { u: leray_3d(&raw).unwrap(), t: 0.0, eps: 0.5 };
    let solver = Ns3d::new(&g3, 0.01).unwrap();
    let mut e = s.u.l2_norm().powi(2);
    for _ in 0..10 {
        s = solver.step(&s, &Background::none()).unwrap();
        s.check_invariants().unwrap();
        let e1 = s.u.l2_norm().powi(2);
        assert!(e1 <= e + 2.0 * 0.01 * 1e-10);
        e = e1;
    }
}

#[test]
fn remainder_vanishes_for_z_independent_data() {
    let g = grid25(16, 8);
    let w = ScalarField::from_fn(&g, |x, y, _| -2.0 * x.cos() * y.cos() + 0.5 * (x + 2.0 * y).sin());
    let s0 = SliceStackState::new(w, 0.25, 0.0).unwrap();
    let mut src = MarchingSource::new(s0, 0.05).unwrap();
    let opts = RemainderOptions { run: RunOptions::new(1.0, 0.05), mode: BackgroundMode::Frozen };
    let run = run_remainder(&mut src, 0.25, &opts).unwrap();
    assert!(run.sup_h_half() <= 1e-10);
    assert!(run.force_norm() <= 1e-10);
}

#[test]
fn remainder_matches_full_3d_run() {
    let n = 16;
    let g = grid25(n, 16);
    let eps = 0.25;
    let dt = 0.01;
    let t_end = 0.5;
    let s0 = tg_profile(&g, eps, 1.0, f64::sin);

    let mut opts25 = RunOptions::new(t_end, dt / 2.0);
    opts25.store_states = true;
    let mut traj25 = ns25d::run(&s0, &opts25).unwrap();
    let mut ropts = RemainderOptions { run: RunOptions::new(t_end, dt), mode: BackgroundMode::Stages };
    ropts.run.sample_every = 50;
    let rem = run_remainder(&mut traj25, eps, &ropts).unwrap();
    let r = rem.state_at(t_end).unwrap();

    let ic = lift_initial_data(&s0, eps).unwrap();
    let mut o3 = RunOptions::new(t_end, dt);
    o3.sample_every = 50;
    let full = run3d(&ic, &o3).unwrap();
    let mut diff = full.state_at(t_end).unwrap().u.to_space(Space::Real);
    diff.add_scaled(-1.0, &build_u_app(&traj25, eps, t_end).unwrap().u).unwrap();

    let rel = vec_diff(&r.u, &diff) / r.u.l2_norm();
    assert!(r.u.l2_norm() > 1e-4);
    assert!(rel < 1e-5, "two-route mismatch {rel:e}");

    // the marching source reproduces the stored-trajectory route
    let mut src = MarchingSource::new(s0, dt / 2.0).unwrap();
    let rem2 = run_remainder(&mut src, eps, &ropts).unwrap();
    let d = vec_diff(&rem2.state_at(t_end).unwrap().u, &r.u) / r.u.l2_norm();
    assert!(d < 1e-12, "{d:e}");
}
