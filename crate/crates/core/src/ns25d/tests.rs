use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::spectral::tests::random_band_limited;
use crate::spectral::{curl_h, derivative, Axis, Grid, GridSpec, ScalarField, Space};

fn grid(n_h: usize, n_v: usize) -> Grid<f64> {
    Grid::new(GridSpec::periodic(n_h, n_v)).unwrap()
}

fn max_diff(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
    let (a, b) = (a.real_values(), b.real_values());
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel_l2(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
    let mut d = a.to_space(Space::Real);
    d.add_scaled(-1.0, b).unwrap();
    d.l2_norm() / b.l2_norm()
}

fn taylor_green(g: &Grid<f64>, eps: f64) -> SliceStackState<f64> {
    let w = ScalarField::from_fn(g, |x, y, _| -2.0 * x.cos() * y.cos());
    SliceStackState::new(w, eps, 0.0).unwrap()
}

fn random_state(g: &Grid<f64>, eps: f64, seed: u64, amp: f64) -> SliceStackState<f64> {
    let mut w = random_band_limited(g, 4, seed).into_space(Space::HSpectral);
    w.zero_slice_means();
    w.scale(amp);
    SliceStackState::new(w, eps, 0.0).unwrap()
}

/// `max_z ‖f(·, z)‖_{L²_h}` and `(∫ ‖f(·, z)‖²_{L²_h} dz)^{1/2}` from slice energies.
fn mixed(slice_sq: &[f64], dz: f64) -> (f64, f64) {
    let inf = slice_sq.iter().cloned().fold(0.0, f64::max).sqrt();
    let two = (slice_sq.iter().sum::<f64>() * dz).sqrt();
    (inf, two)
}

#[test]
fn biot_savart_taylor_green() {
    let g = grid(16, 2);
    let w = ScalarField::from_fn(&g, |x, y, _| -2.0 * x.cos() * y.cos());
    let u = biot_savart(&w).unwrap();
    let u1 = ScalarField::from_fn(&g, |x, y, _| x.cos() * y.sin());
    let u2 = ScalarField::from_fn(&g, |x, y, _| -x.sin() * y.cos());
    assert!(max_diff(u.component(0), &u1) < 1e-13);
    assert!(max_diff(u.component(1), &u2) < 1e-13);
    assert!(rel_l2(&curl_h(&u).unwrap(), &w) < 1e-12);
}

#[test]
fn biot_savart_single_mode_and_zero() {
    let g = grid(16, 2);
    // ψ = Δ^{-1} sin x₂ = −sin x₂, u = (−∂₂ψ, ∂₁ψ) = (cos x₂, 0)
    let u = biot_savart(&ScalarField::from_fn(&g, |_, y, _| y.sin())).unwrap();
    assert!(max_diff(u.component(0), &ScalarField::from_fn(&g, |_, y, _| y.cos())) < 1e-13);
    assert!(u.component(1).linf_norm() < 1e-13);

    let u = biot_savart(&ScalarField::zeros(&g, Space::Real)).unwrap();
    assert_eq!(u.linf_norm(), 0.0);

    let err = biot_savart(&ScalarField::from_fn(&g, |x, _, _| 1.0 + x.sin())).unwrap_err();
    assert!(err.to_string().contains("zero-mean"));
}

#[test]
fn biot_savart_is_divergence_free_and_inverts_curl() {
    let g = grid(32, 4);
    for seed in 0..4 {
        let s = random_state(&g, 0.0, seed, 1.0);
        let u = s.velocity().unwrap();
        assert!(crate::spectral::div_check(&u).unwrap() < 1e-10);
        assert!(rel_l2(&curl_h(&u).unwrap(), &s.omega) < 1e-12);
    }
}

#[test]
fn rhs_examples() {
    let g = grid(16, 8);
    // one horizontal mode: no advection, Δ_ε gives −(1 + ε²)
    let eps = 0.5;
    let w = ScalarField::from_fn(&g, |x, _, z| x.cos() * z.sin());
    let r = rhs(&SliceStackState::new(w.clone(), eps, 0.0).unwrap()).unwrap();
    let mut expect = w.clone();
    expect.scale(-(1.0 + eps * eps));
    assert!(max_diff(&r, &expect) < 1e-12);

    for eps in [0.0, 0.3, 2.0] {
        let s = taylor_green(&g, eps);
        let r = rhs(&s).unwrap();
        let mut expect = s.omega.clone();
        expect.scale(-2.0);
        assert!(max_diff(&r, &expect) < 1e-12);
    }

    let r = rhs(&SliceStackState::zeros(&g, 0.1)).unwrap();
    assert_eq!(r.linf_norm(), 0.0);
}

#[test]
fn rhs_matches_direct_advection() {
    let g = grid(32, 4);
    let s = random_state(&g, 0.0, 11, 1.0);
    let u = s.velocity().unwrap().into_space(Space::Real);
    let wx = derivative(&s.omega, Axis::X1).unwrap().real_values();
    let wy = derivative(&s.omega, Axis::X2).unwrap().real_values();
    let (u1, u2) = (u.component(0).real_values(), u.component(1).real_values());
    let adv: Vec<f64> = (0..g.len()).map(|i| -(u1[i] * wx[i] + u2[i] * wy[i])).collect();
    let adv = crate::spectral::dealias_h(&ScalarField::from_real(&g, &adv).unwrap());
    let lap = {
        let mut a = derivative(&derivative(&s.omega, Axis::X1).unwrap(), Axis::X1).unwrap();
        a.add_scaled(1.0, &derivative(&derivative(&s.omega, Axis::X2).unwrap(), Axis::X2).unwrap())
            .unwrap();
        a
    };
    // band-limited data: the derivative squares equal the Laplacian
    let mut expect = adv;
    expect.add_scaled(1.0, &lap).unwrap();
    assert!(rel_l2(&rhs(&s).unwrap(), &expect) < 1e-12);
}

#[test]
fn step_taylor_green_is_exact_decay() {
    let g = grid(32, 4);
    for eps in [0.0, 0.7] {
        let s0 = taylor_green(&g, eps);
        let s1 = step(&s0, 1e-3).unwrap();
        assert!((s1.t - 1e-3).abs() < 1e-18);
        let mut expect = s0.omega.clone();
        expect.scale((-2e-3f64).exp());
        assert!(rel_l2(&s1.omega, &expect) < 1e-12);
    }
}

#[test]
fn step_matches_vertical_heat_flow() {
    let g = grid(16, 16);
    let eps = 0.5;
    let w = ScalarField::from_fn(&g, |x, _, z| x.cos() * (z.sin() + 0.5 * (2.0 * z).cos()));
    let mut s = SliceStackState::new(w.clone(), eps, 0.0).unwrap();
    let solver = Ns25d::new(&g, eps, 0.01).unwrap();
    for _ in 0..10 {
        s = solver.step(&s).unwrap();
    }
    let expect = crate::spectral::heat_semigroup(&w, 0.1, crate::spectral::HeatKind::Anisotropic(eps)).unwrap();
    assert!(rel_l2(&s.omega, &expect) < 1e-12);
}

#[test]
fn zero_stays_zero() {
    let g = grid(16, 4);
    let traj = run(&SliceStackState::zeros(&g, 0.5), &RunOptions::new(0.1, 0.01)).unwrap();
    assert_eq!(traj.len(), 11);
    for s in traj.samples() {
        assert_eq!(s.state.as_ref().unwrap().omega.linf_norm(), 0.0);
    }
}

#[test]
fn nan_is_reported_as_divergence() {
    let g = grid(16, 2);
    let mut w = ScalarField::from_fn(&g, |x, _, _| x.sin());
    w.data_mut()[5].re = f64::NAN;
    let s = SliceStackState { omega: w.into_space(Space::HSpectral), eps: 0.0, t: 0.0 };
    let err = step(&s, 0.01).unwrap_err();
    assert!(err.is_divergence());
    assert!(err.to_string().contains("diverged (CFL?)"));
}

#[test]
fn run_taylor_green_to_one() {
    let g = grid(64, 1);
    let s0 = taylor_green(&g, 0.0);
    let mut opts = RunOptions::new(1.0, 1e-3);
    opts.sample_every = 100;
    let traj = run(&s0, &opts).unwrap();
    assert_eq!(traj.len(), 11);
    let mut expect = s0.omega.clone();
    expect.scale((-2.0f64).exp());
    let last = traj.state_at(1.0).unwrap();
    assert!(rel_l2(&last.omega, &expect) <= 1e-6);
    assert!(traj.state_at(0.55).is_err());
    assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn energy_ledger_taylor_green() {
    let g = grid(32, 1);
    let s0 = taylor_green(&g, 0.0);
    let mut opts = RunOptions::new(1.0, 1e-3);
    opts.sample_every = 250;
    opts.track_energy = true;
    opts.store_states = false;
    let report = energy_ledger(&run(&s0, &opts).unwrap());
    assert_eq!(report.rows.len(), 5);
    // ½‖u₀‖² = ½·(2π)²·½·2π... computed from the exact field: ‖u₀‖² = 4π²·2π/2 per unit?
    // u₀ = (cos x₁ sin x₂, −sin x₁ cos x₂) on a 2π-periodic slice of height 2π
    let e0 = 0.5 * 2.0 * (PI * PI) * (2.0 * PI);
    let last = report.rows.last().unwrap();
    assert!((last.energy - e0 * (-4.0f64).exp()).abs() < 1e-9 * e0);
    assert!((last.dissipation - e0 * (1.0 - (-4.0f64).exp())).abs() < 1e-9 * e0);
    assert!(report.max_residual() <= 1e-6);
    assert!(report.max_slice_residual() <= 1e-6);

    let z = energy_ledger(&run(&SliceStackState::zeros(&g, 0.0), &opts).unwrap());
    assert_eq!(z.max_residual(), 0.0);
}

#[test]
fn energy_ledger_random_data() {
    let g = grid(64, 8);
    let s0 = random_state(&g, 0.6, 3, 2.0);
    let mut opts = RunOptions::new(0.5, 1e-3);
    opts.sample_every = 100;
    opts.track_energy = true;
    opts.store_states = false;
    let report = energy_ledger(&run(&s0, &opts).unwrap());
    assert!(report.max_residual() <= 1e-6, "{}", report.max_residual());
    assert!(report.max_slice_residual() <= 1e-6, "{}", report.max_slice_residual());
    // the vertical flux is active
    assert!(report.rows.last().unwrap().dissipation > 0.0);
}

#[test]
fn energy_residual_converges_at_fourth_order() {
    let g = grid(32, 8);
    let s0 = random_state(&g, 0.8, 5, 6.0);
    let residual = |dt: f64| {
        let mut opts = RunOptions::new(0.4, dt);
        opts.sample_every = usize::MAX;
        opts.track_energy = true;
        opts.store_states = false;
        energy_ledger(&run(&s0, &opts).unwrap()).max_residual()
    };
    let (a, b) = (residual(0.02), residual(0.01));
    assert!(a > 1e-13, "residual too small to measure order: {a:e}");
    assert!(a / b > 8.0, "ratio {}", a / b);
}

#[test]
fn eps_zero_decouples_slices_bit_for_bit() {
    let g = grid(32, 4);
    let flat = grid(32, 1);
    let s0 = random_state(&g, 0.0, 9, 3.0);
    let mut opts = RunOptions::new(0.05, 0.005);
    opts.sample_every = 10;
    let full = run(&s0, &opts).unwrap();
    let end = full.last_state().unwrap().omega.to_space(Space::HSpectral);
    for k in 0..4 {
        let wk = s0.omega.extract_slice(k, &flat).unwrap();
        let one = run(&SliceStackState::new(wk, 0.0, 0.0).unwrap(), &opts).unwrap();
        let got = end.extract_slice(k, &flat).unwrap();
        assert_eq!(one.last_state().unwrap().omega.data(), got.data());
    }
}

#[test]
fn pressure_taylor_green() {
    let g = grid(16, 4);
    let (p, dz) = pressure_and_dz(&taylor_green(&g, 0.5)).unwrap();
    let expect = ScalarField::from_fn(&g, |x, y, _| -((2.0 * x).cos() + (2.0 * y).cos()) / 4.0);
    assert!(max_diff(&p, &expect) < 1e-13);
    assert!(dz.linf_norm() < 1e-13);
    assert!(p.slice_means().iter().all(|m| m.abs() < 1e-15));
}

#[test]
fn pressure_of_shear_and_zero_flow() {
    let g = grid(16, 8);
    // u = (sin x₂ cos z, 0) has ω = −∂₂u¹ = −cos x₂ cos z
    let w = ScalarField::from_fn(&g, |_, y, z| -y.cos() * z.cos());
    let s = SliceStackState::new(w, 0.5, 0.0).unwrap();
    let u = s.velocity().unwrap();
    assert!(max_diff(u.component(0), &ScalarField::from_fn(&g, |_, y, z| y.sin() * z.cos())) < 1e-13);
    let (p, dz) = pressure_and_dz(&s).unwrap();
    assert!(p.linf_norm() < 1e-13 && dz.linf_norm() < 1e-13);

    let (p, dz) = pressure_and_dz(&SliceStackState::zeros(&g, 0.5)).unwrap();
    assert_eq!((p.linf_norm(), dz.linf_norm()), (0.0, 0.0));

    let flat = grid(16, 1);
    assert!(pressure_and_dz(&taylor_green(&flat, 0.0)).is_err());
    assert!(pressure(&taylor_green(&flat, 0.0)).is_ok());
}

#[test]
fn pressure_vertical_derivative_is_consistent() {
    let g = grid(32, 16);
    // smooth in z so the pointwise products are resolved vertically
    let w = ScalarField::from_fn(&g, |x, y, z| {
        -2.0 * x.cos() * y.cos() * (1.0 + 0.5 * z.sin()) + (2.0 * x).sin() * (y + z).cos() * 0.3
            + 0.2 * (x + 2.0 * y).cos() * z.cos()
    });
    let s = SliceStackState::new(w, 0.5, 0.0).unwrap();
    let (p, dz) = pressure_and_dz(&s).unwrap();
    let spectral_dz = derivative(&p, Axis::X3).unwrap();
    assert!(rel_l2(&spectral_dz, &dz) < 1e-8);
}

#[test]
fn resolution_doubling_is_spectrally_converged() {
    let run_at = |n: usize| {
        let g = grid(n, 8);
        let w = ScalarField::from_fn(&g, |x, y, z| {
            0.5 * (-2.0 * x.cos() * y.cos() * (1.0 + z.sin()) + (x - y).sin() * (2.0 * z).cos())
        });
        let s0 = SliceStackState::new(w, 0.5, 0.0).unwrap();
        let mut opts = RunOptions::new(0.2, 0.01);
        opts.sample_every = 5;
        opts.track_energy = true;
        opts.store_states = false;
        let traj = run(&s0, &opts).unwrap();
        traj.samples()
            .iter()
            .map(|s| mixed(&s.ledger.as_ref().unwrap().u2, g.dz().into()).0)
            .collect::<Vec<_>>()
    };
    let (a, b) = (run_at(32), run_at(64));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-8 * y, "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn maximum_principle_for_velocity_and_vorticity(seed in 0u64..1000, eps in 0.0f64..1.5) {
        let g = grid(32, 8);
        let s0 = random_state(&g, eps, seed, 3.0);
        let mut opts = RunOptions::new(0.2, 0.005);
        opts.track_energy = true;
        opts.store_states = false;
        let traj = run(&s0, &opts).unwrap();
        let dz = g.dz();
        let mut prev: Option<[f64; 4]> = None;
        for s in traj.samples() {
            let l = s.ledger.as_ref().unwrap();
            let (ui, u2) = mixed(&l.u2, dz);
            let (wi, w2) = mixed(&l.w2, dz);
            let now = [ui, u2, wi, w2];
            if let Some(p) = prev {
                for i in 0..4 {
                    prop_assert!(now[i] <= p[i] * (1.0 + 1e-10), "norm {} grew: {} -> {}", i, p[i], now[i]);
                }
            }
            prev = Some(now);
        }
    }
}
