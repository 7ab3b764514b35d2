use nanokit_core::dispersion::{char_function, DimerParams};
use nanokit_core::lattice_sim::*;
use nanokit_core::nanopteron_solver::*;
use nanokit_core::reduced_system::constants;
use nanokit_core::Error;
use num_complex::Complex64 as C;
use std::sync::OnceLock;

const W: f64 = 2.0;

fn profile(eps: f64) -> &'static LatticeProfile {
    static A: OnceLock<LatticeProfile> = OnceLock::new();
    static B: OnceLock<LatticeProfile> = OnceLock::new();
    let cell = if eps == 0.1 { &A } else { &B };
    cell.get_or_init(|| {
        let p = DimerParams::new(W, eps, 1.0).unwrap();
        reconstruct_lattice(&construct(p, constants(W).unwrap(), SolverOptions::default()).unwrap())
    })
}

fn window() -> Vec<f64> {
    (0..200).map(|i| -20.0 + 40.0 * i as f64 / 199.0).collect()
}

/// The `tanh` front alone on both sublattices.
fn core_only(p: &LatticeProfile) -> impl TravelingProfile + '_ {
    let k = p.wave.ctx.homoclinic().k;
    let a = p.core_amplitude();
    FnProfile { x1: move |t: f64| a * (k * t).tanh(), x2: move |t: f64| a * (k * t).tanh(), c_sq: p.c_sq, w: p.w }
}

#[test]
fn linear_chain_mode_oscillates_at_the_dispersion_frequency() {
    // acoustic standing wave y_j = A_j cos(q j): omega^2 = (1+w) - sqrt((1+w)^2 - 4 w sin^2 q)
    let q: f64 = 0.3;
    let om2 = (1.0 + W) - ((1.0 + W).powi(2) - 4.0 * W * q.sin().powi(2)).sqrt();
    let om = om2.sqrt();
    // same root from the characteristic function on the imaginary axis
    assert!(char_function(C::new(0.0, q), om2 / (q * q), W).unwrap().norm() < 1e-12);
    let ratio = (2.0 - om2) / (2.0 * q.cos());
    let n = 400;
    let y: Vec<f64> = (0..n).map(|j| (q * j as f64).cos() * if j % 2 == 1 { 1.0 } else { ratio } * 1e-2).collect();
    let mut s = ChainState::new(y.clone(), vec![0.0; n], W, Boundary::Free).unwrap();
    s.linear = true;
    let dt = 0.005;
    let (_, traj) = integrate(&s, dt, 1000, 1).unwrap();
    let mut worst: f64 = 0.0;
    for site in [199usize, 200, 203] {
        for (t, ys) in traj.times.iter().zip(&traj.y) {
            worst = worst.max((ys[site] - y[site] * (om * t).cos()).abs() / y[site].abs());
        }
    }
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn zero_data_stays_zero() {
    let s = ChainState::at_rest(64, W, Boundary::Sponge { width: 8, strength: 1.0 }).unwrap();
    let (fin, traj) = integrate(&s, 0.01, 500, 50).unwrap();
    assert!(fin.y.iter().chain(&fin.v).all(|v| *v == 0.0));
    assert!(traj.y.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn instability_is_reported() {
    let mut y = vec![0.0; 16];
    y[8] = -3.0;
    let s = ChainState::new(y, vec![0.0; 16], W, Boundary::Free).unwrap();
    assert!(matches!(integrate(&s, 0.01, 100_000, 0), Err(Error::Instability(_))));
}

#[test]
fn hamiltonian_is_conserved() {
    let p = profile(0.1);
    let s = ChainState::from_profile(p, 512, 200, Boundary::Free).unwrap();
    let dt = 0.005;
    let steps = 4000;
    let (fin, _) = integrate(&s, dt, steps, steps).unwrap();
    let (h0, h1) = (s.hamiltonian(), fin.hamiltonian());
    let rate = (h1 - h0).abs() / h0.abs() / (dt * steps as f64);
    assert!(rate < 1e-8, "{rate:e}");
}

#[test]
fn constant_profile_has_zero_residual_and_first_integral() {
    let p = FnProfile { x1: |_| 0.25, x2: |_| 0.25, c_sq: 1.4, w: W };
    assert_eq!(advance_delay_residual(&p, &window()).linf(), 0.0);
    assert_eq!(first_integral(&p, 3.0), 0.0);
}

#[test]
fn core_only_residual_shrinks_at_least_cubically() {
    let (a, b) = (profile(0.1), profile(0.05));
    let ra = advance_delay_residual(&core_only(a), &window()).linf();
    let rb = advance_delay_residual(&core_only(b), &window()).linf();
    let slope = (ra / rb).log2();
    assert!(slope >= 3.0, "slope {slope}: {ra:e} {rb:e}");
}

#[test]
fn constructed_wave_beats_the_bare_front() {
    for eps in [0.1, 0.05] {
        let p = profile(eps);
        let full = advance_delay_residual(p, &window()).linf();
        let bare = advance_delay_residual(&core_only(p), &window()).linf();
        assert!(full < 0.1 * bare, "eps={eps}: {full:e} vs {bare:e}");
    }
}

#[test]
fn corrupted_profile_violates_the_first_integral() {
    let p = profile(0.1);
    let bad = FnProfile { x1: |t: f64| p.x1(t), x2: |t: f64| 1.1 * p.x2(t), c_sq: p.c_sq, w: p.w };
    // largest deviation from the value at the origin over [0, 10/eps]
    let spread = |q: &dyn Fn(f64) -> f64| {
        let f0 = q(0.0);
        (0..=400).map(|k| (q(0.25 * k as f64) - f0).abs()).fold(0.0, f64::max)
    };
    let drift = spread(&|t| first_integral(&bad, t));
    let good = spread(&|t| first_integral(p, t));
    // the linear parts of G cancel between the two integrals, so the far-field
    // shift is only G(0.1 A) + G(-0.1 A) = 0.02 A^2 for front height A
    let a = p.core_amplitude();
    assert!(drift > 0.01 * a * a, "{drift:e} vs {:e}", 0.02 * a * a);
    assert!(good < 0.1 * drift, "{good:e} vs {drift:e}");
}

#[test]
fn wave_propagates_at_its_speed_with_its_ripple_frequency() {
    let p = profile(0.1);
    let c = p.c();
    let s = ChainState::from_profile(p, 2048, 512, Boundary::Sponge { width: 40, strength: 1.0 }).unwrap();
    let (dt, t_end) = (0.005, 100.0);
    let steps = (t_end / dt) as usize;
    let (fin, traj) = integrate(&s, dt, steps, 20).unwrap();
    let speed = (core_position(&fin, 60) - core_position(&s, 60)) / t_end;
    assert!((speed / c - 1.0).abs() < 1e-3, "{speed} vs {c}");
    // core still matches the translated profile
    let mut err: f64 = 0.0;
    for (j, y) in fin.y.iter().enumerate() {
        let tau = j as f64 - 512.0 - c * t_end;
        if tau.abs() < 30.0 {
            let want = if j % 2 == 1 { p.x1(tau) } else { p.x2(tau) };
            err = err.max((y - want).abs());
        }
    }
    assert!(err < 0.05 * p.core_amplitude(), "{err} vs {}", p.core_amplitude());
    // the ripple behind the core oscillates at c (s0 + r~) at a fixed site
    let sig: Vec<f64> = traj.y.iter().map(|y| y[760]).collect();
    let om = dominant_frequency(&sig, 20.0 * dt, 1.0, 3.0);
    let want = c * p.wave.ctx.orbit.omega;
    assert!((om / want - 1.0).abs() < 0.02, "{om} vs {want}");
}
