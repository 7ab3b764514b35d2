use nanokit_core::reduced_system::*;
use nanokit_core::Error;
use num_complex::Complex64 as C;
use proptest::prelude::*;

const W: f64 = 2.0;
const EPS: f64 = 0.1;

fn kc() -> NormalFormConstants {
    constants(W).unwrap()
}

fn state(v: [f64; 6]) -> ReducedState {
    ReducedState { u1: v[0], u2: v[1], u3: v[2], u4: v[3], u5: C::new(v[4], v[5]) }
}

fn close(a: &ReducedState, b: &ReducedState, tol: f64) -> bool {
    (a.u1 - b.u1).abs() < tol && a.sub(b).norm() < tol
}

#[test]
fn constants_for_w2() {
    let k = kc();
    assert!((k.c31 - 3.375).abs() < 1e-14);
    assert!((k.c32 - 6.0).abs() < 1e-14);
    assert!(k.is_dominant());
    assert!((k.decay_rate(EPS) - 0.2598076211353316).abs() < 1e-14);
    assert!(matches!(constants(0.9), Err(Error::InvalidParameter(_))));
}

#[test]
fn homoclinic_values() {
    let h = homoclinic(EPS, &kc());
    assert!((h.h1(0.0) - 0.01125).abs() < 1e-15);
    assert_eq!(h.h2(0.0), 0.0);
    assert!(h.h3(0.0).abs() < 1e-18);
    assert!(h.h1(1e4).abs() < 1e-300 && h.h2(-1e4).abs() < 1e-300);
}

#[test]
fn homoclinic_solves_the_dominant_field() {
    let k = kc();
    let h = homoclinic(EPS, &k);
    for i in 0..50 {
        let tau = -60.0 + 120.0 * i as f64 / 49.0;
        let f = dominant_field(&h.state(tau), EPS, &k);
        assert!(close(&f, &h.derivative(tau), 1e-12), "tau={tau}");
        // and the closed-form derivative agrees with differences
        let d = 1e-3;
        let fd = h.state(tau + d).sub(&h.state(tau - d)).scale(0.5 / d);
        assert!(close(&fd, &h.derivative(tau), 1e-8));
    }
}

#[test]
fn rotation_block() {
    let x = ReducedState { u5: C::new(1.0, 0.0), ..Default::default() };
    let f = dominant_field(&x, EPS, &kc());
    let want = [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, kc().s0), C::new(0.0, -kc().s0)];
    let d: f64 = f.to_vec5().iter().zip(&want).map(|(a, b)| (a - b).norm()).sum();
    assert!(d < 1e-15);
}

#[test]
fn fundamental_solutions_at_zero() {
    let k = kc();
    let fs = fundamental_solutions(EPS, &k);
    let r = |v: [f64; 3]| [C::new(v[0], 0.0), C::new(v[1], 0.0), C::new(v[2], 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
    let want = [
        r([0.0, -2.0 * k.c31.powi(2) * EPS / k.c32, 0.0]),
        r([-k.c32 / (2.0 * k.c31.powi(2)), 0.0, k.c32 / (2.0 * k.c31) * EPS * EPS]),
        r([1.0 / k.c31, 0.0, 0.0]),
    ];
    for (l, w) in want.iter().enumerate() {
        let s = fs.s(l + 1, 0.0);
        let d: f64 = s.iter().zip(w).map(|(a, b)| (a - b).norm()).sum();
        assert!(d < 1e-12, "s{}(0) = {s:?}", l + 1);
    }
}

/// Residual of `Z' = L Z` (or the adjoint `Z' = -L^H Z`) by central differences.
fn ode_residual(fs: &FundamentalSet, tau: f64, z: impl Fn(f64) -> Vec5, adjoint: bool) -> f64 {
    let h = 2e-4;
    let (zp, zm, z0) = (z(tau + h), z(tau - h), z(tau));
    let rhs = if adjoint {
        // -L^H z, from the columns of L
        let mut out = [C::new(0.0, 0.0); 5];
        for (j, o) in out.iter_mut().enumerate() {
            let mut e = [C::new(0.0, 0.0); 5];
            e[j] = C::new(1.0, 0.0);
            *o = -inner(&z0, &fs.lin_apply(tau, &e));
        }
        out
    } else {
        fs.lin_apply(tau, &z0)
    };
    let scale = norm5(&z0).max(norm5(&rhs)).max(1.0);
    (0..5).map(|i| ((zp[i] - zm[i]) / (2.0 * h) - rhs[i]).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn fundamental_and_adjoint_solutions_solve_their_equations() {
    for eps in [0.1, 0.05] {
        let fs = fundamental_solutions(eps, &kc());
        for i in 0..100 {
            let tau = (-30.0 + 60.0 * i as f64 / 99.0) / eps + 0.0137;
            for l in 1..=5 {
                let r = ode_residual(&fs, tau, |t| fs.s(l, t), false);
                assert!(r < 1e-6, "s{l} eps={eps} tau={tau}: {r:e}");
                let r = ode_residual(&fs, tau, |t| fs.s_adj(l, t), true);
                assert!(r < 1e-6, "s{l}* eps={eps} tau={tau}: {r:e}");
            }
        }
    }
}

fn biorthogonality_defect(fs: &FundamentalSet, tau: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for l in 1..=5 {
        for k in 1..=5 {
            let (s, a) = (fs.s(l, tau), fs.s_adj(k, tau));
            let want = if l == k { 1.0 } else { 0.0 };
            let scale: f64 = s.iter().zip(&a).map(|(x, y)| x.norm() * y.norm()).sum();
            worst = worst.max((inner(&s, &a) - want).norm() / scale.max(1.0));
        }
    }
    worst
}

#[test]
fn biorthogonality_at_listed_points() {
    let fs = fundamental_solutions(EPS, &kc());
    for tau in [0.1, 1.0, 10.0 / EPS] {
        assert!(biorthogonality_defect(&fs, tau) < 1e-9, "tau={tau}");
    }
}

#[test]
fn reversal_symmetries() {
    let fs = fundamental_solutions(EPS, &kc());
    let signs = [-1.0, 1.0, 1.0, -1.0, 1.0];
    for tau in [0.3, 2.0, 17.0, 80.0] {
        for l in 1..=5 {
            let lhs = reverse5(&fs.s(l, -tau));
            let rhs = fs.s(l, tau).map(|z| z * signs[l - 1]);
            let d: f64 = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).sum();
            assert!(d < 1e-12 * norm5(&rhs).max(1.0), "s{l} tau={tau}");
        }
    }
}

#[test]
fn growth_bounds_hold_with_moderate_constant() {
    for eps in [0.1, 0.05] {
        let fs = fundamental_solutions(eps, &kc());
        let kappa = kc().decay_rate(eps);
        // sign of the exponent for s1..s5 and s1*..s5*
        let rate = [-1.0, 1.0, 0.0, 0.0, 0.0];
        let rate_adj = [1.0, -1.0, 0.0, 0.0, 0.0];
        let mut m: f64 = 0.0;
        for i in 0..=2000 {
            let tau = (-40.0 + 80.0 * i as f64 / 2000.0) / eps;
            for l in 0..5 {
                let (s, a) = (fs.s(l + 1, tau), fs.s_adj(l + 1, tau));
                for j in 0..3 {
                    let env = (rate[l] * kappa * tau.abs()).exp() * eps.powi(j as i32);
                    m = m.max(s[j].norm() / env);
                    let env = (rate_adj[l] * kappa * tau.abs()).exp() * eps.powi(-(j as i32));
                    m = m.max(a[j].norm() / env);
                }
                if l >= 3 {
                    m = m.max(norm5(&s)).max(norm5(&a));
                }
            }
        }
        assert!(m <= 50.0, "eps={eps}: M={m}");
    }
}

/// Printed quotient form of `u2~`, valid away from zeros of `x tanh x - 1`.
fn u2t_quotient(c31: f64, eps: f64, tau: f64) -> f64 {
    let x = (c31 / 2.0).sqrt() * eps * tau;
    let y = (2.0 * c31).sqrt() * eps * tau;
    let (t, s) = (x.tanh(), 1.0 / x.cosh().powi(2));
    let num = 2.0 + 3.0 * c31 * (eps * tau).powi(2) * s * s - y * t
        - 3.0 * s * (2.0 + c31 * (eps * tau).powi(2) - 2.0 * y * t);
    num / (2.0 * c31 * eps * eps * (-2.0 + y * t))
}

#[test]
fn cancelled_u2_matches_printed_quotient() {
    let k = kc();
    let fs = fundamental_solutions(EPS, &k);
    let x_of = |tau: f64| (k.c31 / 2.0).sqrt() * EPS * tau;
    let mut checked = 0;
    for i in 0..400 {
        let tau = -60.0 + 120.0 * i as f64 / 399.0;
        let x = x_of(tau);
        if (x * x.tanh() - 1.0).abs() < 0.1 {
            continue;
        }
        let q = u2t_quotient(k.c31, EPS, tau);
        assert!((fs.u2t(tau) - q).abs() < 1e-10 * q.abs().max(1.0), "tau={tau}");
        checked += 1;
    }
    assert!(checked > 300);
    // no blow-up where the printed denominator vanishes
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    for _ in 0..100 {
        let m = 0.5 * (lo + hi);
        if m * m.tanh() < 1.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    let tau_star = lo / x_of(1.0);
    assert!(fs.u2t(tau_star).is_finite() && fs.u2t(tau_star).abs() < 1.0 / (k.c31 * EPS * EPS));
}

proptest! {
    #[test]
    fn pairing_is_conserved(tau in -400.0..400.0f64) {
        let fs = fundamental_solutions(EPS, &kc());
        prop_assert!(biorthogonality_defect(&fs, tau) < 1e-9);
    }

    #[test]
    fn field_is_reversible(v in prop::array::uniform6(-1.0..1.0f64), eps in 0.01..0.15f64) {
        let k = kc();
        let x = state(v);
        let lhs = dominant_field(&x.reversed(), eps, &k);
        let rhs = dominant_field(&x, eps, &k).reversed().scale(-1.0);
        prop_assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn field_ignores_u1(v in prop::array::uniform6(-1.0..1.0f64), u1 in -5.0..5.0f64) {
        let k = kc();
        let x = state(v);
        let y = ReducedState { u1, ..x };
        prop_assert_eq!(dominant_field(&x, EPS, &k), dominant_field(&y, EPS, &k));
    }
}
