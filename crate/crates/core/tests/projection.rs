use nanokit_core::dispersion::{char_function, perturbed_eigenvalues, sonic_speed_sq};
use nanokit_core::projection::*;
use nanokit_core::Error;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const W: f64 = 2.0;
const NV: usize = DEFAULT_NV;

fn c0() -> f64 {
    sonic_speed_sq(W)
}

/// Smooth element of the domain: a random quadratic plus a random sine,
/// with `x_i = w_i(0)`.
fn random_point(rng: &mut impl Rng) -> PhasePoint {
    let mut coef = || -> [f64; 5] { std::array::from_fn(|_| rng.gen_range(-1.0..1.0)) };
    let (a, b) = (coef(), coef());
    let f = move |c: [f64; 5], v: f64| {
        C::new(c[0] + c[1] * v + c[2] * v * v + c[3] * (c[4] * v).sin(), 0.0)
    };
    let u1 = rng.gen_range(-1.0..1.0);
    let u2 = rng.gen_range(-1.0..1.0);
    PhasePoint::from_fns(NV, f(a, 0.0), C::new(u1, 0.0), move |v| f(a, v), f(b, 0.0), C::new(u2, 0.0), move |v| f(b, v))
}

fn residual(lambda: C, c_sq: f64, u: &PhasePoint, f: &PhasePoint) -> f64 {
    let lu = apply_l(c_sq, W, u).unwrap();
    u.scale(lambda).sub(&lu).sub(f).norm()
}

#[test]
fn jordan_chain_and_rotation() {
    let b = EigenBasis::new(W, NV).unwrap();
    let zero = PhasePoint::zeros(NV);
    assert!(apply_l(c0(), W, &b.u[0]).unwrap().sub(&zero).norm() < 1e-8);
    for k in 1..4 {
        let d = apply_l(c0(), W, &b.u[k]).unwrap().sub(&b.u[k - 1]).norm();
        assert!(d < 1e-8, "U{} -> U{}: {d:e}", k + 1, k);
    }
    let l5 = apply_l(c0(), W, &b.u[4]).unwrap();
    let d5 = l5.sub(&b.u[4].scale(C::new(0.0, b.s0))).norm();
    assert!(d5 < 5e-8, "{d5:e}");
    // the defect is stencil truncation, shrinking like h^4
    let fine = EigenBasis::new(W, 2 * NV - 1).unwrap();
    let l5 = apply_l(c0(), W, &fine.u[4]).unwrap();
    let d5_fine = l5.sub(&fine.u[4].scale(C::new(0.0, fine.s0))).norm();
    assert!(d5 / d5_fine > 12.0, "{d5:e} {d5_fine:e}");
    for u in &b.u {
        assert!(u.compatibility_defect() < 1e-15);
    }
}

#[test]
fn translation_is_in_the_kernel() {
    let x0 = C::new(0.37, 0.0);
    let u = PhasePoint::from_fns(NV, x0, C::new(0.0, 0.0), |_| x0, x0, C::new(0.0, 0.0), |_| x0);
    let n = apply_l(1.7, W, &u).unwrap().norm();
    assert!(n < 1e-12, "{n:e}");
}

#[test]
fn reverser_structure() {
    let b = EigenBasis::new(W, NV).unwrap();
    let signs = [-1.0, 1.0, -1.0, 1.0];
    for k in 0..4 {
        let d = apply_s(&b.u[k]).sub(&b.u[k].scale(C::new(signs[k], 0.0))).norm();
        assert!(d < 1e-14, "U{}", k + 1);
    }
    assert!(apply_s(&b.u[4]).sub(&b.u[4].conj().scale(C::new(-1.0, 0.0))).norm() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_point(&mut rng);
    assert!(apply_s(&apply_s(&u)).sub(&u).norm() == 0.0);
}

#[test]
fn grid_guard() {
    assert!(matches!(apply_l(c0(), W, &PhasePoint::zeros(9)), Err(Error::GridTooCoarse(9))));
}

#[test]
fn resolvent_examples() {
    let b = EigenBasis::new(W, NV).unwrap();
    let lam = C::new(1.0, 1.0);
    let u = resolvent_solve(lam, c0(), W, &b.u[0]).unwrap();
    assert!(residual(lam, c0(), &u, &b.u[0]) < 1e-6);

    let eps = 0.1;
    let c_sq = c0() + eps * eps;
    let (l0, _) = perturbed_eigenvalues(W, eps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_point(&mut rng);
    let lam = C::new(l0 / 2.0, 0.0);
    let u = resolvent_solve(lam, c_sq, W, &f).unwrap();
    assert!(residual(lam, c_sq, &u, &f) < 1e-6);

    assert!(matches!(resolvent_solve(C::new(0.0, b.s0), c0(), W, &f), Err(Error::NearSingular(_))));
}

#[test]
fn resolvent_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = 0;
    while done < 20 {
        let lam = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.5..2.5));
        if char_function(lam, c0(), W).unwrap().norm() <= 1e-4 {
            continue;
        }
        let f = random_point(&mut rng);
        let u = resolvent_solve(lam, c0(), W, &f).unwrap();
        let r = residual(lam, c0(), &u, &f);
        assert!(r < 1e-6, "lambda={lam}: {r:e}");
        done += 1;
    }
}

#[test]
fn resolvent_has_a_fourth_order_pole_at_zero() {
    let b = EigenBasis::new(W, NV).unwrap();
    let norms: Vec<f64> = [1e-1, 5e-2, 2.5e-2]
        .iter()
        .map(|&l| resolvent_solve(C::new(l, 0.0), c0(), W, &b.u[3]).unwrap().norm() * l.powi(4))
        .collect();
    let (lo, hi) = norms.iter().fold((f64::MAX, 0.0f64), |(a, b), &n| (a.min(n), b.max(n)));
    assert!(hi / lo < 2.0, "{norms:?}");
}

#[test]
fn printed_table_fails_duality_and_repair_restores_it() {
    let p = Projector::new(W, NV).unwrap();
    assert!(p.printed_duality_error > DUALITY_TOL);
    assert_eq!(p.table, KernelTable::Repaired);
    let m = duality_matrix(&p.basis, p.table).unwrap();
    for (k, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if k == j { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-6, "V{}*(U{}) = {v}", k + 1, j + 1);
        }
    }
}

#[test]
fn basis_vectors_project_to_unit_coefficients() {
    let p = Projector::new(W, NV).unwrap();
    let a = p.coeffs(&p.basis.u[2]).unwrap();
    for (k, v) in a.iter().enumerate() {
        assert!((v - if k == 2 { 1.0 } else { 0.0 }).norm() < 1e-8);
    }
    let a = p.coeffs(&p.basis.u[4]).unwrap();
    assert!((a[4] - 1.0).norm() < 1e-8);
    assert!(a[..4].iter().all(|v| v.norm() < 1e-8));
}

/// Riesz projection oracle: `a_k = (1/2 pi i) oint lambda^{k-1} x1(lambda) d lambda`
/// around 0, and the residue of `x1` at `i s0` divided by `cos s0` for `a5`.
fn contour_coeffs(f: &PhasePoint, s0: f64) -> [C; 5] {
    let n = 64;
    let mut a = [C::new(0.0, 0.0); 5];
    for m in 0..n {
        let e = C::from_polar(1.0, 2.0 * PI * m as f64 / n as f64);
        let lam = 0.6 * e;
        let x1 = resolvent_solve(lam, c0(), W, f).unwrap().x1;
        for (k, ak) in a.iter_mut().take(4).enumerate() {
            *ak += lam.powi(k as i32 + 1) * x1 / n as f64;
        }
        let dl = 0.3 * e;
        let x1 = resolvent_solve(C::new(0.0, s0) + dl, c0(), W, f).unwrap().x1;
        a[4] += dl * x1 / n as f64;
    }
    a[4] /= s0.cos();
    a
}

#[test]
fn coefficients_match_contour_integrals() {
    let p = Projector::new(W, NV).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..3 {
        let f = random_point(&mut rng);
        let got = p.coeffs(&f).unwrap();
        let want = contour_coeffs(&f, p.basis.s0);
        for k in 0..5 {
            assert!((got[k] - want[k]).norm() < 1e-7 * want[k].norm().max(1.0), "a{}: {} vs {}", k + 1, got[k], want[k]);
        }
    }
}

#[test]
fn reversal_acts_on_coefficients() {
    let p = Projector::new(W, NV).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_point(&mut rng);
    let a = p.coeffs(&u).unwrap();
    let b = p.coeffs(&apply_s(&u)).unwrap();
    assert!((b[0] + a[0]).norm() < 1e-9);
    assert!((b[1] - a[1]).norm() < 1e-9);
    assert!((b[2] + a[2]).norm() < 1e-9);
    assert!((b[3] - a[3]).norm() < 1e-9);
    assert!((b[4] + a[4].conj()).norm() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_is_linear(seed in 0u64..1000, alpha in -2.0..2.0f64, beta in -2.0..2.0f64) {
        let p = Projector::new(W, NV).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v) = (random_point(&mut rng), random_point(&mut rng));
        let (al, be) = (C::new(alpha, 0.0), C::new(beta, 0.0));
        let mix = u.scale(al).axpy(be, &v);
        let (a, b, m) = (p.coeffs(&u).unwrap(), p.coeffs(&v).unwrap(), p.coeffs(&mix).unwrap());
        for k in 0..5 {
            prop_assert!((m[k] - (al * a[k] + be * b[k])).norm() < 1e-9);
        }
    }

    #[test]
    fn reverser_anticommutes_with_l(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_point(&mut rng);
        let sl = apply_s(&apply_l(c0(), W, &u).unwrap());
        let ls = apply_l(c0(), W, &apply_s(&u)).unwrap();
        prop_assert!(sl.axpy(C::new(1.0, 0.0), &ls).norm() < 1e-8);
    }
}
