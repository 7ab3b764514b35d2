//! Phase space of the advance-delay system as a first-order evolution problem,
//! the linear operator `L_c`, the reverser, the resolvent and the spectral
//! projection onto the central eigenspace at the sonic speed.
//!
//! A phase point is `(x1, u1, w1, x2, u2, w2)` where `w1, w2` are sampled on a
//! uniform grid over `v in [-1, 1]`.

use crate::dispersion::{char_derivative, char_function, find_s0, sonic_speed_sq};
use crate::error::{Error, Result};
use crate::numerics::{cell_integrals, diff5_c, simpson_c};
use num_complex::Complex64 as C;

pub const DEFAULT_NV: usize = 257;

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x1: C,
    pub u1t: C,
    pub w1: Vec<C>,
    pub x2: C,
    pub u2t: C,
    pub w2: Vec<C>,
}

fn check_grid(nv: usize) -> Result<()> {
    if nv < 16 {
        return Err(Error::GridTooCoarse(nv));
    }
    if nv % 4 != 1 {
        return Err(Error::InvalidParameter(format!(
            "v-grid size must be 1 mod 4 so both half grids suit Simpson, got {nv}"
        )));
    }
    Ok(())
}

impl PhasePoint {
    pub fn zeros(nv: usize) -> Self {
        let z = C::new(0.0, 0.0);
        Self { x1: z, u1t: z, w1: vec![z; nv], x2: z, u2t: z, w2: vec![z; nv] }
    }

    /// Samples `w1`, `w2` from closures on the `nv`-point grid.
    pub fn from_fns(
        nv: usize,
        x1: C,
        u1t: C,
        w1: impl Fn(f64) -> C,
        x2: C,
        u2t: C,
        w2: impl Fn(f64) -> C,
    ) -> Self {
        let v = v_grid(nv);
        Self {
            x1,
            u1t,
            w1: v.iter().map(|&t| w1(t)).collect(),
            x2,
            u2t,
            w2: v.iter().map(|&t| w2(t)).collect(),
        }
    }

    pub fn nv(&self) -> usize {
        self.w1.len()
    }

    pub fn h(&self) -> f64 {
        2.0 / (self.nv() - 1) as f64
    }

    fn mid(&self) -> usize {
        (self.nv() - 1) / 2
    }

    pub fn scale(&self, a: C) -> Self {
        Self {
            x1: self.x1 * a,
            u1t: self.u1t * a,
            w1: self.w1.iter().map(|z| z * a).collect(),
            x2: self.x2 * a,
            u2t: self.u2t * a,
            w2: self.w2.iter().map(|z| z * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: C, other: &Self) -> Self {
        Self {
            x1: self.x1 + a * other.x1,
            u1t: self.u1t + a * other.u1t,
            w1: self.w1.iter().zip(&other.w1).map(|(p, q)| p + a * q).collect(),
            x2: self.x2 + a * other.x2,
            u2t: self.u2t + a * other.u2t,
            w2: self.w2.iter().zip(&other.w2).map(|(p, q)| p + a * q).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(C::new(-1.0, 0.0), other)
    }

    pub fn conj(&self) -> Self {
        Self {
            x1: self.x1.conj(),
            u1t: self.u1t.conj(),
            w1: self.w1.iter().map(|z| z.conj()).collect(),
            x2: self.x2.conj(),
            u2t: self.u2t.conj(),
            w2: self.w2.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Maximum norm over all components and grid samples.
    pub fn norm(&self) -> f64 {
        let scalars = [self.x1, self.u1t, self.x2, self.u2t];
        scalars
            .iter()
            .chain(self.w1.iter())
            .chain(self.w2.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Distance from the compatibility conditions `w1(0) = x1`, `w2(0) = x2`.
    pub fn compatibility_defect(&self) -> f64 {
        let m = self.mid();
        (self.w1[m] - self.x1).norm().max((self.w2[m] - self.x2).norm())
    }
}

pub fn v_grid(nv: usize) -> Vec<f64> {
    let h = 2.0 / (nv - 1) as f64;
    (0..nv).map(|i| -1.0 + h * i as f64).collect()
}

/// `L_c U`, differentiating the `w` components on the grid.
pub fn apply_l(c_sq: f64, w: f64, u: &PhasePoint) -> Result<PhasePoint> {
    let n = u.nv();
    check_grid(n)?;
    let h = u.h();
    Ok(PhasePoint {
        x1: u.u1t,
        u1t: (u.w2[n - 1] - 2.0 * u.x1 + u.w2[0]) / c_sq,
        w1: diff5_c(&u.w1, h),
        x2: u.u2t,
        u2t: (u.w1[n - 1] - 2.0 * u.x2 + u.w1[0]) * (w / c_sq),
        w2: diff5_c(&u.w2, h),
    })
}

/// Reverser: `(x1, u1, w1, x2, u2, w2) -> (-x1, u1, -w1(-v), -x2, u2, -w2(-v))`.
pub fn apply_s(u: &PhasePoint) -> PhasePoint {
    let rev = |w: &[C]| w.iter().rev().map(|z| -z).collect::<Vec<_>>();
    PhasePoint { x1: -u.x1, u1t: u.u1t, w1: rev(&u.w1), x2: -u.x2, u2t: u.u2t, w2: rev(&u.w2) }
}

/// `int_0^v e^{lambda (v - s)} f(s) ds` at every grid point.
fn volterra(f: &[C], lambda: C, h: f64) -> Vec<C> {
    let n = f.len();
    let m = (n - 1) / 2;
    let v = v_grid(n);
    let g: Vec<C> = f.iter().zip(&v).map(|(fv, &s)| fv * (-lambda * s).exp()).collect();
    let cells = |side: &[C]| {
        let re: Vec<f64> = side.iter().map(|z| z.re).collect();
        let im: Vec<f64> = side.iter().map(|z| z.im).collect();
        cell_integrals(&re, h).into_iter().zip(cell_integrals(&im, h)).map(|(a, b)| C::new(a, b))
    };
    let mut acc = vec![C::new(0.0, 0.0); n];
    let mut run = C::new(0.0, 0.0);
    for (k, c) in cells(&g[m..]).enumerate() {
        run += c;
        acc[m + k + 1] = run;
    }
    let left: Vec<C> = g[..=m].iter().rev().copied().collect();
    let mut run = C::new(0.0, 0.0);
    for (k, c) in cells(&left).enumerate() {
        run -= c;
        acc[m - k - 1] = run;
    }
    acc.iter().zip(&v).map(|(a, &t)| a * (lambda * t).exp()).collect()
}

/// `int_0^1 [e^{lambda (1-s)} f(s) - e^{-lambda (1-s)} f(-s)] ds`.
fn boundary_transfer(f: &[C], lambda: C, h: f64) -> C {
    let n = f.len();
    let m = (n - 1) / 2;
    let g: Vec<C> = (0..=m)
        .map(|k| {
            let s = k as f64 * h;
            (lambda * (1.0 - s)).exp() * f[m + k] - (-lambda * (1.0 - s)).exp() * f[m - k]
        })
        .collect();
    simpson_c(&g, h)
}

/// Solves `(lambda I - L_c) U = f` in closed form.
pub fn resolvent_solve(lambda: C, c_sq: f64, w: f64, f: &PhasePoint) -> Result<PhasePoint> {
    let n = f.nv();
    check_grid(n)?;
    let nt = char_function(lambda, c_sq, w)?;
    if nt.norm() <= 1e-8 {
        return Err(Error::NearSingular(nt.norm()));
    }
    let h = f.h();
    let f1 = f.x1 * lambda + f.u1t - boundary_transfer(&f.w2, lambda, h) / c_sq;
    let f2 = f.x2 * lambda + f.u2t - boundary_transfer(&f.w1, lambda, h) * (w / c_sq);
    let two_cosh = lambda.exp() + (-lambda).exp();
    let pre = c_sq * c_sq / nt;
    let x1 = pre * ((lambda * lambda + 2.0 * w / c_sq) * f1 + two_cosh * f2 / c_sq);
    let x2 = pre * (two_cosh * f1 * (w / c_sq) + (lambda * lambda + 2.0 / c_sq) * f2);
    let v = v_grid(n);
    let i1 = volterra(&f.w1, lambda, h);
    let i2 = volterra(&f.w2, lambda, h);
    Ok(PhasePoint {
        x1,
        u1t: lambda * x1 - f.x1,
        w1: v.iter().zip(&i1).map(|(&t, i)| (lambda * t).exp() * x1 - i).collect(),
        x2,
        u2t: lambda * x2 - f.x2,
        w2: v.iter().zip(&i2).map(|(&t, i)| (lambda * t).exp() * x2 - i).collect(),
    })
}

/// Central eigenvectors at the sonic speed: the Jordan chain `U1..U4` of the
/// zero eigenvalue and the eigenvector `U5` of `i s0`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub w: f64,
    pub s0: f64,
    pub u: [PhasePoint; 5],
}

impl EigenBasis {
    pub fn new(w: f64, nv: usize) -> Result<Self> {
        check_grid(nv)?;
        let s0 = find_s0(w)?;
        let a = (w - 1.0) / (2.0 * (1.0 + w));
        let b5 = (1.0 + w - s0 * s0 * w) / (1.0 + w);
        let r = |x: f64| C::new(x, 0.0);
        let is0 = C::new(0.0, s0);
        let cs = s0.cos();
        let u = [
            PhasePoint::from_fns(nv, r(1.0), r(0.0), |_| r(1.0), r(1.0), r(0.0), |_| r(1.0)),
            PhasePoint::from_fns(nv, r(0.0), r(1.0), r, r(0.0), r(1.0), r),
            PhasePoint::from_fns(
                nv,
                r(0.0),
                r(0.0),
                |v| r(0.5 * v * v),
                r(a),
                r(0.0),
                |v| r(a + 0.5 * v * v),
            ),
            PhasePoint::from_fns(
                nv,
                r(0.0),
                r(0.0),
                |v| r(v * v * v / 6.0),
                r(0.0),
                r(a),
                |v| r(a * v + v * v * v / 6.0),
            ),
            PhasePoint::from_fns(
                nv,
                r(cs),
                is0 * cs,
                |v| (is0 * v).exp() * cs,
                r(b5),
                is0 * b5,
                |v| (is0 * v).exp() * b5,
            ),
        ];
        Ok(Self { w, s0, u })
    }
}

/// Which integral table is used for the projection coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTable {
    /// The table as printed, with `f6(s)` in the second-order and third-order
    /// kernels of the `f6(-s)`, `f3(s)` and `f3(-s)` rows.
    Printed,
    /// Each row uses its own integrand, as the Jordan-chain pattern requires.
    Repaired,
}

struct Moments {
    d100: C,
    d11: C,
    d12: C,
    d13: C,
    d200: C,
    d21: C,
    d22: C,
    d23: C,
    d300: C,
    d31: C,
    d32: C,
    d33: C,
    d400: C,
    d41: C,
    d42: C,
    d43: C,
}

/// `int_0^1 k(s) f(sign * s) ds`.
fn half_moment(f: &[C], sign: i32, h: f64, k: impl Fn(f64) -> f64) -> C {
    let m = (f.len() - 1) / 2;
    let g: Vec<C> = (0..=m)
        .map(|j| {
            let idx = if sign > 0 { m + j } else { m - j };
            f[idx] * k(j as f64 * h)
        })
        .collect();
    simpson_c(&g, h)
}

fn moments(u: &PhasePoint, table: KernelTable) -> Moments {
    let h = u.h();
    let (f3, f6) = (&u.w1, &u.w2);
    let k0 = |_s: f64| 1.0;
    let k1 = |s: f64| 1.0 - s;
    let k2 = |s: f64| 0.5 * (1.0 - s).powi(2);
    let k3 = |s: f64| (1.0 - s).powi(3) / 6.0;
    let (r2, r3, t2, t3, q2, q3) = match table {
        KernelTable::Printed => (
            half_moment(f6, 1, h, k2),
            -half_moment(f6, 1, h, k3),
            half_moment(f6, 1, h, k2),
            half_moment(f6, 1, h, k3),
            half_moment(f6, 1, h, k2),
            -half_moment(f6, 1, h, k3),
        ),
        KernelTable::Repaired => (
            half_moment(f6, -1, h, k2),
            -half_moment(f6, -1, h, k3),
            half_moment(f3, 1, h, k2),
            half_moment(f3, 1, h, k3),
            half_moment(f3, -1, h, k2),
            -half_moment(f3, -1, h, k3),
        ),
    };
    Moments {
        d100: half_moment(f6, 1, h, k0),
        d11: half_moment(f6, 1, h, k1),
        d12: half_moment(f6, 1, h, k2),
        d13: half_moment(f6, 1, h, k3),
        d200: half_moment(f6, -1, h, k0),
        d21: -half_moment(f6, -1, h, k1),
        d22: r2,
        d23: r3,
        d300: half_moment(f3, 1, h, k0),
        d31: half_moment(f3, 1, h, k1),
        d32: t2,
        d33: t3,
        d400: half_moment(f3, -1, h, k0),
        d41: -half_moment(f3, -1, h, k1),
        d42: q2,
        d43: q3,
    }
}

/// Projection coefficients `(a1, .., a5)` of `u` with the chosen kernel table.
pub fn project_coeffs_with(u: &PhasePoint, w: f64, s0: f64, table: KernelTable) -> Result<[C; 5]> {
    check_grid(u.nv())?;
    let d = moments(u, table);
    let (f1, f2, f4, f5) = (u.x1, u.u1t, u.x2, u.u2t);
    let q = 1.0 - w + w * w;
    let big_a = (1.0 + w).powi(3) / (5.0 * q * q);
    let big_b = 3.0 / (4.0 * q);
    let big_c = 3.0 * (1.0 + w) / (2.0 * q);
    let p = 1.0 + w;

    let odd = -2.0 * w * f1 - 2.0 * f4 + p * (d.d11 - d.d21 + d.d31 - d.d41);
    let even = -2.0 * w * f2 - 2.0 * f5 + p * (d.d100 - d.d200 + d.d300 - d.d400);
    let a1 = -big_a * odd
        - big_b
            * (4.0 * w * f1 - 2.0 * p * (d.d11 - d.d21) - 2.0 * p * p * (d.d13 - d.d23)
                + p * (2.0 * f4 + p * (d.d41 - d.d31 + 2.0 * (d.d43 - d.d33))));
    let a2 = -big_a * even
        - big_b
            * (4.0 * w * f2 - 2.0 * p * (d.d100 - d.d200) - 2.0 * p * p * (d.d12 - d.d22)
                + p * (2.0 * f5 + p * (d.d400 - d.d300) + 2.0 * p * (d.d42 - d.d32)));
    let a3 = big_c * odd;
    let a4 = big_c * even;

    let h = u.h();
    let is0 = C::new(0.0, s0);
    let e_plus = |s: f64| (is0 * (1.0 - s)).exp();
    let e_minus = |s: f64| (-is0 * (1.0 - s)).exp();
    let osc = |f: &[C], sign: i32, e: &dyn Fn(f64) -> C| {
        let m = (f.len() - 1) / 2;
        let g: Vec<C> = (0..=m)
            .map(|j| {
                let idx = if sign > 0 { m + j } else { m - j };
                f[idx] * e(j as f64 * h)
            })
            .collect();
        simpson_c(&g, h)
    };
    let t10 = osc(&u.w2, 1, &e_plus);
    let t20 = osc(&u.w2, -1, &e_minus);
    let t30 = osc(&u.w1, 1, &e_plus);
    let t40 = osc(&u.w1, -1, &e_minus);
    let nprime = char_derivative(is0, sonic_speed_sq(w), w)?;
    let a5 = 2.0 * w / (p * p * nprime)
        * ((p * p / w) / (p / w - s0 * s0) * s0.cos() * (2.0 * w * (f2 + is0 * f1) + p * (t20 - t10))
            + 2.0 * p * (f5 + is0 * f4)
            - p * p * (t30 - t40));
    Ok([a1, a2, a3, a4, a5])
}

/// `M[k][j] = V_k*(U_j)` for the given table.
pub fn duality_matrix(basis: &EigenBasis, table: KernelTable) -> Result<[[C; 5]; 5]> {
    let mut m = [[C::new(0.0, 0.0); 5]; 5];
    for (j, uj) in basis.u.iter().enumerate() {
        let a = project_coeffs_with(uj, basis.w, basis.s0, table)?;
        for k in 0..5 {
            m[k][j] = a[k];
        }
    }
    Ok(m)
}

pub fn duality_error(m: &[[C; 5]; 5]) -> f64 {
    let mut err: f64 = 0.0;
    for (k, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if k == j { 1.0 } else { 0.0 };
            err = err.max((v - target).norm());
        }
    }
    err
}

pub const DUALITY_TOL: f64 = 1e-6;

/// Projection coefficients with the table chosen by validating duality on the basis.
#[derive(Debug, Clone)]
pub struct Projector {
    pub basis: EigenBasis,
    pub table: KernelTable,
    /// Duality error of the printed table, kept for reporting.
    pub printed_duality_error: f64,
    pub duality_error: f64,
}

impl Projector {
    pub fn new(w: f64, nv: usize) -> Result<Self> {
        let basis = EigenBasis::new(w, nv)?;
        let printed = duality_error(&duality_matrix(&basis, KernelTable::Printed)?);
        if printed <= DUALITY_TOL {
            return Ok(Self {
                basis,
                table: KernelTable::Printed,
                printed_duality_error: printed,
                duality_error: printed,
            });
        }
        let repaired = duality_error(&duality_matrix(&basis, KernelTable::Repaired)?);
        if repaired > DUALITY_TOL {
            return Err(Error::Postcondition(format!(
                "projection duality fails for both tables ({printed:e}, {repaired:e})"
            )));
        }
        Ok(Self { basis, table: KernelTable::Repaired, printed_duality_error: printed, duality_error: repaired })
    }

    pub fn coeffs(&self, u: &PhasePoint) -> Result<[C; 5]> {
        project_coeffs_with(u, self.basis.w, self.basis.s0, self.table)
    }
}

/// Projection coefficients of `u`, validating the integral table first.
pub fn project_coeffs(u: &PhasePoint, w: f64) -> Result<[C; 5]> {
    Projector::new(w, u.nv())?.coeffs(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_guard() {
        assert!(matches!(apply_l(1.0, 2.0, &PhasePoint::zeros(9)), Err(Error::GridTooCoarse(9))));
    }

    #[test]
    fn volterra_matches_closed_form() {
        let nv = 129;
        let lambda = C::new(0.7, -0.4);
        let f: Vec<C> = v_grid(nv).iter().map(|&v| C::new(v.cos(), 0.0)).collect();
        let got = volterra(&f, lambda, 2.0 / 128.0);
        // int_0^v e^{l(v-s)} cos s ds = (l e^{lv} - l cos v + sin v)/(l^2+1)
        for (i, &v) in v_grid(nv).iter().enumerate().step_by(16) {
            let exact = ((lambda * v).exp() * lambda - lambda * v.cos() + v.sin()) / (lambda * lambda + 1.0);
            assert!((got[i] - exact).norm() < 1e-8, "{v}: {} vs {}", got[i], exact);
        }
    }
}
