//! Small reversible periodic orbit of the normal form by harmonic balance.
//!
//! Reversibility fixes the shape of the Fourier ansatz: `u2` and `u4` are
//! cosine series, `u3` is a sine series and `u5 = i sum_n beta_n e^{i n Omega tau}`
//! with real `beta_n`. The fundamental `beta_1 = I` is pinned and the mean of
//! `u2` is set to zero, which removes the family of shifted equilibria.

use crate::error::{Error, Result};
use crate::reduced_system::{dominant_field, NormalFormConstants, ReducedState, Vec5};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub const DEFAULT_HARMONICS: usize = 7;
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub i: f64,
    pub eps: f64,
    /// Frequency correction, `Omega = s0 + rtilde`.
    pub rtilde: f64,
    pub omega: f64,
    pub harmonics: usize,
    /// Cosine coefficients of `u2`, index `0..=K` (index 0 is pinned to zero).
    pub u2c: Vec<f64>,
    /// Sine coefficients of `u3`, index `0..=K` (index 0 unused).
    pub u3s: Vec<f64>,
    /// Cosine coefficients of `u4`, index `0..=K`.
    pub u4c: Vec<f64>,
    /// `beta_n` for `n = -K..=K`, stored at `n + K`.
    pub u5b: Vec<f64>,
    pub residual: f64,
    pub newton_iterations: usize,
}

struct Layout {
    k: usize,
}

impl Layout {
    fn len(&self) -> usize {
        5 * self.k + 2
    }

    fn unpack(&self, p: &[f64], i: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64) {
        let k = self.k;
        let mut u2 = vec![0.0; k + 1];
        let mut u3 = vec![0.0; k + 1];
        let mut u4 = vec![0.0; k + 1];
        let mut b = vec![0.0; 2 * k + 1];
        let mut at = 0;
        for n in 1..=k {
            u2[n] = p[at];
            at += 1;
        }
        for n in 1..=k {
            u3[n] = p[at];
            at += 1;
        }
        for n in 0..=k {
            u4[n] = p[at];
            at += 1;
        }
        for idx in 0..=2 * k {
            if idx == k + 1 {
                b[idx] = i;
            } else {
                b[idx] = p[at];
                at += 1;
            }
        }
        (u2, u3, u4, b, p[at])
    }

    fn pack(&self, orbit: &PeriodicOrbit) -> Vec<f64> {
        let k = self.k;
        let mut p = Vec::with_capacity(self.len());
        p.extend_from_slice(&orbit.u2c[1..]);
        p.extend_from_slice(&orbit.u3s[1..]);
        p.extend_from_slice(&orbit.u4c);
        for idx in 0..=2 * k {
            if idx != k + 1 {
                p.push(orbit.u5b[idx]);
            }
        }
        p.push(orbit.omega);
        p
    }
}

fn synth(u2: &[f64], u3: &[f64], u4: &[f64], b: &[f64], phi: f64) -> ReducedState {
    let k = u2.len() - 1;
    let mut s = ReducedState { u4: u4[0], ..Default::default() };
    for n in 1..=k {
        let (sn, cn) = (n as f64 * phi).sin_cos();
        s.u2 += u2[n] * cn;
        s.u3 += u3[n] * sn;
        s.u4 += u4[n] * cn;
    }
    let mut z = C::new(0.0, 0.0);
    for (idx, bn) in b.iter().enumerate() {
        let n = idx as f64 - k as f64;
        z += C::new(0.0, *bn) * C::new(0.0, n * phi).exp();
    }
    s.u5 = z;
    s
}

/// `d/dphi` of the synthesized state (multiply by `Omega` for `d/dtau`).
fn synth_dphi(u2: &[f64], u3: &[f64], u4: &[f64], b: &[f64], phi: f64) -> ReducedState {
    let k = u2.len() - 1;
    let mut s = ReducedState::default();
    for n in 1..=k {
        let nf = n as f64;
        let (sn, cn) = (nf * phi).sin_cos();
        s.u1 += u2[n] * cn;
        s.u2 -= nf * u2[n] * sn;
        s.u3 += nf * u3[n] * cn;
        s.u4 -= nf * u4[n] * sn;
    }
    let mut z = C::new(0.0, 0.0);
    for (idx, bn) in b.iter().enumerate() {
        let n = idx as f64 - k as f64;
        z += C::new(-n * bn, 0.0) * C::new(0.0, n * phi).exp();
    }
    s.u5 = z;
    s
}

fn residuals(lay: &Layout, p: &[f64], i: f64, eps: f64, kc: &NormalFormConstants) -> Vec<f64> {
    let k = lay.k;
    let (u2, u3, u4, b, omega) = lay.unpack(p, i);
    let npts = 8 * k + 8;
    let mut r2 = Vec::with_capacity(npts);
    let mut r3 = Vec::with_capacity(npts);
    let mut r4 = Vec::with_capacity(npts);
    let mut r5 = Vec::with_capacity(npts);
    for j in 0..npts {
        let phi = 2.0 * PI * j as f64 / npts as f64;
        let x = synth(&u2, &u3, &u4, &b, phi);
        let d = synth_dphi(&u2, &u3, &u4, &b, phi);
        let f = dominant_field(&x, eps, kc);
        r2.push(omega * d.u2 - f.u2);
        r3.push(omega * d.u3 - f.u3);
        r4.push(omega * d.u4 - f.u4);
        r5.push(omega * d.u5 - f.u5);
    }
    let nf = npts as f64;
    let phis: Vec<f64> = (0..npts).map(|j| 2.0 * PI * j as f64 / nf).collect();
    let sin_c = |r: &[f64], n: usize| {
        2.0 / nf * r.iter().zip(&phis).map(|(v, ph)| v * (n as f64 * ph).sin()).sum::<f64>()
    };
    let cos_c = |r: &[f64], n: usize| {
        let w = if n == 0 { 1.0 } else { 2.0 };
        w / nf * r.iter().zip(&phis).map(|(v, ph)| v * (n as f64 * ph).cos()).sum::<f64>()
    };
    let mut out = Vec::with_capacity(lay.len());
    for n in 1..=k {
        out.push(sin_c(&r2, n));
    }
    for n in 0..=k {
        out.push(cos_c(&r3, n));
    }
    for n in 1..=k {
        out.push(sin_c(&r4, n));
    }
    for idx in 0..=2 * k {
        let n = idx as f64 - k as f64;
        let c: C = r5.iter().zip(&phis).map(|(v, ph)| v * C::new(0.0, -n * ph).exp()).sum::<C>() / nf;
        out.push(c.re);
    }
    out
}

/// Harmonic-balance solve with the `u5` fundamental pinned to `i I`.
pub fn solve_periodic(eps: f64, i: f64, harmonics: usize, kc: &NormalFormConstants) -> Result<PeriodicOrbit> {
    if harmonics < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 harmonics, got {harmonics}")));
    }
    if !(i >= 0.0 && i.is_finite()) {
        return Err(Error::InvalidParameter(format!("ripple amplitude must be non-negative, got {i}")));
    }
    let k = harmonics;
    let mut orbit = PeriodicOrbit {
        i,
        eps,
        rtilde: kc.e31 * eps * eps,
        omega: kc.s0 + kc.e31 * eps * eps,
        harmonics: k,
        u2c: vec![0.0; k + 1],
        u3s: vec![0.0; k + 1],
        u4c: vec![0.0; k + 1],
        u5b: vec![0.0; 2 * k + 1],
        residual: 0.0,
        newton_iterations: 0,
    };
    orbit.u5b[k + 1] = i;
    if i == 0.0 {
        return Ok(orbit);
    }
    let lay = Layout { k };
    let mut p = lay.pack(&orbit);
    let n = lay.len();
    let mut converged = false;
    for it in 0..30 {
        let r = residuals(&lay, &p, i, eps, kc);
        let rn = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        orbit.newton_iterations = it;
        if rn < 1e-15 * i.max(1e-300) || rn < 1e-18 {
            converged = true;
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for col in 0..n {
            let step = 1e-7 * p[col].abs().max(i);
            let mut pp = p.clone();
            pp[col] += step;
            let rp = residuals(&lay, &pp, i, eps, kc);
            pp[col] -= 2.0 * step;
            let rm = residuals(&lay, &pp, i, eps, kc);
            for row in 0..n {
                jac[(row, col)] = (rp[row] - rm[row]) / (2.0 * step);
            }
        }
        let rhs = DVector::from_vec(r);
        let dx = jac.lu().solve(&rhs).ok_or(Error::NoConvergence {
            what: "harmonic balance (singular Jacobian)",
            iterations: it,
        })?;
        let mut dmax: f64 = 0.0;
        for (pv, d) in p.iter_mut().zip(dx.iter()) {
            *pv -= d;
            dmax = dmax.max(d.abs());
        }
        if dmax <= 1e-15 * i {
            orbit.newton_iterations = it + 1;
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "harmonic balance Newton", iterations: 30 });
    }
    let (u2, u3, u4, b, omega) = lay.unpack(&p, i);
    orbit.u2c = u2;
    orbit.u3s = u3;
    orbit.u4c = u4;
    orbit.u5b = b;
    orbit.omega = omega;
    orbit.rtilde = omega - kc.s0;
    orbit.residual = orbit.collocation_residual(kc, 64 * (k + 1));
    if orbit.residual >= RESIDUAL_TOL {
        return Err(Error::NoConvergence { what: "harmonic balance residual", iterations: orbit.newton_iterations });
    }
    Ok(orbit)
}

impl PeriodicOrbit {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `X_p(tau - theta)`, including the companion `u1p`.
    pub fn eval(&self, tau: f64, theta: f64) -> ReducedState {
        let phi = self.omega * (tau - theta);
        let mut s = synth(&self.u2c, &self.u3s, &self.u4c, &self.u5b, phi);
        s.u1 = self.u1p_at_phase(phi);
        s
    }

    /// `d/dtau X_p(tau - theta)`; the `u1` slot carries `u1p' = u2p`.
    pub fn derivative(&self, tau: f64, theta: f64) -> ReducedState {
        let phi = self.omega * (tau - theta);
        synth_dphi(&self.u2c, &self.u3s, &self.u4c, &self.u5b, phi).scale(self.omega)
    }

    /// Zero-mean antiderivative of `u2p`.
    fn u1p_at_phase(&self, phi: f64) -> f64 {
        (1..=self.harmonics)
            .map(|n| self.u2c[n] * (n as f64 * phi).sin() / (n as f64 * self.omega))
            .sum()
    }

    pub fn u1p(&self, tau: f64, theta: f64) -> f64 {
        self.u1p_at_phase(self.omega * (tau - theta))
    }

    /// Complex exponential coefficients of `(u2, u3, u4, u5, conj u5)` at harmonic `n`.
    pub fn fourier(&self, n: i64) -> Vec5 {
        let k = self.harmonics as i64;
        let z = C::new(0.0, 0.0);
        if n.abs() > k {
            return [z; 5];
        }
        let m = n.unsigned_abs() as usize;
        let (c2, c3, c4) = if n == 0 {
            (C::new(self.u2c[0], 0.0), z, C::new(self.u4c[0], 0.0))
        } else {
            let s = if n > 0 { -0.5 } else { 0.5 };
            (C::new(0.5 * self.u2c[m], 0.0), C::new(0.0, s * self.u3s[m]), C::new(0.5 * self.u4c[m], 0.0))
        };
        let b = |j: i64| self.u5b[(j + k) as usize];
        [c2, c3, c4, C::new(0.0, b(n)), C::new(0.0, -b(-n))]
    }

    /// Maximum of `|X_p' - F(X_p)|` over `samples` points of one period.
    pub fn collocation_residual(&self, kc: &NormalFormConstants, samples: usize) -> f64 {
        let t = self.period();
        (0..samples)
            .map(|j| {
                let tau = t * j as f64 / samples as f64;
                let x = self.eval(tau, 0.0);
                let d = self.derivative(tau, 0.0);
                let f = dominant_field(&x, self.eps, kc);
                let mut r = d.sub(&f);
                r.u1 = 0.0;
                r.norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced_system::constants;

    #[test]
    fn zero_amplitude_gives_zero_orbit() {
        let kc = constants(2.0).unwrap();
        let o = solve_periodic(0.1, 0.0, 7, &kc).unwrap();
        assert_eq!(o.rtilde, 0.0);
        assert_eq!(o.eval(1.3, 0.0).norm(), 0.0);
    }

    #[test]
    fn dominant_truncation_is_a_circle() {
        let kc = constants(2.0).unwrap();
        let o = solve_periodic(0.1, 1e-4, 7, &kc).unwrap();
        assert!(o.rtilde.abs() < 1e-12);
        assert!(o.u2c.iter().chain(&o.u3s).chain(&o.u4c).all(|v| v.abs() < 1e-18));
        let x = o.eval(0.0, 0.0);
        assert!((x.u5 - C::new(0.0, 1e-4)).norm() < 1e-16);
    }

    #[test]
    fn few_harmonics_rejected() {
        let kc = constants(2.0).unwrap();
        assert!(solve_periodic(0.1, 1e-4, 2, &kc).is_err());
    }
}
