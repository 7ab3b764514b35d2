//! Five-dimensional normal form on the center manifold, its explicit
//! homoclinic orbit, and the fundamental and adjoint solutions of the
//! linearization about that orbit.
//!
//! Vectors are ordered `(u2, u3, u4, u5, conj u5)`; the companion `u1` obeys
//! `u1' = u2` and is carried alongside.

use crate::dispersion::find_s0;
use crate::error::{Error, Result};
use num_complex::Complex64 as C;

pub type Vec5 = [C; 5];

/// Sesquilinear pairing `sum a_i conj(b_i)`.
pub fn inner(a: &Vec5, b: &Vec5) -> C {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Euclidean norm on `C^5`.
pub fn norm5(a: &Vec5) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Reverser on 5-vectors: `(z1, z2, z3, z4, z5) -> (z1, -z2, z3, -z5, -z4)`.
pub fn reverse5(z: &Vec5) -> Vec5 {
    [z[0], -z[1], z[2], -z[4], -z[3]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFormConstants {
    pub c31: f64,
    pub c32: f64,
    pub c33: f64,
    pub c34: f64,
    pub e31: f64,
    pub e32: f64,
    pub e33: f64,
    pub e34: f64,
    pub s0: f64,
}

/// Closed-form `c31, c32` for mass ratio `w`, higher coefficients zero.
pub fn constants(w: f64) -> Result<NormalFormConstants> {
    if !(w > 1.0) {
        return Err(Error::InvalidParameter(format!("mass ratio w must exceed 1, got {w}")));
    }
    let q = 1.0 - w + w * w;
    Ok(NormalFormConstants {
        c31: 3.0 * (1.0 + w).powi(3) / (4.0 * w * q),
        c32: 2.0 * (1.0 + w).powi(2) / q,
        c33: 0.0,
        c34: 0.0,
        e31: 0.0,
        e32: 0.0,
        e33: 0.0,
        e34: 0.0,
        s0: find_s0(w)?,
    })
}

impl NormalFormConstants {
    pub fn is_dominant(&self) -> bool {
        [self.c33, self.c34, self.e31, self.e32, self.e33, self.e34].iter().all(|c| *c == 0.0)
    }

    /// Decay rate `sqrt(2 c31) eps` of the homoclinic.
    pub fn decay_rate(&self, eps: f64) -> f64 {
        (2.0 * self.c31).sqrt() * eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
    pub u5: C,
}

impl ReducedState {
    pub fn to_vec5(&self) -> Vec5 {
        [C::new(self.u2, 0.0), C::new(self.u3, 0.0), C::new(self.u4, 0.0), self.u5, self.u5.conj()]
    }

    /// Real state from a 5-vector; `u1` is set separately.
    pub fn from_vec5(z: &Vec5, u1: f64) -> Self {
        Self { u1, u2: z[0].re, u3: z[1].re, u4: z[2].re, u5: z[3] }
    }

    /// Reverser, including `u1 -> -u1`.
    pub fn reversed(&self) -> Self {
        Self { u1: -self.u1, u2: self.u2, u3: -self.u3, u4: self.u4, u5: -self.u5.conj() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            u1: self.u1 + o.u1,
            u2: self.u2 + o.u2,
            u3: self.u3 + o.u3,
            u4: self.u4 + o.u4,
            u5: self.u5 + o.u5,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { u1: a * self.u1, u2: a * self.u2, u3: a * self.u3, u4: a * self.u4, u5: self.u5 * a }
    }

    /// Norm of the 5-vector part.
    pub fn norm(&self) -> f64 {
        norm5(&self.to_vec5())
    }
}

/// Normal-form vector field. With all higher coefficients zero this is the
/// dominant truncation
/// `(u3, u4 + c31 eps^2 u2 - c32 u2^2, c31 eps^2 u3 - c32 u2 u3, i s0 u5, -i s0 conj u5)`.
/// The `u1` slot of the result carries `u1' = u2`; the field never reads `u1`.
pub fn dominant_field(x: &ReducedState, eps: f64, k: &NormalFormConstants) -> ReducedState {
    let e2 = eps * eps;
    let q = x.u3 * x.u3 - 2.0 * x.u2 * x.u4;
    let m = x.u5.norm_sqr();
    let p3 = k.c31 * e2 - k.c32 * x.u2 + k.c33 * q + k.c34 * m;
    let p5 = k.e31 * e2 + k.e32 * x.u2 + k.e33 * q + k.e34 * m;
    let i = C::i();
    ReducedState {
        u1: x.u2,
        u2: x.u3,
        u3: x.u4 + x.u2 * p3,
        u4: x.u3 * p3,
        u5: i * k.s0 * x.u5 + i * x.u5 * p5,
    }
}

/// Explicit homoclinic of the dominant truncation,
/// `H1 = (2 c31 / c32) eps^2 sech^2(sqrt(c31/2) eps tau)`, `H2 = H1'`,
/// `H3 = c31 eps^2 H1 - (c32/2) H1^2`.
#[derive(Debug, Clone, Copy)]
pub struct HomoclinicH {
    pub eps: f64,
    pub c31: f64,
    pub c32: f64,
    /// Amplitude `2 c31 eps^2 / c32`.
    pub amp: f64,
    /// Inverse width `sqrt(c31/2) eps`.
    pub k: f64,
}

pub fn homoclinic(eps: f64, k: &NormalFormConstants) -> HomoclinicH {
    HomoclinicH {
        eps,
        c31: k.c31,
        c32: k.c32,
        amp: 2.0 * k.c31 * eps * eps / k.c32,
        k: (k.c31 / 2.0).sqrt() * eps,
    }
}

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

impl HomoclinicH {
    pub fn h1(&self, tau: f64) -> f64 {
        self.amp * sech2(self.k * tau)
    }

    pub fn h2(&self, tau: f64) -> f64 {
        let x = self.k * tau;
        -2.0 * self.k * self.amp * x.tanh() * sech2(x)
    }

    pub fn h3(&self, tau: f64) -> f64 {
        let h1 = self.h1(tau);
        self.c31 * self.eps * self.eps * h1 - 0.5 * self.c32 * h1 * h1
    }

    /// `u1 = int_0^tau H1`, the front carried by the decoupled coordinate.
    pub fn u1(&self, tau: f64) -> f64 {
        self.amp / self.k * (self.k * tau).tanh()
    }

    pub fn state(&self, tau: f64) -> ReducedState {
        ReducedState { u1: self.u1(tau), u2: self.h1(tau), u3: self.h2(tau), u4: self.h3(tau), u5: C::new(0.0, 0.0) }
    }

    /// `dH/dtau` from differentiating the closed forms directly.
    pub fn derivative(&self, tau: f64) -> ReducedState {
        let x = self.k * tau;
        let (t, s) = (x.tanh(), sech2(x));
        let h2p = -2.0 * self.k * self.k * self.amp * (s * s - 2.0 * t * t * s);
        let h3p = (self.c31 * self.eps * self.eps - self.c32 * self.h1(tau)) * self.h2(tau);
        ReducedState { u1: self.h1(tau), u2: self.h2(tau), u3: h2p, u4: h3p, u5: C::new(0.0, 0.0) }
    }
}

/// Fundamental solutions `s1..s5` of `Z' = L(tau) Z`, the linearization of the
/// dominant field about the homoclinic, and adjoint solutions `s1*..s5*` with
/// `<s_l, s_k*> = delta_lk`.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalSet {
    pub eps: f64,
    pub s0: f64,
    pub h: HomoclinicH,
}

pub fn fundamental_solutions(eps: f64, k: &NormalFormConstants) -> FundamentalSet {
    FundamentalSet { eps, s0: k.s0, h: homoclinic(eps, k) }
}

impl FundamentalSet {
    fn c31(&self) -> f64 {
        self.h.c31
    }

    fn c32(&self) -> f64 {
        self.h.c32
    }

    /// `c31 eps^2 - c32 H1(tau)`.
    pub fn b(&self, tau: f64) -> f64 {
        self.c31() * self.eps * self.eps - self.c32() * self.h.h1(tau)
    }

    /// Linearization `L(tau) z`.
    pub fn lin_apply(&self, tau: f64, z: &Vec5) -> Vec5 {
        let e2 = self.eps * self.eps;
        let h1 = self.h.h1(tau);
        let h2 = self.h.h2(tau);
        let is0 = C::new(0.0, self.s0);
        [
            z[1],
            z[2] + (self.c31() * e2 - 2.0 * self.c32() * h1) * z[0],
            (self.c31() * e2 - self.c32() * h1) * z[1] - self.c32() * h2 * z[0],
            is0 * z[3],
            -is0 * z[4],
        ]
    }

    fn u1t_scale(&self) -> f64 {
        self.c32() / (16.0 * self.c31().powi(2) * self.eps.powi(4))
    }

    /// Growing auxiliary solution `u1~`.
    pub fn u1t(&self, tau: f64) -> f64 {
        let x = self.h.k * tau;
        self.u1t_scale() * (6.0 + (2.0 * x).cosh() - 15.0 * sech2(x) * (1.0 - x * x.tanh()))
    }

    pub fn u1t_prime(&self, tau: f64) -> f64 {
        let x = self.h.k * tau;
        let (t, s) = (x.tanh(), sech2(x));
        let d = 2.0 * (2.0 * x).sinh() + 30.0 * s * t * (1.0 - x * t) + 15.0 * s * (t + x * s);
        self.h.k * self.u1t_scale() * d
    }

    /// Bounded auxiliary solution `u2~ = g(x) / (c31 eps^2)` with
    /// `g(x) = -1/2 + (3/2) sech^2 x (1 - x tanh x)`, `x = sqrt(c31/2) eps tau`.
    /// This is the closed form with the common factor `x tanh x - 1` cancelled.
    pub fn u2t(&self, tau: f64) -> f64 {
        let x = self.h.k * tau;
        (-0.5 + 1.5 * sech2(x) * (1.0 - x * x.tanh())) / (self.c31() * self.eps * self.eps)
    }

    pub fn u2t_prime(&self, tau: f64) -> f64 {
        let x = self.h.k * tau;
        let (t, s) = (x.tanh(), sech2(x));
        let g = 1.5 * (-2.0 * s * t * (1.0 - x * t) - s * (t + x * s));
        self.h.k * g / (self.c31() * self.eps * self.eps)
    }

    /// Antiderivative of `s1[1]` that vanishes at infinity.
    pub fn s11(&self, tau: f64) -> f64 {
        let x = self.h.k * tau;
        2.0 * self.c31() * sech2(x) / (self.c32() * self.eps)
    }

    /// Antiderivative of `s2[1]`, odd in `tau`.
    pub fn s21(&self, tau: f64) -> f64 {
        let x = self.h.k * tau;
        let pre = self.c32() * 2f64.sqrt() / (32.0 * self.c31().powf(2.5) * self.eps);
        pre * (12.0 * x - 15.0 * x * sech2(x) + (2.0 * x).sinh() - 15.0 * x.tanh())
    }

    fn s1_first(&self, tau: f64) -> f64 {
        self.h.h2(tau) / self.eps.powi(3)
    }

    fn s1_first_prime(&self, tau: f64) -> f64 {
        self.h.derivative(tau).u3 / self.eps.powi(3)
    }

    /// `s_l(tau)` for `l` in `1..=5`.
    pub fn s(&self, l: usize, tau: f64) -> Vec5 {
        let r = |x: f64| C::new(x, 0.0);
        let z = r(0.0);
        let e = self.eps;
        match l {
            1 => {
                let d = self.h.derivative(tau);
                let s = e.powi(-3);
                [r(s * d.u2), r(s * d.u3), r(s * d.u4), z, z]
            }
            2 => {
                let u = self.u1t(tau);
                let e4 = e.powi(4);
                [r(e4 * u), r(e4 * self.u1t_prime(tau)), r(e4 * u * self.b(tau)), z, z]
            }
            3 => {
                let u = self.u2t(tau);
                let e2 = e * e;
                [r(e2 * u), r(e2 * self.u2t_prime(tau)), r(e2 * (u * self.b(tau) + 1.0)), z, z]
            }
            4 => {
                let p = C::new(0.0, self.s0 * tau).exp();
                [z, z, z, p, p.conj()]
            }
            5 => {
                let p = C::new(0.0, self.s0 * tau).exp();
                let i = C::i();
                [z, z, z, -i * p, i * p.conj()]
            }
            _ => panic!("fundamental solution index must be in 1..=5, got {l}"),
        }
    }

    /// Adjoint solution `s_k*(tau)` for `k` in `1..=5`.
    pub fn s_adj(&self, k: usize, tau: f64) -> Vec5 {
        let r = |x: f64| C::new(x, 0.0);
        let z = r(0.0);
        let e = self.eps;
        let b = self.b(tau);
        match k {
            1 => {
                let e4 = e.powi(4);
                let s2_1 = e4 * self.u1t(tau);
                let s2_1p = e4 * self.u1t_prime(tau);
                let s21 = self.s21(tau);
                [r(-(s2_1p - b * s21) / e), r(s2_1 / e), r(-s21 / e), z, z]
            }
            2 => {
                let s11 = self.s11(tau);
                [
                    r((self.s1_first_prime(tau) - b * s11) / e),
                    r(-self.s1_first(tau) / e),
                    r(s11 / e),
                    z,
                    z,
                ]
            }
            3 => [r(-b / (e * e)), z, r(1.0 / (e * e)), z, z],
            4 => {
                let p = C::new(0.0, self.s0 * tau).exp();
                [z, z, z, p * 0.5, p.conj() * 0.5]
            }
            5 => {
                let p = C::new(0.0, self.s0 * tau).exp();
                let i = C::i();
                [z, z, z, -0.5 * i * p, 0.5 * i * p.conj()]
            }
            _ => panic!("adjoint solution index must be in 1..=5, got {k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_for_w2() {
        let k = constants(2.0).unwrap();
        assert!((k.c31 - 3.375).abs() < 1e-15);
        assert!((k.c32 - 6.0).abs() < 1e-15);
        assert!(k.is_dominant());
    }

    #[test]
    fn homoclinic_values_at_zero() {
        let k = constants(2.0).unwrap();
        let h = homoclinic(0.1, &k);
        assert!((h.h1(0.0) - 0.01125).abs() < 1e-15);
        assert_eq!(h.h2(0.0), 0.0);
        assert!(h.h3(0.0).abs() < 1e-18);
    }

    #[test]
    fn linear_block_rotates() {
        let k = constants(2.0).unwrap();
        let x = ReducedState { u5: C::new(1.0, 0.0), ..Default::default() };
        let f = dominant_field(&x, 0.1, &k);
        assert_eq!(f.u5, C::new(0.0, k.s0));
        assert_eq!((f.u2, f.u3, f.u4), (0.0, 0.0, 0.0));
    }
}
