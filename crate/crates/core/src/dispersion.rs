//! Characteristic function of the linearized advance-delay operator, the
//! resonant frequency `s0` and the eigenvalues that bifurcate from the
//! quadruple zero eigenvalue when the speed exceeds the sonic speed.

use crate::error::{Error, Result};
use crate::numerics::bisect;
use num_complex::Complex64;

/// Parameter block of the problem: mass ratio `w`, perturbation `eps` and ripple scale `i0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerParams {
    pub w: f64,
    pub eps: f64,
    pub i0: f64,
    /// Sonic speed squared, `2w/(1+w)`.
    pub c0_sq: f64,
    /// Wave speed squared, `c0_sq + eps^2`.
    pub c_sq: f64,
    /// Ripple amplitude `eps^4 * i0`.
    pub i: f64,
}

impl DimerParams {
    /// `i0 = 0` is accepted so the ripple-free degenerate wave can be built.
    pub fn new(w: f64, eps: f64, i0: f64) -> Result<Self> {
        if !(w.is_finite() && w > 1.0) {
            return Err(Error::InvalidParameter(format!("mass ratio w must exceed 1, got {w}")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if !(i0.is_finite() && i0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("I0 must be non-negative, got {i0}")));
        }
        let c0_sq = sonic_speed_sq(w);
        Ok(Self { w, eps, i0, c0_sq, c_sq: c0_sq + eps * eps, i: eps.powi(4) * i0 })
    }

    pub fn c(&self) -> f64 {
        self.c_sq.sqrt()
    }
}

pub fn sonic_speed_sq(w: f64) -> f64 {
    2.0 * w / (1.0 + w)
}

/// Dispersion results for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub w: f64,
    pub c_sq: f64,
    pub s0: f64,
    pub lambda0: f64,
    pub s1: f64,
}

impl SpectralData {
    pub fn compute(p: &DimerParams) -> Result<Self> {
        let s0 = find_s0(p.w)?;
        let (lambda0, s1) = perturbed_eigenvalues(p.w, p.eps)?;
        Ok(Self { w: p.w, c_sq: p.c_sq, s0, lambda0, s1 })
    }

    pub fn ntilde_at(&self, lambda: Complex64) -> Result<Complex64> {
        char_function(lambda, self.c_sq, self.w)
    }
}

fn overflow_guard(lambda: Complex64) -> Result<()> {
    if lambda.re.abs() > 300.0 {
        Err(Error::Overflow(lambda.re.abs()))
    } else {
        Ok(())
    }
}

/// `N(lambda, c) = c^4 lambda^4 + 2 c^2 (1+w) lambda^2 + 2w (1 - cosh 2 lambda)`.
pub fn char_function(lambda: Complex64, c_sq: f64, w: f64) -> Result<Complex64> {
    overflow_guard(lambda)?;
    let l2 = lambda * lambda;
    Ok(c_sq * c_sq * l2 * l2 + 2.0 * c_sq * (1.0 + w) * l2 + 2.0 * w * (1.0 - (2.0 * lambda).cosh()))
}

/// Analytic `dN/dlambda`.
pub fn char_derivative(lambda: Complex64, c_sq: f64, w: f64) -> Result<Complex64> {
    overflow_guard(lambda)?;
    Ok(4.0 * c_sq * c_sq * lambda * lambda * lambda + 4.0 * c_sq * (1.0 + w) * lambda
        - 4.0 * w * (2.0 * lambda).sinh())
}

/// `n`-th derivative of `N(., c)` at `lambda = 0`.
pub fn char_derivative_at_zero(n: u32, c_sq: f64, w: f64) -> f64 {
    let cosh_term = |n: u32| -2.0 * w * 2f64.powi(n as i32);
    match n {
        0 | 1 | 3 => 0.0,
        2 => 4.0 * c_sq * (1.0 + w) + cosh_term(2),
        4 => 24.0 * c_sq * c_sq + cosh_term(4),
        n if n % 2 == 1 => 0.0,
        n => cosh_term(n),
    }
}

/// `N(i q, c)`, which is real for real `q`.
pub fn char_on_imaginary_axis(q: f64, c_sq: f64, w: f64) -> f64 {
    let q2 = q * q;
    c_sq * c_sq * q2 * q2 - 2.0 * c_sq * (1.0 + w) * q2 + 2.0 * w * (1.0 - (2.0 * q).cos())
}

fn char_on_imaginary_axis_dq(q: f64, c_sq: f64, w: f64) -> f64 {
    4.0 * c_sq * c_sq * q * q * q - 4.0 * c_sq * (1.0 + w) * q + 4.0 * w * (2.0 * q).sin()
}

pub const S0_SCAN_STEP: f64 = 0.01;
pub const S0_QMAX: f64 = 20.0;

/// The unique root `q > sqrt 2` of `N(i q, c0) = 0`.
pub fn find_s0(w: f64) -> Result<f64> {
    find_s0_with_step(w, S0_SCAN_STEP)
}

/// Same as [`find_s0`] with an explicit scan step.
pub fn find_s0_with_step(w: f64, step: f64) -> Result<f64> {
    if !(w > 1.0) {
        return Err(Error::InvalidParameter(format!("mass ratio w must exceed 1, got {w}")));
    }
    let c0_sq = sonic_speed_sq(w);
    let f = |q: f64| char_on_imaginary_axis(q, c0_sq, w);
    let start = 2f64.sqrt() + 1e-6;
    let n = ((S0_QMAX - start) / step).ceil() as usize;
    let mut lo = start;
    let mut flo = f(lo);
    let mut bracket = None;
    for k in 1..=n {
        let hi = (start + step * k as f64).min(S0_QMAX);
        let fhi = f(hi);
        if flo == 0.0 || flo.signum() != fhi.signum() {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        flo = fhi;
    }
    let (a, b) = bracket.ok_or(Error::NoBracket { qmax: S0_QMAX })?;
    let s0 = if f(a) == 0.0 { a } else { bisect(f, a, b) };

    let residual = f(s0).abs();
    if residual >= 1e-12 {
        return Err(Error::Postcondition(format!("|N(i s0, c0)| = {residual:e}")));
    }
    let ident = s0_identity_residual(s0, w);
    if ident.abs() >= 1e-9 {
        return Err(Error::Postcondition(format!("resonance identity residual {ident:e}")));
    }
    let slope = char_derivative(Complex64::new(0.0, s0), c0_sq, w)?.norm();
    if slope <= 1e-6 {
        return Err(Error::Postcondition(format!("s0 is not a simple root, |N'| = {slope:e}")));
    }
    Ok(s0)
}

/// `w (s0^2 - (1+w)/w)(s0^2 - 1 - w) - (1+w)^2 cos^2 s0`, zero at the resonance.
pub fn s0_identity_residual(s0: f64, w: f64) -> f64 {
    let s2 = s0 * s0;
    w * (s2 - (1.0 + w) / w) * (s2 - 1.0 - w) - (1.0 + w).powi(2) * s0.cos().powi(2)
}

/// `(c0^2 s0^2 - 2)(c0^2 s0^2 - 2w) - 4w cos^2 s0`, the same identity in speed form.
pub fn s0_identity_residual_speed_form(s0: f64, w: f64) -> f64 {
    let x = sonic_speed_sq(w) * s0 * s0;
    (x - 2.0) * (x - 2.0 * w) - 4.0 * w * s0.cos().powi(2)
}

/// Leading coefficient of `lambda0 / eps`: `sqrt(3) (1+w)^{3/2} / sqrt(2 w (w^2 - w + 1))`.
pub fn lambda0_leading(w: f64) -> f64 {
    3f64.sqrt() * (1.0 + w).powf(1.5) / (2.0 * w * (w * w - w + 1.0)).sqrt()
}

/// Coefficient `k` in `s1 = s0 + k eps^2 + O(eps^4)`.
pub fn s1_coefficient(w: f64, s0: f64) -> Result<f64> {
    let d = char_derivative(Complex64::new(0.0, s0), sonic_speed_sq(w), w)?;
    let num = 2.0 * s0 * s0 * ((1.0 + w).powi(2) - 2.0 * s0 * s0 * w);
    let k = num / (Complex64::i() * (1.0 + w) * d);
    Ok(k.re)
}

/// `(sinh x / x)^2 - 1` and its derivative, without cancellation for small `x`.
fn sinhc_sq_minus_one(x: f64) -> (f64, f64) {
    if x.abs() < 0.5 {
        // sum_{n>=2} 2^{2n-1} x^{2n-2} / (2n)!
        let x2 = x * x;
        let mut coef = 8.0 / 24.0;
        let mut pow = x2;
        let (mut val, mut der) = (0.0, 0.0);
        let mut n = 2.0;
        loop {
            let term = coef * pow;
            val += term;
            der += coef * (2.0 * n - 2.0) * pow / x;
            if term.abs() < 1e-18 * val.abs() {
                break;
            }
            coef *= 4.0 / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
            pow *= x2;
            n += 1.0;
        }
        (val, der)
    } else {
        let s = x.sinh() / x;
        let ds = (x * x.cosh() - x.sinh()) / (x * x);
        (s * s - 1.0, 2.0 * s * ds)
    }
}

/// Real eigenvalue `lambda0(eps) > 0` and imaginary-axis frequency `s1(eps)`
/// of the operator at speed `c^2 = c0^2 + eps^2`.
pub fn perturbed_eigenvalues(w: f64, eps: f64) -> Result<(f64, f64)> {
    if !(w > 1.0) {
        return Err(Error::InvalidParameter(format!("mass ratio w must exceed 1, got {w}")));
    }
    if !(eps > 0.0 && eps <= 0.2) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 0.2], got {eps}")));
    }
    let c_sq = sonic_speed_sq(w) + eps * eps;

    // N(lambda)/lambda^2 = 2 eps^2 (1+w) + c^4 lambda^2 - 4w ((sinh lambda / lambda)^2 - 1)
    let g = |l: f64| {
        let (phi, dphi) = sinhc_sq_minus_one(l);
        (
            2.0 * eps * eps * (1.0 + w) + c_sq * c_sq * l * l - 4.0 * w * phi,
            2.0 * c_sq * c_sq * l - 4.0 * w * dphi,
        )
    };
    let lambda0 = newton(g, lambda0_leading(w) * eps, "lambda0 Newton")?;

    let s0 = find_s0(w)?;
    let h = |q: f64| (char_on_imaginary_axis(q, c_sq, w), char_on_imaginary_axis_dq(q, c_sq, w));
    let s1 = newton(h, s0 + s1_coefficient(w, s0)? * eps * eps, "s1 Newton")?;
    Ok((lambda0, s1))
}

fn newton(f: impl Fn(f64) -> (f64, f64), mut x: f64, what: &'static str) -> Result<f64> {
    for _ in 0..50 {
        let (v, d) = f(x);
        let dx = v / d;
        if !dx.is_finite() {
            break;
        }
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { what, iterations: 50 })
}

/// Upper bound on `Im(lambda)^2` for eigenvalues off the imaginary axis.
pub fn spectral_bound(lambda_re: f64, c_sq: f64, w: f64) -> f64 {
    let l1 = lambda_re;
    let inner = 19.0 * c_sq * c_sq * l1.powi(4)
        + 2.0 * c_sq * (1.0 + w) * l1 * l1
        + 4.0 * w * l1.cosh().powi(2)
        + 2.0 * (1.0 + w).powi(2);
    2f64.sqrt() / c_sq * (2f64.sqrt() * (1.0 + w) + inner.sqrt())
}

/// Whether the imaginary part of `lambda` obeys [`spectral_bound`].
pub fn spectral_bound_check(lambda: Complex64, c_sq: f64, w: f64) -> bool {
    lambda.im * lambda.im <= spectral_bound(lambda.re, c_sq, w)
}
