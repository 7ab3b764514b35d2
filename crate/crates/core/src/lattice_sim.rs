//! Direct simulation of the nondimensional diatomic chain
//! `m_j y_j'' = r_j + r_j^2 - r_{j-1} - r_{j-1}^2`, `r_j = y_{j+1} - y_j`,
//! plus the traveling-wave residual and first integral used as ground truth.

use crate::error::{Error, Result};
use crate::numerics::{richardson_d1, richardson_d2, simpson};

/// Traveling-wave coordinates: `y_j(t) = x1(j - c t)` for odd `j`, `x2(j - c t)` for even `j`.
pub trait TravelingProfile {
    fn x1(&self, tau: f64) -> f64;
    fn x2(&self, tau: f64) -> f64;
    fn c_sq(&self) -> f64;
    fn w(&self) -> f64;

    fn c(&self) -> f64 {
        self.c_sq().sqrt()
    }
}

/// Profile from two closures.
pub struct FnProfile<F, G> {
    pub x1: F,
    pub x2: G,
    pub c_sq: f64,
    pub w: f64,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> TravelingProfile for FnProfile<F, G> {
    fn x1(&self, tau: f64) -> f64 {
        (self.x1)(tau)
    }
    fn x2(&self, tau: f64) -> f64 {
        (self.x2)(tau)
    }
    fn c_sq(&self) -> f64 {
        self.c_sq
    }
    fn w(&self) -> f64 {
        self.w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Free,
    /// Free ends plus linear damping ramping up over `width` sites at each end.
    Sponge { width: usize, strength: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub w: f64,
    pub boundary: Boundary,
    /// Drop the quadratic spring terms.
    pub linear: bool,
}

pub const INSTABILITY_BOUND: f64 = 1e6;

impl ChainState {
    pub fn new(y: Vec<f64>, v: Vec<f64>, w: f64, boundary: Boundary) -> Result<Self> {
        if y.len() != v.len() {
            return Err(Error::InvalidParameter(format!("{} positions but {} velocities", y.len(), v.len())));
        }
        if y.len() < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 particles, got {}", y.len())));
        }
        if y.iter().chain(&v).any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("non-finite initial data".into()));
        }
        Ok(Self { y, v, t: 0.0, w, boundary, linear: false })
    }

    pub fn at_rest(n: usize, w: f64, boundary: Boundary) -> Result<Self> {
        Self::new(vec![0.0; n], vec![0.0; n], w, boundary)
    }

    /// Chain sampled from a traveling profile with site `j0` at `tau = 0`:
    /// `y_j = x(j - j0)`, `v_j = -c x'(j - j0)`.
    pub fn from_profile(p: &impl TravelingProfile, n: usize, j0: i64, boundary: Boundary) -> Result<Self> {
        let c = p.c();
        let mut y = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            let tau = (j as i64 - j0) as f64;
            let (val, d) = if j % 2 == 1 {
                (p.x1(tau), richardson_d1(|t| p.x1(t), tau, 1e-3))
            } else {
                (p.x2(tau), richardson_d1(|t| p.x2(t), tau, 1e-3))
            };
            y.push(val);
            v.push(-c * d);
        }
        Self::new(y, v, p.w(), boundary)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Inverse mass: 1 on odd sites, `w` on even sites.
    pub fn inv_mass(&self, j: usize) -> f64 {
        if j % 2 == 1 {
            1.0
        } else {
            self.w
        }
    }

    pub fn strains(&self) -> Vec<f64> {
        self.y.windows(2).map(|p| p[1] - p[0]).collect()
    }

    /// Kinetic energy plus `sum (r^2/2 + r^3/3)`.
    pub fn hamiltonian(&self) -> f64 {
        let kin: f64 = self.v.iter().enumerate().map(|(j, v)| 0.5 * v * v / self.inv_mass(j)).sum();
        let pot: f64 = self
            .strains()
            .iter()
            .map(|r| if self.linear { 0.5 * r * r } else { 0.5 * r * r + r * r * r / 3.0 })
            .sum();
        kin + pot
    }

    fn damping(&self, j: usize) -> f64 {
        match self.boundary {
            Boundary::Free => 0.0,
            Boundary::Sponge { width, strength } => {
                let n = self.len();
                let d = j.min(n - 1 - j);
                if d >= width {
                    0.0
                } else {
                    let s = (width - d) as f64 / width as f64;
                    strength * s * s
                }
            }
        }
    }
}

/// Accelerations of the chain for positions `y` and velocities `v`.
pub fn chain_rhs(state: &ChainState) -> Vec<f64> {
    let mut acc = vec![0.0; state.len()];
    rhs_into(state, &state.y, &state.v, &mut acc);
    acc
}

fn rhs_into(state: &ChainState, y: &[f64], v: &[f64], acc: &mut [f64]) {
    let n = y.len();
    let force = |r: f64| if state.linear { r } else { r + r * r };
    let mut left = 0.0;
    for j in 0..n {
        let right = if j + 1 < n { force(y[j + 1] - y[j]) } else { 0.0 };
        acc[j] = state.inv_mass(j) * (right - left) - state.damping(j) * v[j];
        left = right;
    }
}

/// Samples recorded by [`integrate`].
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

/// Fixed-step RK4 for `steps` steps, recording every `sample_every` steps
/// (and the initial state). Returns the final state and the samples.
pub fn integrate(state: &ChainState, dt: f64, steps: usize, sample_every: usize) -> Result<(ChainState, Trajectory)> {
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(Error::InvalidParameter(format!("time step must be in (0, 0.01], got {dt}")));
    }
    let n = state.len();
    let mut s = state.clone();
    let mut traj = Trajectory::default();
    let every = sample_every.max(1);
    let record = |s: &ChainState, traj: &mut Trajectory| {
        traj.times.push(s.t);
        traj.y.push(s.y.clone());
        traj.v.push(s.v.clone());
    };
    record(&s, &mut traj);
    let (mut k1v, mut k2v, mut k3v, mut k4v) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut yt, mut vt) = (vec![0.0; n], vec![0.0; n]);
    for step in 1..=steps {
        let (y0, v0) = (s.y.clone(), s.v.clone());
        rhs_into(&s, &y0, &v0, &mut k1v);
        for j in 0..n {
            yt[j] = y0[j] + 0.5 * dt * v0[j];
            vt[j] = v0[j] + 0.5 * dt * k1v[j];
        }
        let k2y = vt.clone();
        rhs_into(&s, &yt, &vt, &mut k2v);
        for j in 0..n {
            yt[j] = y0[j] + 0.5 * dt * k2y[j];
            vt[j] = v0[j] + 0.5 * dt * k2v[j];
        }
        let k3y = vt.clone();
        rhs_into(&s, &yt, &vt, &mut k3v);
        for j in 0..n {
            yt[j] = y0[j] + dt * k3y[j];
            vt[j] = v0[j] + dt * k3v[j];
        }
        let k4y = vt.clone();
        rhs_into(&s, &yt, &vt, &mut k4v);
        for j in 0..n {
            s.y[j] = y0[j] + dt / 6.0 * (v0[j] + 2.0 * k2y[j] + 2.0 * k3y[j] + k4y[j]);
            s.v[j] = v0[j] + dt / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
        }
        s.t = state.t + step as f64 * dt;
        if let Some(bad) = s.y.iter().find(|y| !y.is_finite() || y.abs() > INSTABILITY_BOUND) {
            return Err(Error::Instability(*bad));
        }
        if step % every == 0 {
            record(&s, &mut traj);
        }
    }
    Ok((s, traj))
}

/// Residuals of the two traveling-wave equations
/// `c^2 x1'' = F(x2(.+1) - x1) - F(x1 - x2(.-1))` and
/// `(c^2/w) x2'' = F(x1(.+1) - x2) - F(x2 - x1(.-1))`, `F(r) = r + r^2`,
/// at one `tau`, with second derivatives by Richardson-extrapolated differences.
pub fn residual_at(p: &impl TravelingProfile, tau: f64) -> (f64, f64) {
    let c2 = p.c_sq();
    let f = |r: f64| r + r * r;
    let (x1, x2) = (p.x1(tau), p.x2(tau));
    let d1 = richardson_d2(|t| p.x1(t), tau, 1e-4 * 8.0);
    let d2 = richardson_d2(|t| p.x2(t), tau, 1e-4 * 8.0);
    let r1 = c2 * d1 - (f(p.x2(tau + 1.0) - x1) - f(x1 - p.x2(tau - 1.0)));
    let r2 = c2 / p.w() * d2 - (f(p.x1(tau + 1.0) - x2) - f(x2 - p.x1(tau - 1.0)));
    (r1, r2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    pub linf_1: f64,
    pub linf_2: f64,
    /// Root-mean-square over the samples.
    pub l2_1: f64,
    pub l2_2: f64,
}

impl ResidualNorms {
    pub fn linf(&self) -> f64 {
        self.linf_1.max(self.linf_2)
    }
}

pub fn advance_delay_residual(p: &impl TravelingProfile, tau_samples: &[f64]) -> ResidualNorms {
    let mut out = ResidualNorms { linf_1: 0.0, linf_2: 0.0, l2_1: 0.0, l2_2: 0.0 };
    for &t in tau_samples {
        let (a, b) = residual_at(p, t);
        out.linf_1 = out.linf_1.max(a.abs());
        out.linf_2 = out.linf_2.max(b.abs());
        out.l2_1 += a * a;
        out.l2_2 += b * b;
    }
    let m = tau_samples.len().max(1) as f64;
    out.l2_1 = (out.l2_1 / m).sqrt();
    out.l2_2 = (out.l2_2 / m).sqrt();
    out
}

/// Conserved quantity of the traveling-wave system,
/// `c^2 x1' + (c^2/w) x2' - int_{-1}^0 G(x2(tau+s+1) - x1(tau+s)) ds - int_{-1}^0 G(x1(tau+s+1) - x2(tau+s)) ds`
/// with `G(r) = r + r^2`.
pub fn first_integral(p: &impl TravelingProfile, tau: f64) -> f64 {
    let c2 = p.c_sq();
    let g = |r: f64| r + r * r;
    let m = 200;
    let h = 1.0 / m as f64;
    let s: Vec<f64> = (0..=m).map(|i| -1.0 + i as f64 * h).collect();
    let a: Vec<f64> = s.iter().map(|&s| g(p.x2(tau + s + 1.0) - p.x1(tau + s))).collect();
    let b: Vec<f64> = s.iter().map(|&s| g(p.x1(tau + s + 1.0) - p.x2(tau + s))).collect();
    let d1 = richardson_d1(|t| p.x1(t), tau, 1e-3);
    let d2 = richardson_d1(|t| p.x2(t), tau, 1e-3);
    c2 * d1 + c2 / p.w() * d2 - simpson(&a, h) - simpson(&b, h)
}

/// Core position in site units: centroid of `r_j^2` within `half_width`
/// sites of the largest strain. Squaring keeps the small ripple out of the estimate.
pub fn core_position(state: &ChainState, half_width: usize) -> f64 {
    let r = state.strains();
    let peak = r
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let lo = peak.saturating_sub(half_width);
    let hi = (peak + half_width + 1).min(r.len());
    let (mut num, mut den) = (0.0, 0.0);
    for (j, rj) in r.iter().enumerate().take(hi).skip(lo) {
        num += (j as f64 + 0.5) * rj * rj;
        den += rj * rj;
    }
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

/// Dominant angular frequency of a uniformly sampled real signal, by a
/// refined scan of the mean-removed periodogram over `[w_lo, w_hi]`.
pub fn dominant_frequency(signal: &[f64], dt: f64, w_lo: f64, w_hi: f64) -> f64 {
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let x: Vec<f64> = signal.iter().map(|s| s - mean).collect();
    // Hann window keeps leakage from the window edges out of the peak
    let n = x.len();
    let win: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect();
    let power = |om: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, (xi, wi)) in x.iter().zip(&win).enumerate() {
            let ph = om * i as f64 * dt;
            re += xi * wi * ph.cos();
            im += xi * wi * ph.sin();
        }
        re * re + im * im
    };
    let mut best = w_lo;
    let mut step = (w_hi - w_lo) / 400.0;
    let (mut lo, mut hi) = (w_lo, w_hi);
    for _ in 0..4 {
        let mut bp = -1.0;
        let mut om = lo;
        while om <= hi {
            let pw = power(om);
            if pw > bp {
                bp = pw;
                best = om;
            }
            om += step;
        }
        lo = (best - 2.0 * step).max(w_lo);
        hi = (best + 2.0 * step).min(w_hi);
        step /= 20.0;
    }
    best
}
