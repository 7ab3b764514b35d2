//! Generalized homoclinic of the normal form: homoclinic core plus a
//! weighted-norm correction `Z` on `tau >= 0`, matched to the ripple by a
//! phase shift `theta`, extended to `tau < 0` by the reverser, and mapped back
//! to the lattice displacements.

use crate::dispersion::DimerParams;
use crate::error::{Error, Result};
use crate::lattice_sim::TravelingProfile;
use crate::numerics::{cumulative, cumulative_from_right, diff5};
use crate::periodic_orbit::{solve_periodic, PeriodicOrbit, DEFAULT_HARMONICS};
use crate::reduced_system::{
    dominant_field, fundamental_solutions, inner, norm5, FundamentalSet, HomoclinicH, NormalFormConstants,
    ReducedState, Vec5,
};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

/// Quintic smoothstep cutoff: 0 on `|tau| <= 1`, 1 on `|tau| >= 2`, even, C^2.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cutoff;

impl Cutoff {
    pub fn zeta(&self, tau: f64) -> f64 {
        let s = (tau.abs() - 1.0).clamp(0.0, 1.0);
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }

    pub fn dzeta(&self, tau: f64) -> f64 {
        let s = (tau.abs() - 1.0).clamp(0.0, 1.0);
        30.0 * s * s * (1.0 - s) * (1.0 - s) * tau.signum()
    }

    pub fn d2zeta(&self, tau: f64) -> f64 {
        let s = (tau.abs() - 1.0).clamp(0.0, 1.0);
        60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub harmonics: usize,
    /// Grid step override; the default resolves both the ripple and the decay scale.
    pub grid_step: Option<f64>,
    /// Horizon override; the default is `25 / (sqrt(2 c31) eps)`.
    pub horizon: Option<f64>,
    /// Ball radius factor: the iterate is expected in `|Z|_nu <= rho eps^{11/3}`.
    pub rho: f64,
    /// Picard stops when successive iterates differ by less than `picard_tol * eps^4`.
    pub picard_tol: f64,
    pub max_picard: usize,
    pub max_theta_iter: usize,
    pub theta_tol: f64,
    pub jump_tol: f64,
    /// Drop the ripple component of the nonlinearity (diagnostic control).
    pub zero_n4: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            harmonics: DEFAULT_HARMONICS,
            grid_step: None,
            horizon: None,
            rho: 1.0,
            picard_tol: 1e-12,
            max_picard: 200,
            max_theta_iter: 60,
            theta_tol: 1e-14,
            jump_tol: 1e-9,
            zero_n4: false,
        }
    }
}

pub const EPS_MAX: f64 = 0.15;

/// Everything the fixed-point map needs: constants, homoclinic, fundamental
/// solutions, ripple orbit, phase and grid.
#[derive(Debug, Clone)]
pub struct SolveContext {
    pub params: DimerParams,
    pub kc: NormalFormConstants,
    /// Same constants with the higher coefficients cleared.
    pub kc_dom: NormalFormConstants,
    pub fs: FundamentalSet,
    pub orbit: PeriodicOrbit,
    pub theta: f64,
    pub cutoff: Cutoff,
    pub h: f64,
    pub n: usize,
    pub t_max: f64,
    pub nu: f64,
    pub opts: SolverOptions,
}

impl SolveContext {
    pub fn new(params: DimerParams, kc: NormalFormConstants, opts: SolverOptions) -> Result<Self> {
        let eps = params.eps;
        if eps > EPS_MAX {
            return Err(Error::InvalidParameter(format!("eps must not exceed {EPS_MAX}, got {eps}")));
        }
        let rate = kc.decay_rate(eps);
        let t_max = opts.horizon.unwrap_or(25.0 / rate);
        let h_max = opts.grid_step.unwrap_or_else(|| (2.0 * PI / (24.0 * kc.s0)).min(0.02 / rate));
        if !(t_max > 4.0 && h_max > 0.0) {
            return Err(Error::InvalidParameter(format!("bad grid: horizon {t_max}, step {h_max}")));
        }
        // unit length is a whole number of steps so the cutoff seams sit on nodes
        let per_unit = (1.0 / h_max).ceil();
        let h = 1.0 / per_unit;
        let n = (t_max / h).ceil() as usize + 1;
        let t_max = (n - 1) as f64 * h;
        let orbit = solve_periodic(eps, params.i, opts.harmonics, &kc)?;
        let kc_dom = NormalFormConstants { c33: 0.0, c34: 0.0, e31: 0.0, e32: 0.0, e33: 0.0, e34: 0.0, ..kc };
        Ok(Self {
            params,
            kc,
            kc_dom,
            fs: fundamental_solutions(eps, &kc),
            orbit,
            theta: 0.0,
            cutoff: Cutoff,
            h,
            n,
            t_max,
            nu: 0.75 * rate,
            opts,
        })
    }

    pub fn eps(&self) -> f64 {
        self.params.eps
    }

    pub fn homoclinic(&self) -> &HomoclinicH {
        &self.fs.h
    }

    pub fn tau(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn ball_radius(&self) -> f64 {
        self.opts.rho * self.eps().powf(11.0 / 3.0)
    }

    /// Nonlinear remainder of the correction equation `Z' = L Z + N(tau, Z)`.
    pub fn nonlinearity(&self, tau: f64, z: &Vec5) -> Vec5 {
        let eps = self.eps();
        let zeta = self.cutoff.zeta(tau);
        let dz = self.cutoff.dzeta(tau);
        let h = self.fs.h.state(tau);
        let xp = self.orbit.eval(tau, self.theta);
        let zs = ReducedState::from_vec5(z, 0.0);
        let x = h.add(&zs).add(&xp.scale(zeta));
        let f_x = dominant_field(&x, eps, &self.kc).to_vec5();
        let f_h = dominant_field(&h, eps, &self.kc_dom).to_vec5();
        let f_xp = dominant_field(&xp, eps, &self.kc).to_vec5();
        let lin = self.fs.lin_apply(tau, z);
        let xpv = xp.to_vec5();
        let mut out = [C::new(0.0, 0.0); 5];
        for i in 0..5 {
            out[i] = f_x[i] - f_h[i] - zeta * f_xp[i] - lin[i] - dz * xpv[i];
        }
        // The ripple component in closed form: the i s0 parts cancel exactly, which
        // keeps the far-field values free of rounding noise.
        let n4 = if self.opts.zero_n4 {
            C::new(0.0, 0.0)
        } else {
            let k = &self.kc;
            let d = h.add(&zs).add(&xp.scale(zeta - 1.0));
            let q = |a: &ReducedState| a.u3 * a.u3 - 2.0 * a.u2 * a.u4;
            let p5_xp = k.e31 * eps * eps + k.e32 * xp.u2 + k.e33 * q(&xp) + k.e34 * xp.u5.norm_sqr();
            let dq = d.u3 * (x.u3 + xp.u3) - 2.0 * (d.u2 * x.u4 + xp.u2 * d.u4);
            let dm = (d.u5 * (x.u5 + xp.u5).conj()).re;
            let dp5 = k.e32 * d.u2 + k.e33 * dq + k.e34 * dm;
            let i = C::i();
            i * zs.u5 * (p5_xp + dp5) + i * zeta * xp.u5 * dp5 - dz * xp.u5
        };
        out[3] = n4;
        out[4] = n4.conj();
        out
    }

    /// One application of the integral operator
    /// `A[Z](tau) = int_0^tau <N, s1*> s1(tau) - sum_{k>=2} int_tau^inf <N, sk*> sk(tau)`.
    pub fn apply_a(&self, z: &[Vec5]) -> Result<CorrectionZ> {
        assert_eq!(z.len(), self.n, "correction must live on the solver grid");
        let (n, h) = (self.n, self.h);
        let s0 = self.kc.s0;
        let mut g1 = vec![0.0; n];
        let mut g2 = vec![0.0; n];
        let mut g3 = vec![0.0; n];
        let mut q = vec![C::new(0.0, 0.0); n];
        for j in 0..n {
            let t = self.tau(j);
            let nl = self.nonlinearity(t, &z[j]);
            g1[j] = inner(&nl, &self.fs.s_adj(1, t)).re;
            g2[j] = inner(&nl, &self.fs.s_adj(2, t)).re;
            g3[j] = inner(&nl, &self.fs.s_adj(3, t)).re;
            q[j] = nl[3] * C::new(0.0, -s0 * t).exp();
        }
        let br = self.seams();
        let c1 = seg_cumulative(&g1, h, &br);
        let tail2 = exp_tail(&g2.iter().map(|v| C::new(*v, 0.0)).collect::<Vec<_>>(), h, self.nu).re;
        let tail3 = exp_tail(&g3.iter().map(|v| C::new(*v, 0.0)).collect::<Vec<_>>(), h, self.nu).re;
        let tailq = exp_tail(&q, h, self.nu);
        let c2: Vec<f64> = seg_cumulative_from_right(&g2, h, &br).into_iter().map(|v| v + tail2).collect();
        let c3: Vec<f64> = seg_cumulative_from_right(&g3, h, &br).into_iter().map(|v| v + tail3).collect();
        let qre: Vec<f64> = q.iter().map(|v| v.re).collect();
        let qim: Vec<f64> = q.iter().map(|v| v.im).collect();
        let cq: Vec<C> = seg_cumulative_from_right(&qre, h, &br)
            .into_iter()
            .zip(seg_cumulative_from_right(&qim, h, &br))
            .map(|(a, b)| C::new(a, b) + tailq)
            .collect();

        let mut values = Vec::with_capacity(n);
        let mut wnorm: f64 = 0.0;
        let mut tail_norm: f64 = 0.0;
        for j in 0..n {
            let t = self.tau(j);
            let v = self.combine(t, c1[j], c2[j], c3[j], cq[j]);
            let tv = self.combine(t, 0.0, tail2, tail3, tailq);
            let wgt = (self.nu * t).exp();
            wnorm = wnorm.max(wgt * norm5(&v));
            tail_norm = tail_norm.max(wgt * norm5(&tv));
            values.push(v);
        }
        if !(wnorm.is_finite() && tail_norm.is_finite()) || values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(wnorm));
        }
        if wnorm > 0.0 && tail_norm > 1e-3 * wnorm {
            return Err(Error::TailTooFat { tail: tail_norm, norm: wnorm });
        }
        let dg = |g: &[f64]| seg_diff5(g, h, &br);
        let g2n: Vec<f64> = g2.iter().map(|v| -v).collect();
        let g3n: Vec<f64> = g3.iter().map(|v| -v).collect();
        let qn_re: Vec<f64> = qre.iter().map(|v| -v).collect();
        let qn_im: Vec<f64> = qim.iter().map(|v| -v).collect();
        Ok(CorrectionZ {
            h,
            n,
            nu: self.nu,
            s0,
            fs: self.fs,
            values,
            weighted_norm: wnorm,
            tail_norm,
            c1: Hermite5::new(h, c1, dg(&g1), g1),
            c2: Hermite5::new(h, c2, dg(&g2n), g2n),
            c3: Hermite5::new(h, c3, dg(&g3n), g3n),
            cq_re: Hermite5::new(h, cq.iter().map(|v| v.re).collect(), dg(&qn_re), qn_re),
            cq_im: Hermite5::new(h, cq.iter().map(|v| v.im).collect(), dg(&qn_im), qn_im),
        })
    }

    /// Node indices of the cutoff seams `tau = 1, 2`; stencils never straddle them.
    pub fn seams(&self) -> [usize; 2] {
        let per_unit = (1.0 / self.h).round() as usize;
        [per_unit, 2 * per_unit]
    }

    fn combine(&self, t: f64, c1: f64, c2: f64, c3: f64, cq: C) -> Vec5 {
        combine(&self.fs, self.kc.s0, t, c1, c2, c3, cq)
    }

    /// Picard iteration from `Z = 0`.
    pub fn solve_z(&self) -> Result<ZSolution> {
        let zero = [C::new(0.0, 0.0); 5];
        let mut z = vec![zero; self.n];
        let eps4 = self.eps().powi(4);
        let mut diffs = Vec::new();
        let mut norms = Vec::new();
        let mut max_ratio: f64 = 0.0;
        let mut bad = 0;
        for it in 1..=self.opts.max_picard {
            let next = self.apply_a(&z)?;
            let diff = weighted_diff(&next.values, &z, self.nu, self.h);
            if let Some(&prev) = diffs.last() {
                let ratio = if prev > 0.0 { diff / prev } else { 0.0 };
                max_ratio = max_ratio.max(ratio);
                if ratio >= 1.0 {
                    bad += 1;
                    if bad >= 5 {
                        return Err(Error::NoContraction { ratio });
                    }
                } else {
                    bad = 0;
                }
            }
            diffs.push(diff);
            norms.push(next.weighted_norm);
            z = next.values.clone();
            if diff < self.opts.picard_tol * eps4 {
                let fixed_point_residual = diff;
                return Ok(ZSolution {
                    iterations: it,
                    contraction_ratio: max_ratio,
                    diffs,
                    norms,
                    fixed_point_residual,
                    ball_radius: self.ball_radius(),
                    z: next,
                });
            }
        }
        Err(Error::NoConvergence { what: "Picard iteration", iterations: self.opts.max_picard })
    }

    /// `Re int_0^inf N4(t) e^{-i s0 t} dt` for the converged correction.
    pub fn phase_integral(&self, z: &CorrectionZ) -> f64 {
        -z.at(0)[3].re
    }

    /// Outer fixed point `theta <- asin(Theta(theta) / I) / s0`, each step
    /// re-solving `Z`. Leaves `self.theta` at the solution.
    pub fn solve_theta(&mut self) -> Result<ThetaSolution> {
        let i = self.params.i;
        if i == 0.0 {
            self.theta = 0.0;
            let zsol = self.solve_z()?;
            return Ok(ThetaSolution { theta: 0.0, iterations: 0, phase_residual: 0.0, z: zsol });
        }
        let s0 = self.kc.s0;
        for it in 1..=self.opts.max_theta_iter {
            let zsol = self.solve_z()?;
            let j = self.phase_integral(&zsol.z);
            let big_theta = j + i * (s0 * self.theta).sin();
            let ratio = big_theta / i;
            if ratio.abs() > 1.0 {
                return Err(Error::ArcsinDomain(ratio.abs()));
            }
            let next = ratio.asin() / s0;
            let step = (next - self.theta).abs();
            if step <= self.opts.theta_tol.max(4.0 * f64::EPSILON * next.abs()) || j.abs() <= 1e-13 * i {
                return Ok(ThetaSolution { theta: self.theta, iterations: it, phase_residual: j, z: zsol });
            }
            self.theta = next;
        }
        Err(Error::NoConvergence { what: "phase iteration", iterations: self.opts.max_theta_iter })
    }
}

fn combine(fs: &FundamentalSet, s0: f64, t: f64, c1: f64, c2: f64, c3: f64, cq: C) -> Vec5 {
    let (a, b, c) = (fs.s(1, t), fs.s(2, t), fs.s(3, t));
    let z4 = -cq * C::new(0.0, s0 * t).exp();
    [
        c1 * a[0] - c2 * b[0] - c3 * c[0],
        c1 * a[1] - c2 * b[1] - c3 * c[1],
        c1 * a[2] - c2 * b[2] - c3 * c[2],
        z4,
        z4.conj(),
    ]
}

fn segments(n: usize, breaks: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut a = 0;
    for &b in breaks.iter().filter(|&&b| b > 0 && b + 1 < n) {
        out.push((a, b));
        a = b;
    }
    out.push((a, n - 1));
    out
}

/// Cumulative integral from the first node, restarted at each break.
fn seg_cumulative(f: &[f64], h: f64, breaks: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for (a, b) in segments(f.len(), breaks) {
        let base = out[a];
        for (k, v) in cumulative(&f[a..=b], h).into_iter().enumerate() {
            out[a + k] = base + v;
        }
    }
    out
}

fn seg_cumulative_from_right(f: &[f64], h: f64, breaks: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for (a, b) in segments(f.len(), breaks).into_iter().rev() {
        let base = out[b];
        for (k, v) in cumulative_from_right(&f[a..=b], h).into_iter().enumerate() {
            out[a + k] = base + v;
        }
    }
    out
}

/// Five-point derivative per segment; break nodes take the one-sided value from the right segment.
fn seg_diff5(f: &[f64], h: f64, breaks: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for (a, b) in segments(f.len(), breaks) {
        for (k, v) in diff5(&f[a..=b], h).into_iter().enumerate() {
            out[a + k] = v;
        }
    }
    out
}

/// `int_T^inf g` from an exponential fit of the last samples. When the samples
/// do not decay cleanly (rounding noise), the slowest admissible rate `nu` is
/// assumed; the caller's tail check then decides whether the tail matters.
fn exp_tail(g: &[C], h: f64, nu: f64) -> C {
    let n = g.len();
    let m = 8.min(n - 1);
    let (a, b) = (g[n - 1 - m], g[n - 1]);
    if b == C::new(0.0, 0.0) {
        return b;
    }
    let mu = (a / b).ln() / (m as f64 * h);
    if mu.re.is_finite() && mu.im.is_finite() && mu.re >= nu {
        b / mu
    } else {
        b / nu
    }
}

fn weighted_diff(a: &[Vec5], b: &[Vec5], nu: f64, h: f64) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(j, (x, y))| {
            let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3], x[4] - y[4]];
            (nu * j as f64 * h).exp() * norm5(&d)
        })
        .fold(0.0, f64::max)
}

/// C^2 piecewise quintic Hermite interpolant on a uniform grid starting at 0.
#[derive(Debug, Clone)]
pub struct Hermite5 {
    h: f64,
    y: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Hermite5 {
    pub fn new(h: f64, y: Vec<f64>, d2: Vec<f64>, d1: Vec<f64>) -> Self {
        Self { h, y, d1, d2 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.y.len();
        let last = (n - 1) as f64 * self.h;
        let t = t.clamp(0.0, last);
        let i = ((t / self.h).floor() as usize).min(n - 2);
        let s = t / self.h - i as f64;
        let h = self.h;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        self.y[i] * h0
            + h * self.d1[i] * h1
            + h * h * self.d2[i] * h2
            + h * h * self.d2[i + 1] * h3
            + h * self.d1[i + 1] * h4
            + self.y[i + 1] * h5
    }

    pub fn last(&self) -> f64 {
        *self.y.last().expect("non-empty interpolant")
    }
}

/// Correction on the grid, with the integral coefficients kept for evaluation between nodes.
#[derive(Debug, Clone)]
pub struct CorrectionZ {
    pub h: f64,
    pub n: usize,
    pub nu: f64,
    pub s0: f64,
    pub fs: FundamentalSet,
    pub values: Vec<Vec5>,
    pub weighted_norm: f64,
    /// Weighted norm of the part contributed by the tail extrapolation.
    pub tail_norm: f64,
    c1: Hermite5,
    c2: Hermite5,
    c3: Hermite5,
    cq_re: Hermite5,
    cq_im: Hermite5,
}

impl CorrectionZ {
    pub fn at(&self, j: usize) -> Vec5 {
        self.values[j]
    }

    pub fn horizon(&self) -> f64 {
        (self.n - 1) as f64 * self.h
    }

    /// `Z(tau)` for `0 <= tau <= T`; zero beyond the horizon.
    pub fn eval(&self, tau: f64) -> Vec5 {
        if tau > self.horizon() {
            return [C::new(0.0, 0.0); 5];
        }
        let tau = tau.max(0.0);
        let cq = C::new(self.cq_re.eval(tau), self.cq_im.eval(tau));
        combine(&self.fs, self.s0, tau, self.c1.eval(tau), self.c2.eval(tau), self.c3.eval(tau), cq)
    }
}

#[derive(Debug, Clone)]
pub struct ZSolution {
    pub z: CorrectionZ,
    pub iterations: usize,
    /// Largest ratio of successive Picard differences.
    pub contraction_ratio: f64,
    pub diffs: Vec<f64>,
    pub norms: Vec<f64>,
    pub fixed_point_residual: f64,
    pub ball_radius: f64,
}

#[derive(Debug, Clone)]
pub struct ThetaSolution {
    pub theta: f64,
    pub iterations: usize,
    /// `Re int N4 e^{-i s0 t}` at the returned phase.
    pub phase_residual: f64,
    pub z: ZSolution,
}

/// Reversible generalized homoclinic on all of the real line.
#[derive(Debug, Clone)]
pub struct WaveAssembly {
    pub ctx: SolveContext,
    pub z: ZSolution,
    pub theta: f64,
    pub theta_iterations: usize,
    /// `|(I - S) X(0)|`.
    pub jump: f64,
    u1_extra: Hermite5,
}

/// Builds the evaluator on the real line and checks the matching at `tau = 0`.
pub fn assemble(ctx: &SolveContext, zsol: ZSolution, theta: f64, theta_iterations: usize) -> Result<WaveAssembly> {
    let mut ctx = ctx.clone();
    ctx.theta = theta;
    let (n, h) = (ctx.n, ctx.h);
    // u1' = u2 = H1 + Z1 + zeta u2p; the H1 part is integrated in closed form
    let v: Vec<f64> = (0..n)
        .map(|j| {
            let t = ctx.tau(j);
            zsol.z.at(j)[0].re + ctx.cutoff.zeta(t) * ctx.orbit.eval(t, theta).u2
        })
        .collect();
    let br = ctx.seams();
    let u = seg_cumulative(&v, h, &br);
    let dv = seg_diff5(&v, h, &br);
    let u1_extra = Hermite5::new(h, u, dv, v);
    let mut wave = WaveAssembly { ctx, z: zsol, theta, theta_iterations, jump: 0.0, u1_extra };
    let x0 = wave.half_line(0.0);
    let jump_vec = x0.sub(&x0.reversed());
    wave.jump = jump_vec.norm().hypot(jump_vec.u1);
    if wave.jump > wave.ctx.opts.jump_tol {
        return Err(Error::JumpTooLarge(wave.jump));
    }
    Ok(wave)
}

/// Full construction: ripple orbit, phase and correction, then assembly.
pub fn construct(params: DimerParams, kc: NormalFormConstants, opts: SolverOptions) -> Result<WaveAssembly> {
    let mut ctx = SolveContext::new(params, kc, opts)?;
    let th = ctx.solve_theta()?;
    assemble(&ctx, th.z, th.theta, th.iterations)
}

impl WaveAssembly {
    pub fn eps(&self) -> f64 {
        self.ctx.eps()
    }

    pub fn horizon(&self) -> f64 {
        self.ctx.t_max
    }

    /// `H + Z + zeta X_p(. - theta)` for `tau >= 0`, with `u1` integrated from 0.
    pub fn half_line(&self, tau: f64) -> ReducedState {
        let c = &self.ctx;
        let zeta = c.cutoff.zeta(tau);
        let hs = c.fs.h.state(tau);
        let zs = ReducedState::from_vec5(&self.z.z.eval(tau), 0.0);
        let xp = c.orbit.eval(tau, self.theta);
        let mut x = hs.add(&zs).add(&xp.scale(zeta));
        let t_max = self.horizon();
        x.u1 = hs.u1
            + if tau <= t_max {
                self.u1_extra.eval(tau)
            } else {
                self.u1_extra.last() + c.orbit.u1p(tau, self.theta) - c.orbit.u1p(t_max, self.theta)
            };
        x
    }

    /// Reversible extension: `X(tau)` for `tau >= 0` and `S X(-tau)` otherwise.
    pub fn eval(&self, tau: f64) -> ReducedState {
        if tau >= 0.0 {
            self.half_line(tau)
        } else {
            self.half_line(-tau).reversed()
        }
    }

    /// `|X(tau) - X_p(tau - theta)|` on the 5-vector part.
    pub fn far_field_deviation(&self, tau: f64) -> f64 {
        let x = self.half_line(tau);
        let p = self.ctx.orbit.eval(tau, self.theta);
        x.sub(&p).norm()
    }

    pub fn weighted_norm(&self) -> f64 {
        self.z.z.weighted_norm
    }
}

/// Lattice traveling-wave coordinates built from the assembled wave.
#[derive(Debug, Clone)]
pub struct LatticeProfile {
    pub wave: WaveAssembly,
    pub w: f64,
    pub c_sq: f64,
    /// `x2` weight of `u3`: `(w - 1) / (2 (1 + w))`.
    pub a: f64,
    /// `x1` weight of `2 Re u5`: `cos s0`.
    pub cos_s0: f64,
    /// `x2` weight of `2 Re u5`: `(1 + w - s0^2 w) / (1 + w)`.
    pub b5: f64,
}

pub fn reconstruct_lattice(wave: &WaveAssembly) -> LatticeProfile {
    let p = wave.ctx.params;
    let s0 = wave.ctx.kc.s0;
    let w = p.w;
    LatticeProfile {
        wave: wave.clone(),
        w,
        c_sq: p.c_sq,
        a: (w - 1.0) / (2.0 * (1.0 + w)),
        cos_s0: s0.cos(),
        b5: (1.0 + w - s0 * s0 * w) / (1.0 + w),
    }
}

impl LatticeProfile {
    pub fn coords(&self, tau: f64) -> (f64, f64) {
        let x = self.wave.eval(tau);
        let r = 2.0 * x.u5.re;
        (x.u1 + self.cos_s0 * r, x.u1 + self.a * x.u3 + self.b5 * r)
    }

    /// Tanh coefficient of the front, `sqrt(3 (w^2 - w + 1)) / sqrt(2 w (1 + w)) * eps`.
    pub fn core_amplitude(&self) -> f64 {
        let h = self.wave.ctx.homoclinic();
        h.amp / h.k
    }

    /// Physical displacement of particle `j` at physical time `t_bar` for
    /// spring constant `ks`, nonlinearity `bs`, odd-site mass `m1` and spacing `ls`.
    pub fn physical_displacement(&self, j: i64, t_bar: f64, ks: f64, bs: f64, m1: f64, ls: f64) -> f64 {
        let tau = j as f64 - self.c_sq.sqrt() * (ks / m1).sqrt() * t_bar;
        let (x1, x2) = self.coords(tau);
        let x = if j.rem_euclid(2) == 1 { x1 } else { x2 };
        ks / bs * x + j as f64 * ls
    }
}

impl TravelingProfile for LatticeProfile {
    fn x1(&self, tau: f64) -> f64 {
        self.coords(tau).0
    }

    fn x2(&self, tau: f64) -> f64 {
        self.coords(tau).1
    }

    fn c_sq(&self) -> f64 {
        self.c_sq
    }

    fn w(&self) -> f64 {
        self.w
    }
}
