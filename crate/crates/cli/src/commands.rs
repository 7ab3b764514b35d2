use crate::output::{ensure_dir, write_csv, Summary};
use crate::{DispersionArgs, SimulateArgs, SweepArgs, VerifyArgs, WaveArgs};
use anyhow::{bail, Result};
use nanokit_core::dispersion::*;
use nanokit_core::lattice_sim::*;
use nanokit_core::nanopteron_solver::*;
use nanokit_core::numerics::{harmonic_amplitude, linear_slope};
use nanokit_core::projection::{Projector, DEFAULT_NV};
use nanokit_core::reduced_system::*;
use nanokit_core::Error;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use std::fmt;
use std::path::Path;

/// Failures that are not errors of the numerical core.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Verification(Vec<String>),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "InvalidConfig: {m}"),
            CliError::Verification(names) => write!(f, "VerificationFailed: {}", names.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

/// Wraps a core error so its variant name leads the message.
#[derive(Debug)]
pub struct SolverError(pub Error);

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.0.name(), self.0)
    }
}

impl std::error::Error for SolverError {}

fn core<T>(r: nanokit_core::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow::Error::new(SolverError(e)))
}

/// 2 for configuration problems, 3 for solver failures, 4 for failed checks.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(c) = e.downcast_ref::<CliError>() {
        return match c {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 4,
        };
    }
    if let Some(SolverError(inner)) = e.downcast_ref::<SolverError>() {
        return match inner {
            Error::InvalidParameter(_) | Error::GridTooCoarse(_) => 2,
            _ => 3,
        };
    }
    1
}

fn config(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(CliError::Config(msg.into()))
}

fn validate_w(w: f64) -> Result<()> {
    if !(w.is_finite() && w > 1.0) {
        return Err(config(format!("--w must be a finite number greater than 1, got {w}")));
    }
    Ok(())
}

fn validate_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= EPS_MAX) {
        return Err(config(format!("--eps must lie in (0, {EPS_MAX}], got {eps}")));
    }
    Ok(())
}

fn validate_wave(a: &WaveArgs) -> Result<()> {
    validate_w(a.w)?;
    validate_eps(a.eps)?;
    if !(a.i0.is_finite() && a.i0 > 0.0) {
        return Err(config(format!("--I0 must be positive, got {}", a.i0)));
    }
    if a.harmonics < 3 {
        return Err(config(format!("--harmonics must be at least 3, got {}", a.harmonics)));
    }
    if a.samples < 2 || !(a.tau_max > 0.0) {
        return Err(config("--samples must be at least 2 and --tau-max positive"));
    }
    if !(a.picard_tol > 0.0 && a.jump_tol > 0.0) {
        return Err(config("tolerances must be positive"));
    }
    let coeffs = [a.c33, a.c34, a.e31, a.e32, a.e33, a.e34];
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(config("normal-form coefficients must be finite"));
    }
    Ok(())
}

fn normal_form(a: &WaveArgs) -> Result<NormalFormConstants> {
    let k = core(constants(a.w))?;
    Ok(NormalFormConstants { c33: a.c33, c34: a.c34, e31: a.e31, e32: a.e32, e33: a.e33, e34: a.e34, ..k })
}

fn build_wave(a: &WaveArgs) -> Result<WaveAssembly> {
    validate_wave(a)?;
    let params = core(DimerParams::new(a.w, a.eps, a.i0))?;
    let opts = SolverOptions {
        harmonics: a.harmonics,
        grid_step: a.step,
        horizon: a.horizon,
        picard_tol: a.picard_tol,
        jump_tol: a.jump_tol,
        ..Default::default()
    };
    core(nanokit_core::nanopteron_solver::construct(params, normal_form(a)?, opts))
}

fn wave_summary(w: &WaveAssembly) -> Summary {
    let c = &w.ctx;
    let p = c.params;
    let mut s = Summary::default();
    s.put("w", p.w)
        .put("eps", p.eps)
        .put("I0", p.i0)
        .put("I", p.i)
        .put("c", p.c())
        .put("c_sq", p.c_sq)
        .put("s0", c.kc.s0)
        .put("c31", c.kc.c31)
        .put("c32", c.kc.c32)
        .put("theta", w.theta)
        .put("rtilde", c.orbit.rtilde)
        .put("omega", c.orbit.omega)
        .put("z_weighted_norm", w.weighted_norm())
        .put("z_norm_over_eps4", w.weighted_norm() / p.eps.powi(4))
        .put("ball_radius", w.z.ball_radius)
        .put("picard_iterations", w.z.iterations)
        .put("contraction_ratio", w.z.contraction_ratio)
        .put("theta_iterations", w.theta_iterations)
        .put("newton_iterations", c.orbit.newton_iterations)
        .put("orbit_residual", c.orbit.residual)
        .put("jump", w.jump)
        .put("grid_step", c.h)
        .put("horizon", c.t_max)
        .put("decay_weight_nu", c.nu);
    s
}

pub fn dispersion(a: &DispersionArgs, out: &Path) -> Result<()> {
    validate_w(a.w)?;
    if a.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(config("--eps values must be positive"));
    }
    ensure_dir(out)?;
    let s0 = core(find_s0(a.w))?;
    let c0 = sonic_speed_sq(a.w);
    let mut s = Summary::default();
    s.put("w", a.w)
        .put("c0_sq", c0)
        .put("s0", s0)
        .put("char_residual_at_s0", core(char_function(C::new(0.0, s0), c0, a.w))?.norm())
        .put("identity_residual", s0_identity_residual(s0, a.w))
        .put("lambda0_over_eps_limit", lambda0_leading(a.w))
        .put("s1_eps2_coefficient", core(s1_coefficient(a.w, s0))?);
    let mut rows = Vec::new();
    for &e in &a.eps {
        let (l0, s1) = core(perturbed_eigenvalues(a.w, e))?;
        rows.push(vec![e.to_string(), (c0 + e * e).to_string(), l0.to_string(), (l0 / e).to_string(), s1.to_string()]);
    }
    write_csv(&out.join("dispersion.csv"), &["eps", "c_sq", "lambda0", "lambda0_over_eps", "s1"], rows)?;
    s.write(&out.join("dispersion_summary.txt"))?;
    print!("{}", s.render());
    Ok(())
}

fn write_profile(w: &WaveAssembly, a: &WaveArgs, out: &Path) -> Result<()> {
    let p = reconstruct_lattice(w);
    let n = a.samples;
    let rows = (0..n).map(|k| {
        let tau = -a.tau_max + 2.0 * a.tau_max * k as f64 / (n - 1) as f64;
        let x = w.eval(tau);
        let (x1, x2) = p.coords(tau);
        [tau, x.u1, x.u2, x.u3, x.u4, x.u5.re, x.u5.im, x1, x2].iter().map(|v| v.to_string()).collect()
    });
    write_csv(&out.join("profile.csv"), &["tau", "u1", "u2", "u3", "u4", "u5re", "u5im", "x1", "x2"], rows)
}

pub fn construct(a: &WaveArgs, out: &Path) -> Result<()> {
    let w = build_wave(a)?;
    ensure_dir(out)?;
    write_profile(&w, a, out)?;
    let mut s = wave_summary(&w);
    s.put("core_tanh_coefficient", reconstruct_lattice(&w).core_amplitude());
    s.write(&out.join("summary.txt"))?;
    print!("{}", s.render());
    Ok(())
}

pub fn simulate(a: &SimulateArgs, out: &Path) -> Result<()> {
    if !(a.dt > 0.0 && a.dt <= 0.01) {
        return Err(config(format!("--dt must lie in (0, 0.01], got {}", a.dt)));
    }
    if a.sites < 3 || a.launch < 0 || a.launch >= a.sites as i64 {
        return Err(config("--sites must be at least 3 and --launch inside the chain"));
    }
    if !(a.t_end > 0.0 && a.snapshot >= a.dt) {
        return Err(config("--t-end must be positive and --snapshot at least --dt"));
    }
    let w = build_wave(&a.wave)?;
    let p = reconstruct_lattice(&w);
    let boundary = if a.sponge == 0 {
        Boundary::Free
    } else {
        Boundary::Sponge { width: a.sponge, strength: a.sponge_strength }
    };
    let start = core(ChainState::from_profile(&p, a.sites, a.launch, boundary))?;
    let steps = (a.t_end / a.dt).round() as usize;
    let every = ((a.snapshot / a.dt).round() as usize).max(1);
    let (fin, traj) = core(integrate(&start, a.dt, steps, every))?;
    ensure_dir(out)?;
    let rows = traj.times.iter().enumerate().flat_map(|(k, t)| {
        let (y, v) = (&traj.y[k], &traj.v[k]);
        (0..y.len()).map(move |j| vec![t.to_string(), j.to_string(), y[j].to_string(), v[j].to_string()])
    });
    write_csv(&out.join("trajectory.csv"), &["t", "j", "y", "v"], rows)?;

    let c = p.c();
    let t_end = fin.t;
    let speed = (core_position(&fin, 60) - core_position(&start, 60)) / t_end;
    let mut err: f64 = 0.0;
    for (j, y) in fin.y.iter().enumerate() {
        let tau = j as f64 - a.launch as f64 - c * t_end;
        if tau.abs() < 30.0 {
            err = err.max((y - if j % 2 == 1 { p.x1(tau) } else { p.x2(tau) }).abs());
        }
    }
    let mut s = wave_summary(&w);
    s.put("sites", a.sites)
        .put("dt", a.dt)
        .put("t_end", t_end)
        .put("measured_speed", speed)
        .put("speed_relative_error", speed / c - 1.0)
        .put("core_error_over_amplitude", err / p.core_amplitude())
        .put("hamiltonian_start", start.hamiltonian())
        .put("hamiltonian_end", fin.hamiltonian());
    s.write(&out.join("simulate_summary.txt"))?;
    print!("{}", s.render());
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

fn below(name: &'static str, value: f64, limit: f64) -> Check {
    Check { name, value, limit, pass: value < limit }
}

fn run_checks(w: &WaveAssembly, fi_tol: f64) -> Result<Vec<Check>> {
    let c = &w.ctx;
    let (wr, eps) = (c.params.w, c.eps());
    let s0 = c.kc.s0;
    let mut checks = Vec::new();
    let n0 = core(char_function(C::new(0.0, s0), c.params.c0_sq, wr))?.norm();
    checks.push(below("s0_residual", n0, 1e-12));
    let proj = core(Projector::new(wr, DEFAULT_NV))?;
    checks.push(below("projection_duality", proj.duality_error, 1e-6));

    let fs = &c.fs;
    let mut bio: f64 = 0.0;
    for k in 0..=400 {
        let tau = (-40.0 + 0.2 * k as f64) / eps;
        for l in 1..=5 {
            for m in 1..=5 {
                let (a, b) = (fs.s(l, tau), fs.s_adj(m, tau));
                let scale: f64 = a.iter().zip(&b).map(|(x, y)| x.norm() * y.norm()).sum();
                let want = if l == m { 1.0 } else { 0.0 };
                bio = bio.max((inner(&a, &b) - want).norm() / scale.max(1.0));
            }
        }
    }
    checks.push(below("biorthogonality", bio, 1e-9));

    let h = c.homoclinic();
    let hom = (0..=1000)
        .map(|k| {
            let tau = (-40.0 + 0.08 * k as f64) / eps;
            dominant_field(&h.state(tau), eps, &c.kc_dom).sub(&h.derivative(tau)).norm()
        })
        .fold(0.0, f64::max);
    checks.push(below("homoclinic_exactness", hom, 1e-12));
    checks.push(below("contraction_ratio", w.z.contraction_ratio, 0.5));
    checks.push(below("jump", w.jump, c.opts.jump_tol));
    checks.push(Check { name: "theta_over_eps", value: w.theta.abs() / eps, limit: 10.0, pass: w.theta.abs() / eps <= 10.0 });

    let p = reconstruct_lattice(w);
    let odd = (0..=500)
        .map(|k| {
            let tau = 0.4 * k as f64 + 0.013;
            let (a, b) = (p.coords(tau), p.coords(-tau));
            (a.0 + b.0).abs().max((a.1 + b.1).abs())
        })
        .fold(0.0, f64::max);
    checks.push(below("oddness", odd, 1e-9));

    let t = w.horizon();
    let ts: Vec<f64> = (0..2000).map(|k| 0.75 * t + 0.25 * t * k as f64 / 1999.0).collect();
    let x1: Vec<f64> = ts.iter().map(|&s| p.x1(s)).collect();
    let x2: Vec<f64> = ts.iter().map(|&s| p.x2(s)).collect();
    let want = (1.0 + wr - s0 * s0 * wr).abs() / ((1.0 + wr) * s0.cos().abs());
    let got = harmonic_amplitude(&ts, &x2, c.orbit.omega) / harmonic_amplitude(&ts, &x1, c.orbit.omega);
    checks.push(below("ripple_ratio_error", (got / want - 1.0).abs(), 0.01));
    let us: Vec<f64> = ts.iter().map(|&s| w.eval(s).u1).collect();
    checks.push(below("u1_slope", linear_slope(&ts, &us).abs(), 1e-6 * eps));

    let taus: Vec<f64> = (0..200).map(|i| -20.0 + 40.0 * i as f64 / 199.0).collect();
    let full = advance_delay_residual(&p, &taus).linf();
    let (a, k) = (p.core_amplitude(), h.k);
    let bare = FnProfile { x1: |s: f64| a * (k * s).tanh(), x2: |s: f64| a * (k * s).tanh(), c_sq: p.c_sq, w: wr };
    let bare_res = advance_delay_residual(&bare, &taus).linf();
    checks.push(below("lattice_residual_vs_bare_front", full, bare_res));
    let fi = (first_integral(&p, 0.0) - first_integral(&p, 10.0 / eps)).abs();
    checks.push(below("first_integral_drift", fi, fi_tol));
    Ok(checks)
}

/// A constructed wave with the names of its failed checks.
type Verified = (WaveAssembly, Vec<String>);

fn verify_into(a: &VerifyArgs, out: &Path) -> Result<Verified> {
    let w = build_wave(&a.wave)?;
    let fi_tol = a.fi_tol.unwrap_or(1e-6 * a.wave.eps * a.wave.eps);
    if !(fi_tol > 0.0) {
        return Err(config("--fi-tol must be positive"));
    }
    let checks = run_checks(&w, fi_tol)?;
    ensure_dir(out)?;
    let mut report = Summary::default();
    for ch in &checks {
        let status = if ch.pass { "PASS" } else { "FAIL" };
        report.put(ch.name, format!("{status} value={:e} limit={:e}", ch.value, ch.limit));
    }
    report.write(&out.join("report.txt"))?;
    wave_summary(&w).write(&out.join("summary.txt"))?;
    let failed = checks.iter().filter(|c| !c.pass).map(|c| c.name.to_string()).collect();
    Ok((w, failed))
}

pub fn verify(a: &VerifyArgs, out: &Path) -> Result<()> {
    let (_, failed) = verify_into(a, out)?;
    print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
    if !failed.is_empty() {
        bail!(CliError::Verification(failed));
    }
    Ok(())
}

pub fn sweep(a: &SweepArgs, out: &Path) -> Result<()> {
    if a.eps_list.is_empty() {
        return Err(config("--eps-list is empty"));
    }
    for &e in &a.eps_list {
        validate_eps(e)?;
    }
    ensure_dir(out)?;
    let results: Vec<(f64, Result<Verified>)> = a
        .eps_list
        .par_iter()
        .map(|&e| {
            let mut v = a.verify.clone();
            v.wave.eps = e;
            (e, verify_into(&v, &out.join(format!("eps_{e}"))))
        })
        .collect();
    let mut rows = Vec::new();
    let mut first_err = None;
    let mut failed = Vec::new();
    for (e, r) in results {
        match r {
            Ok((w, f)) => {
                let status = if f.is_empty() { "pass".to_string() } else { format!("fail:{}", f.join("|")) };
                rows.push(vec![
                    e.to_string(),
                    w.theta.to_string(),
                    w.ctx.orbit.rtilde.to_string(),
                    w.weighted_norm().to_string(),
                    (w.weighted_norm() / e.powi(4)).to_string(),
                    w.z.iterations.to_string(),
                    w.jump.to_string(),
                    status,
                ]);
                failed.extend(f.into_iter().map(|n| format!("eps={e}:{n}")));
            }
            Err(err) => {
                rows.push(vec![e.to_string(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), format!("error:{err}")]);
                first_err.get_or_insert(err);
            }
        }
    }
    write_csv(
        &out.join("sweep.csv"),
        &["eps", "theta", "rtilde", "z_weighted_norm", "z_norm_over_eps4", "picard_iterations", "jump", "status"],
        rows,
    )?;
    print!("{}", std::fs::read_to_string(out.join("sweep.csv"))?);
    if let Some(e) = first_err {
        return Err(e);
    }
    if !failed.is_empty() {
        bail!(CliError::Verification(failed));
    }
    Ok(())
}
