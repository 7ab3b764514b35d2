//! Small quadrature and differencing helpers shared by the modules.

use num_complex::Complex64;

/// Composite Simpson rule on a uniform grid with an odd number of samples.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd number of samples >= 3");
    let mut s = y[0] + y[n - 1];
    for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

pub fn simpson_c(y: &[Complex64], h: f64) -> Complex64 {
    let n = y.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd number of samples >= 3");
    let mut s = y[0] + y[n - 1];
    for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { v * 4.0 } else { v * 2.0 };
    }
    s * (h / 3.0)
}

/// Integral of `f` over each cell `[t_i, t_{i+1}]` of a uniform grid, sixth order.
///
/// Each cell integrates the quintic through six nearby samples, centered in the
/// interior and shifted inward at the ends. Grids of four or five samples fall
/// back to the four-point cubic rule.
pub fn cell_integrals(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "need at least four samples");
    if n < 6 {
        return (0..n - 1)
            .map(|i| {
                let v = if i == 0 {
                    9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
                } else if i == n - 2 {
                    f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]
                } else {
                    -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]
                };
                v * h / 24.0
            })
            .collect();
    }
    let w = sextic_cell_weights();
    (0..n - 1)
        .map(|i| {
            let st = i.saturating_sub(2).min(n - 6);
            let row = &w[i - st];
            h * (0..6).map(|k| row[k] * f[st + k]).sum::<f64>()
        })
        .collect()
}

/// `W[p][k] = int_p^{p+1} L_k(x) dx` for the Lagrange basis on nodes `0..=5`.
fn sextic_cell_weights() -> [[f64; 6]; 5] {
    let mut out = [[0.0; 6]; 5];
    for (p, row) in out.iter_mut().enumerate() {
        let vander = nalgebra::Matrix6::from_fn(|m, k| (k as f64).powi(m as i32));
        let moments = nalgebra::Vector6::from_fn(|m, _| {
            let e = m as i32 + 1;
            (((p + 1) as f64).powi(e) - (p as f64).powi(e)) / e as f64
        });
        let sol = vander.lu().solve(&moments).expect("Vandermonde on distinct nodes is invertible");
        for k in 0..6 {
            row[k] = sol[k];
        }
    }
    out
}

/// Running integral `F_i = int_{t_0}^{t_i} f`, with `F_0 = 0`.
pub fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let cells = cell_integrals(f, h);
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for c in cells {
        acc += c;
        out.push(acc);
    }
    out
}

/// Tail integral `G_i = int_{t_i}^{t_{n-1}} f`, accumulated from the right end.
pub fn cumulative_from_right(f: &[f64], h: f64) -> Vec<f64> {
    let cells = cell_integrals(f, h);
    let n = f.len();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n - 1).rev() {
        acc += cells[i];
        out[i] = acc;
    }
    out
}

/// First derivative on a uniform grid: 5-point centered stencil in the
/// interior, 5-point one-sided stencils at the two ends.
pub fn diff5(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 5, "diff5 needs at least five samples");
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
    }
    let fwd = |y: &[f64], i: usize| {
        (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] - 3.0 * y[i + 4])
            / (12.0 * h)
    };
    let skew = |y: &[f64], i: usize| {
        (-3.0 * y[i - 1] - 10.0 * y[i] + 18.0 * y[i + 1] - 6.0 * y[i + 2] + y[i + 3]) / (12.0 * h)
    };
    d[0] = fwd(y, 0);
    d[1] = skew(y, 1);
    let r: Vec<f64> = y.iter().rev().copied().collect();
    d[n - 1] = -fwd(&r, 0);
    d[n - 2] = -skew(&r, 1);
    d
}

pub fn diff5_c(y: &[Complex64], h: f64) -> Vec<Complex64> {
    let re: Vec<f64> = y.iter().map(|z| z.re).collect();
    let im: Vec<f64> = y.iter().map(|z| z.im).collect();
    diff5(&re, h)
        .into_iter()
        .zip(diff5(&im, h))
        .map(|(a, b)| Complex64::new(a, b))
        .collect()
}

/// Central first derivative with one Richardson step (error O(h^4)).
pub fn richardson_d1(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    let d = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Central second derivative with one Richardson step (error O(h^4)).
pub fn richardson_d2(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    let f0 = f(t);
    let d = |h: f64| (f(t + h) - 2.0 * f0 + f(t - h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Bisection on a sign-changing bracket, run until the bracket stops shrinking.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Uniform grid of `n` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + h * i as f64).collect()
}

/// Least-squares slope of `ys` against `ts`.
pub fn linear_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let (mt, my) = (ts.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let den: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    num / den
}

/// Amplitude `sqrt(b^2 + c^2)` of the least-squares fit `a + b sin(omega t) + c cos(omega t)`.
pub fn harmonic_amplitude(ts: &[f64], ys: &[f64], omega: f64) -> f64 {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (t, y) in ts.iter().zip(ys) {
        let v = nalgebra::Vector3::new(1.0, (omega * t).sin(), (omega * t).cos());
        ata += v * v.transpose();
        aty += v * *y;
    }
    match ata.lu().solve(&aty) {
        Some(x) => x[1].hypot(x[2]),
        None => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let x = linspace(0.0, 2.0, 9);
        let y: Vec<f64> = x.iter().map(|t| t * t * t - t).collect();
        assert!((simpson(&y, 0.25) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_is_exact_on_cubics() {
        let h = 0.1;
        let x = linspace(0.0, 1.0, 11);
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t * t * t - t + 2.0).collect();
        let c = cumulative(&y, h);
        for (t, v) in x.iter().zip(&c) {
            let exact = 0.75 * t.powi(4) - 0.5 * t * t + 2.0 * t;
            assert!((v - exact).abs() < 1e-13, "{t} {v} {exact}");
        }
        let r = cumulative_from_right(&y, h);
        assert!((r[0] - c[10]).abs() < 1e-13);
    }

    #[test]
    fn diff5_is_exact_on_quartics() {
        let h = 0.05;
        let x = linspace(-1.0, 1.0, 41);
        let y: Vec<f64> = x.iter().map(|t| t.powi(4) - 2.0 * t).collect();
        let d = diff5(&y, h);
        for (t, v) in x.iter().zip(&d) {
            assert!((v - (4.0 * t.powi(3) - 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 1.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn slope_and_harmonic_fit_recover_known_signals() {
        let ts = linspace(0.0, 30.0, 601);
        let ys: Vec<f64> = ts.iter().map(|t| 0.3 - 0.02 * t).collect();
        assert!((linear_slope(&ts, &ys) + 0.02).abs() < 1e-14);
        let ys: Vec<f64> = ts.iter().map(|t| 1.0 + 0.3 * (1.7 * t).sin() - 0.4 * (1.7 * t).cos()).collect();
        assert!((harmonic_amplitude(&ts, &ys, 1.7) - 0.5).abs() < 1e-12);
    }
}
