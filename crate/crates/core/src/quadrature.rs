//! Quadrature building blocks: adaptive Simpson in one dimension and tensor
//! Gauss-Legendre panels for the variance double integral.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Adaptive Simpson with an absolute tolerance, seeded with 16 base segments
/// so narrow interior features cannot hide from the first refinement probe.
/// The tolerance should be keyed to the integrand maximum by the caller.
pub fn adaptive_simpson<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<f64> {
    const BASE: usize = 16;
    let h = (b - a) / BASE as f64;
    let seg_tol = abs_tol / BASE as f64;
    let mut total = 0.0;
    for i in 0..BASE {
        let lo = a + i as f64 * h;
        let hi = lo + h;
        let flo = f(lo)?;
        let fhi = f(hi)?;
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid)?;
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson_rec(f, lo, hi, flo, fmid, fhi, whole, seg_tol, 44)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        if delta.abs() > 15.0 * tol {
            return Err(Error::NoConvergence(format!(
                "adaptive Simpson hit depth cap on [{a}, {b}]"
            )));
        }
        return Ok(left + right + delta / 15.0);
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Nodes and weights of the 12-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_12() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(12))
}

fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev estimate, then Newton.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrate f over [a, b] with `panels` panels of 12-point Gauss-Legendre.
pub fn panel_gl_integrate<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<f64> {
    let (nodes, weights) = gauss_legendre_12();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            total += w * half * f(mid + half * x)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_smooth_function() {
        let mut f = |x: f64| Ok((3.0 * x).sin() * (-x).exp());
        let got = adaptive_simpson(&mut f, 0.0, 2.0, 1e-12).unwrap();
        // Antiderivative of sin(3x) e^{-x}: e^{-x}(-sin(3x) - 3 cos(3x))/10.
        let anti = |x: f64| (-x).exp() * (-(3.0 * x).sin() - 3.0 * (3.0 * x).cos()) / 10.0;
        let want = anti(2.0) - anti(0.0);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn simpson_resolves_narrow_peak() {
        // Gaussian of width 1e-3 inside a unit interval.
        let s = 1e-3;
        let mut f = |x: f64| Ok((-(x - 0.3) * (x - 0.3) / (2.0 * s * s)).exp());
        let got = adaptive_simpson(&mut f, 0.0, 1.0, 1e-13).unwrap();
        let want = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((got - want).abs() < 1e-9 * want.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn gl_rule_exact_for_polynomials() {
        // 12-point GL is exact through degree 23.
        let mut f = |x: f64| Ok(x.powi(10) - 3.0 * x.powi(7) + x.powi(2) + 1.0);
        let got = panel_gl_integrate(&mut f, -1.0, 1.0, 1).unwrap();
        let want = 2.0 / 11.0 + 2.0 / 3.0 + 2.0;
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn gl_panels_converge_on_oscillatory() {
        let mut f = |x: f64| Ok((10.0 * x).cos());
        let got = panel_gl_integrate(&mut f, 0.0, 1.0, 8).unwrap();
        let want = (10.0f64).sin() / 10.0;
        assert!((got - want).abs() < 1e-12);
    }
}
