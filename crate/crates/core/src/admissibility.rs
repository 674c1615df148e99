//! Numerical diagnostics for the admissibility of a kernel: the quadratic
//! major-arc model of log G(re^{i theta}), the minor-arc smallness, the two
//! integral claims behind the variance bound, and log-convexity.
//!
//! Smallness conditions of o(1) type cannot be decided at finite r, so
//! everything here is reported as a trend over an r-grid rather than as a
//! boolean verdict.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::logdomain::wrap_angle;
use crate::quadrature::adaptive_simpson;

/// Empirical cutoff delta(r) = min(pi/2, b(r)^{-2/5}): between the b^{-1/2}
/// Gaussian bulk scale and the b^{-1/3} third-order scale. Recorded in
/// reports, never asserted against.
pub fn estimate_delta(spec: &KernelSpec, r: f64) -> Result<f64> {
    let b = spec.b_of(r)?;
    Ok((std::f64::consts::FRAC_PI_2).min(b.powf(-0.4)))
}

/// Max over a symmetric theta grid (>= 129 points) of the modulus of
/// log G(re^{i theta}) - (log G(r) + i theta a(r) - theta^2 b(r)/2),
/// with the phase difference compared wrapped.
pub fn check_major_arc(spec: &KernelSpec, r: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, pi), got {delta}"
        )));
    }
    let (a, b) = spec.a_b_of(r)?;
    let log_g = spec.log_g(r)?;
    let n = 129;
    let mut worst = 0.0f64;
    for i in 0..n {
        let theta = delta * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
        let eval = spec.log_g_complex(r, theta)?;
        let d_re = eval.value.log_mod - (log_g - 0.5 * theta * theta * b);
        let d_im = wrap_angle(eval.value.arg - wrap_angle(theta * a));
        let err = d_re.hypot(d_im);
        if err > worst {
            worst = err;
        }
    }
    Ok(worst)
}

/// Sup over a theta grid on [delta, pi] of |G(re^{i theta})| sqrt(b) / G(r).
/// Where cancellation destroys the direct value, the certified error bound
/// stands in as an upper estimate, so the reported sup stays honest.
pub fn check_minor_arc(spec: &KernelSpec, r: f64, delta: f64) -> Result<f64> {
    minor_arc_ratio(spec, r, delta, 0.5)
}

/// Same sup with the b^{1/4} normalization from the relaxed admissibility
/// variant; recorded in reports only.
pub fn check_minor_arc_quartic(spec: &KernelSpec, r: f64, delta: f64) -> Result<f64> {
    minor_arc_ratio(spec, r, delta, 0.25)
}

fn minor_arc_ratio(spec: &KernelSpec, r: f64, delta: f64, b_power: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, pi), got {delta}"
        )));
    }
    let b = spec.b_of(r)?;
    let log_g = spec.log_g(r)?;
    let n = 129;
    let mut sup = 0.0f64;
    for i in 0..n {
        let theta = delta + (std::f64::consts::PI - delta) * i as f64 / (n - 1) as f64;
        let eval = spec.log_g_complex(r, theta)?;
        let log_mod = match eval.precision_loss {
            Some(bound) => eval.value.log_mod.max(bound),
            None => eval.value.log_mod,
        };
        let v = (log_mod + b_power * b.ln() - log_g).exp();
        if v > sup {
            sup = v;
        }
    }
    Ok(sup)
}

/// Normalized angular mass q(R) = int_{-pi}^{pi} |G(Re^{i t})|^2 / G(R)^2 dt;
/// A(R) = q(R) G(R)^2 in the notation of the inner-integral claim.
pub fn normalized_angular_mass(spec: &KernelSpec, radius: f64) -> Result<f64> {
    let log_g = spec.log_g(radius)?;
    let mut f = |theta: f64| -> Result<f64> {
        let eval = spec.log_g_complex(radius, theta)?;
        let log_mod = match eval.precision_loss {
            Some(bound) => eval.value.log_mod.max(bound),
            None => eval.value.log_mod,
        };
        Ok((2.0 * (log_mod - log_g)).exp().min(1.0))
    };
    Ok(2.0 * adaptive_simpson(&mut f, 0.0, std::f64::consts::PI, 1e-10)?)
}

/// Boundedness functional for the inner-integral claim:
/// A(R) sqrt(b(R)) / (4 pi^2 G(R)^2) = q(R) sqrt(b(R)) / (4 pi^2 / (2 pi)).
pub fn verify_claim1(spec: &KernelSpec, radius: f64) -> Result<f64> {
    let b = spec.b_of(radius)?;
    let q = normalized_angular_mass(spec, radius)?;
    // A = 2 pi * q' with q' = q G^2 ... A sqrt(b) / (4 pi^2 G^2) collapses to
    // q sqrt(b) / (2 pi).
    Ok(q * b.sqrt() / (2.0 * std::f64::consts::PI))
}

/// Slack of the normalized-kernel bound for 0 < r <= s:
/// -log^2(s/r) * min b - log( G^2(L^2 r s) / (G(L^2 r^2) G(L^2 s^2)) ).
/// Nonnegative when the bound holds; exactly zero at r = s.
pub fn verify_claim2(spec: &KernelSpec, l: f64, r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0 && s >= r) {
        return Err(Error::InvalidInput(format!(
            "need 0 < r <= s, got r={r}, s={s}"
        )));
    }
    let l2 = l * l;
    let lhs = 2.0 * spec.log_g(l2 * r * s)? - spec.log_g(l2 * r * r)? - spec.log_g(l2 * s * s)?;
    let lo = l2 * r * r;
    let hi = l2 * s * s;
    let mut min_b = f64::INFINITY;
    // 64 log-spaced interior points plus both endpoints.
    for i in 0..=65 {
        let x = if i == 0 {
            lo
        } else if i == 65 {
            hi
        } else {
            (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / 65.0).exp()
        };
        let b = spec.b_of(x)?;
        if b < min_b {
            min_b = b;
        }
    }
    let log_ratio = (s / r).ln();
    Ok(-log_ratio * log_ratio * min_b - lhs)
}

/// Convexity of t -> log G(e^t) on a uniform grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvexityCheck {
    /// Minimal centered second difference.
    pub min_second_difference: f64,
    /// max |log G| over the grid, the natural scale for the tolerance.
    pub scale: f64,
}

pub fn check_log_convexity(spec: &KernelSpec, t_grid: &[f64]) -> Result<ConvexityCheck> {
    if t_grid.len() < 64 {
        return Err(Error::GridTooSmall(format!(
            "convexity grid needs >= 64 points, got {}",
            t_grid.len()
        )));
    }
    let h = t_grid[1] - t_grid[0];
    if t_grid
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs())
    {
        return Err(Error::GridTooSmall("convexity grid must be uniform".into()));
    }
    let g: Vec<f64> = t_grid
        .iter()
        .map(|&t| spec.log_g(t.exp()))
        .collect::<Result<_>>()?;
    let scale = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut min_dd = f64::INFINITY;
    for i in 1..g.len() - 1 {
        let dd = g[i + 1] - 2.0 * g[i] + g[i - 1];
        if dd < min_dd {
            min_dd = dd;
        }
    }
    Ok(ConvexityCheck {
        min_second_difference: min_dd,
        scale,
    })
}

/// Per-r admissibility diagnostics plus the global convexity and growth
/// flags. Deterministic given the spec and grids.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub family: String,
    pub r_grid: Vec<f64>,
    pub delta_hat: Vec<f64>,
    pub major_arc_err: Vec<f64>,
    pub minor_arc_ratio: Vec<f64>,
    pub minor_arc_ratio_quartic: Vec<f64>,
    pub convexity_min: f64,
    pub convexity_scale: f64,
    pub b_divergent: bool,
}

pub fn admissibility_report(
    spec: &KernelSpec,
    r_grid: &[f64],
    t_grid: &[f64],
) -> Result<AdmissibilityReport> {
    if r_grid.is_empty() {
        return Err(Error::GridTooSmall("empty r grid".into()));
    }
    let mut delta_hat = Vec::with_capacity(r_grid.len());
    let mut major = Vec::with_capacity(r_grid.len());
    let mut minor = Vec::with_capacity(r_grid.len());
    let mut minor_q = Vec::with_capacity(r_grid.len());
    let mut q_trend = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let d = estimate_delta(spec, r)?;
        delta_hat.push(d);
        major.push(check_major_arc(spec, r, d)?);
        minor.push(check_minor_arc(spec, r, d)?);
        minor_q.push(check_minor_arc_quartic(spec, r, d)?);
        q_trend.push(spec.b_of(r)?.ln() / r.ln());
    }
    let conv = check_log_convexity(spec, t_grid)?;
    let tail = &q_trend[q_trend.len() / 2..];
    let b_divergent = tail.len() >= 2
        && tail.windows(2).all(|w| w[1] > w[0])
        && tail[tail.len() - 1] - tail[0] > 0.5;
    Ok(AdmissibilityReport {
        family: spec.family().to_string(),
        r_grid: r_grid.to_vec(),
        delta_hat,
        major_arc_err: major,
        minor_arc_ratio: minor,
        minor_arc_ratio_quartic: minor_q,
        convexity_min: conv.min_second_difference,
        convexity_scale: conv.scale,
        b_divergent,
    })
}

/// Default diagnostic r-grid per family, sized so the series stays under the
/// term cap; families with closed forms go much farther out.
pub fn default_r_grid(spec: &KernelSpec) -> Vec<f64> {
    use crate::kernel::KernelFamily::*;
    match spec.family() {
        Gef => vec![1e4, 4e4, 1.6e5, 6.4e5, 2.56e6],
        // Past r ~ 30 the major-arc metric saturates at the floating-point
        // floor eps * e^r of the closed form; stay below it.
        DoubleExp => vec![3.5, 7.0, 14.0, 28.0],
        MittagLeffler { alpha } => {
            let r_max = (1.2e5 / alpha).powf(1.0 / alpha);
            vec![r_max / 8.0, r_max / 4.0, r_max / 2.0, r_max]
        }
        Lindelof { alpha } => {
            // The Lindelof series needs ~exp(r^{1/alpha}) terms; keep the
            // grid under the hard cap with margin.
            let r_max = 11.0f64.powf(*alpha);
            vec![r_max / 8.0, r_max / 4.0, r_max / 2.0, r_max]
        }
        Custom { .. } => vec![1.0, 2.0, 4.0, 8.0],
    }
}

/// Default uniform grid for the convexity check, matched to the family's
/// feasible argument range.
pub fn default_t_grid(spec: &KernelSpec) -> Vec<f64> {
    use crate::kernel::KernelFamily::*;
    let t_max = match spec.family() {
        Gef => 8.0,
        DoubleExp => 6.0,
        MittagLeffler { alpha } => ((1.2e5 / alpha).powf(1.0 / alpha)).ln(),
        Lindelof { alpha } => 11.0f64.powf(*alpha).ln(),
        Custom { .. } => 2.0,
    };
    let n = 96;
    (0..n)
        .map(|i| -2.0 + (t_max + 2.0) * i as f64 / (n - 1) as f64)
        .collect()
}
