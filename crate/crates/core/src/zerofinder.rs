//! Zeros of a sampled function inside a disk, with the count certified
//! independently by the argument principle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logdomain::wrap_angle;
use crate::poly::LogPolynomial;
use crate::sampler::SampledFunction;

/// Residual certificate threshold: |f(z)| / sqrt(G(|z|^2)) at every reported
/// zero must stay below this.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Zeros of one realization inside a disk.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    pub points: Vec<Complex64>,
    /// The contour radius actually used (perturbed off zeros if needed).
    pub disk_radius: f64,
    /// Per-zero |f(z_j)| / sqrt(G(|z_j|^2)).
    pub residuals: Vec<f64>,
    /// Independent count from the argument principle; always equals
    /// `points.len()`.
    pub certified_count: usize,
    pub sample_seed: u64,
}

/// Winding-number certificate for the zero count in |z| <= radius.
#[derive(Debug, Clone, Copy)]
pub struct CertifiedCount {
    pub count: usize,
    /// Radius after perturbing the contour off nearby zeros.
    pub radius_used: f64,
    /// Distance of the raw phase integral from its rounding.
    pub integer_distance: f64,
}

/// All zeros of the truncated series with |z| <= radius.
///
/// Roots come from Aberth-Ehrlich iteration started on max-term circles and
/// are polished by Newton on the exact truncated series; the count is
/// cross-checked against the argument principle on the same contour.
pub fn zeros_in_disk(f: &SampledFunction, radius: f64) -> Result<ZeroSet> {
    if radius > f.valid_radius() * (1.0 + 1e-9) {
        return Err(Error::InvalidInput(format!(
            "requested disk radius {radius} exceeds validity radius {}",
            f.valid_radius()
        )));
    }
    let lp = f.log_polynomial();
    let degree = lp.len() - 1;
    let sweeps = 120 + (degree as f64).sqrt() as u32 * 4;
    let ab = lp.find_roots(sweeps)?;

    // Newton-polish everything near the disk; the residual certificates and
    // the argument-principle count below are the actual acceptance gate.
    let mut roots = Vec::with_capacity(ab.roots.len());
    for &w in ab.roots.iter() {
        if w.norm() <= 1.6 * radius {
            roots.push(lp.polish(w, 16).0);
        } else {
            roots.push(w);
        }
    }

    // Candidate contour radii in [R, 1.001 R], best gap to a root modulus
    // first; the winding integral then runs on a circle far from every zero.
    let mut candidates: Vec<(f64, f64)> = (0..33)
        .map(|k| {
            let cand = radius * (1.0 + k as f64 * (1e-3 / 32.0));
            let gap = roots
                .iter()
                .map(|z| (z.norm() - cand).abs())
                .fold(f64::INFINITY, f64::min);
            (gap, cand)
        })
        .collect();
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    if candidates[0].0 <= 1e-9 * radius {
        return Err(Error::ContourThroughZero { retries: 5 });
    }

    let mut chosen = None;
    for (_, cand) in candidates.iter().take(5) {
        if let Some(cert) = winding_count(f, &lp, *cand)? {
            chosen = Some(cert);
            break;
        }
    }
    let cert = chosen.ok_or(Error::ContourThroughZero { retries: 5 })?;
    let radius_used = cert.radius_used;

    let mut points: Vec<Complex64> = roots
        .into_iter()
        .filter(|z| z.norm() <= radius_used)
        .collect();
    points.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });

    let mut residuals = Vec::with_capacity(points.len());
    for &z in &points {
        let res = f.normalized_residual(z)?;
        if res > RESIDUAL_TOL {
            return Err(Error::RootFindingStalled(format!(
                "residual {res:.3e} at {z} exceeds {RESIDUAL_TOL:.0e}"
            )));
        }
        residuals.push(res);
    }

    if cert.count != points.len() {
        return Err(Error::RootFindingStalled(format!(
            "argument principle counts {} zeros in |z| <= {radius_used} but {} roots were located",
            cert.count,
            points.len()
        )));
    }

    Ok(ZeroSet {
        points,
        disk_radius: radius_used,
        residuals,
        certified_count: cert.count,
        sample_seed: f.seed(),
    })
}

/// Zero count in |z| <= radius by the winding number of f along the circle,
/// retrying on slightly larger contours when a zero sits on the circle.
pub fn count_via_argument_principle(f: &SampledFunction, radius: f64) -> Result<CertifiedCount> {
    let lp = f.log_polynomial();
    certify_count(f, &lp, radius)
}

fn certify_count(f: &SampledFunction, lp: &LogPolynomial, radius: f64) -> Result<CertifiedCount> {
    for attempt in 0..5u32 {
        let cand = radius * (1.0 + attempt as f64 * 2.5e-4);
        if cand > f.valid_radius() * (1.0 + 2e-3) {
            // Perturbations must stay inside the trustworthy disk.
            return Err(Error::ContourThroughZero { retries: attempt });
        }
        if let Some(cert) = winding_count(f, lp, cand)? {
            return Ok(cert);
        }
    }
    Err(Error::ContourThroughZero { retries: 5 })
}

/// Phase-increment trapezoid: sample arg f on the circle, refine until no
/// step wraps ambiguously, and round the total increment. Returns None when
/// refinement stalls (likely a zero on or next to the contour).
fn winding_count(
    f: &SampledFunction,
    lp: &LogPolynomial,
    radius: f64,
) -> Result<Option<CertifiedCount>> {
    let degree = lp.len() - 1;
    let log_scale = 0.5 * f.spec().log_g(radius * radius)?;
    // The total phase advance is ~2 pi * count <= 2 pi * degree, so fewer
    // than ~4 * degree points can never satisfy the step criterion.
    let m0 = (4 * degree.max(64)).next_power_of_two();
    let cap = (m0 * 8).max(((4e8 / degree.max(1) as f64) as usize).min(1 << 20));
    let near_zero_log = (1e-13f64).ln();
    let eval_phase = |theta: f64| -> Option<f64> {
        let v = lp.eval_log(Complex64::from_polar(radius, theta));
        if v.log_mod - log_scale < near_zero_log {
            None
        } else {
            Some(v.arg)
        }
    };
    let mut m = m0;
    let mut phases = Vec::with_capacity(m);
    for j in 0..m {
        match eval_phase(2.0 * std::f64::consts::PI * j as f64 / m as f64) {
            Some(p) => phases.push(p),
            None => return Ok(None),
        }
    }
    // Accept only when the steps are unambiguous AND the rounded winding
    // agrees with the previous resolution: a zero pair straddling the
    // contour can alias a full turn while each step still looks small.
    let mut prev_rounded: Option<f64> = None;
    loop {
        let mut total = 0.0f64;
        let mut max_step = 0.0f64;
        for j in 0..m {
            let d = wrap_angle(phases[(j + 1) % m] - phases[j]);
            max_step = max_step.max(d.abs());
            total += d;
        }
        let raw = total / (2.0 * std::f64::consts::PI);
        let rounded = raw.round();
        if max_step <= std::f64::consts::FRAC_PI_3
            && (raw - rounded).abs() <= 0.1
            && rounded >= 0.0
            && prev_rounded == Some(rounded)
        {
            return Ok(Some(CertifiedCount {
                count: rounded as usize,
                radius_used: radius,
                integer_distance: (raw - rounded).abs(),
            }));
        }
        prev_rounded = (max_step <= std::f64::consts::FRAC_PI_2).then_some(rounded);
        if m * 2 > cap {
            return Ok(None);
        }
        // Double the resolution, reusing every already-computed phase.
        let mut next = Vec::with_capacity(2 * m);
        for j in 0..m {
            next.push(phases[j]);
            match eval_phase(std::f64::consts::PI * (2 * j + 1) as f64 / m as f64) {
                Some(p) => next.push(p),
                None => return Ok(None),
            }
        }
        phases = next;
        m *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::sampler::SampledFunction;

    #[test]
    fn linear_sample_single_zero() {
        // A degree-1 truncation has its zero at -c0/c1.
        let spec = KernelSpec::gef();
        let f = SampledFunction::sample(&spec, 1, 4242).unwrap();
        let c0 = f.gaussians()[0] * (0.5 * spec.log_sq_coeff(0)).exp();
        let c1 = f.gaussians()[1] * (0.5 * spec.log_sq_coeff(1)).exp();
        let root = -c0 / c1;
        let r = f.valid_radius();
        let zs = zeros_in_disk(&f, r).unwrap();
        if root.norm() <= r {
            assert_eq!(zs.points.len(), 1);
            assert!((zs.points[0] - root).norm() < 1e-10);
        } else {
            assert!(zs.points.is_empty());
        }
        assert_eq!(zs.points.len(), zs.certified_count);
    }

    #[test]
    fn triple_zero_at_origin_counted() {
        // Kernel with a_0 = a_1 = a_2 = 0: every realization vanishes to
        // third order at the origin.
        let spec = KernelSpec::custom_rule_unchecked("origin-cubed", |n| {
            if n < 3 {
                f64::NEG_INFINITY
            } else {
                -libm::lgamma(n as f64 + 1.0)
            }
        });
        let f = SampledFunction::sample_in_disk(&spec, 1.0, 1e-12, 31).unwrap();
        let count = count_via_argument_principle(&f, 0.35).unwrap();
        let zs = zeros_in_disk(&f, 0.35).unwrap();
        assert_eq!(zs.points.len(), count.count);
        assert!(count.count >= 3, "count = {}", count.count);
        let at_origin = zs.points.iter().filter(|z| z.norm() < 1e-12).count();
        assert_eq!(at_origin, 3);
    }

    #[test]
    fn certified_count_matches_roots_on_many_samples() {
        let spec = KernelSpec::gef();
        for seed in 0..60 {
            let f = SampledFunction::sample_in_disk(&spec, 2.5, 1e-12, 9000 + seed).unwrap();
            let zs = zeros_in_disk(&f, 2.5).unwrap();
            assert_eq!(zs.points.len(), zs.certified_count, "seed {seed}");
            for (&z, &res) in zs.points.iter().zip(zs.residuals.iter()) {
                assert!(z.norm() <= zs.disk_radius * (1.0 + 1e-12));
                assert!(res <= RESIDUAL_TOL);
            }
        }
    }

    #[test]
    fn residuals_sharp_after_polish() {
        let spec = KernelSpec::gef();
        let mut total = 0usize;
        let mut sharp = 0usize;
        for seed in 0..40 {
            let f = SampledFunction::sample_in_disk(&spec, 2.0, 1e-12, 70_000 + seed).unwrap();
            let zs = zeros_in_disk(&f, 2.0).unwrap();
            for &res in &zs.residuals {
                total += 1;
                if res <= 1e-10 {
                    sharp += 1;
                }
            }
        }
        assert!(total > 50);
        assert!(
            sharp as f64 >= 0.99 * total as f64,
            "{sharp}/{total} residuals below 1e-10"
        );
    }

    #[test]
    fn count_stable_under_radius_perturbation() {
        let spec = KernelSpec::gef();
        let f = SampledFunction::sample_in_disk(&spec, 2.2, 1e-12, 1234).unwrap();
        let zs = zeros_in_disk(&f, 2.0).unwrap();
        // Gap to the nearest root modulus around R = 2.
        let gap = zs
            .points
            .iter()
            .map(|z| (z.norm() - 2.0).abs())
            .fold(f64::INFINITY, f64::min)
            .min(0.05);
        let lo = zeros_in_disk(&f, 2.0 - 0.3 * gap).unwrap();
        let hi = zeros_in_disk(&f, 2.0 + 0.3 * gap).unwrap();
        assert_eq!(lo.points.len(), zs.points.len());
        assert_eq!(hi.points.len(), zs.points.len());
    }

    #[test]
    fn mean_count_tracks_intensity() {
        // E[#zeros in |z| <= R] = a(R^2) = R^2 for the flat kernel; smoke
        // version with 1500 samples at R = 1.5 (the acceptance suite runs the
        // full-size version).
        let spec = KernelSpec::gef();
        let trials = 1500;
        let r = 1.5f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for seed in 0..trials {
            let f = SampledFunction::sample_in_disk(&spec, r, 1e-12, 40_000 + seed).unwrap();
            let c = zeros_in_disk(&f, r).unwrap().points.len() as f64;
            sum += c;
            sum_sq += c * c;
        }
        let mean = sum / trials as f64;
        let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        let want = r * r;
        assert!(
            (mean - want).abs() <= 3.0 * se,
            "mean {mean} vs {want} (se {se})"
        );
    }
}
