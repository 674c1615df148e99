//! Test functions and the two independent estimators of Var(int Phi dZ):
//! Monte Carlo over sampled zero sets, and direct quadrature of the
//! covariance-kernel double integral.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dilog::li2;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::logdomain::wrap_angle;
use crate::quadrature::{adaptive_simpson, gauss_legendre_12};
use crate::rng::derive_seed;
use crate::sampler::SampledFunction;
use crate::zerofinder::{zeros_in_disk, ZeroSet};

/// C^2 radial cutoff: 1 on [0,1], 0 from exp(1/eta) on, glued by a quintic
/// smoothstep in t = eta log r. Returns (value, d/dr, d^2/dr^2).
///
/// With this profile |phi'| <= 1.875 eta / r and |phi''| <= 7.649 eta / r^2
/// for eta <= 1, comfortably inside the constant 8 used by the variance
/// bound.
pub fn bump(eta: f64, r: f64) -> (f64, f64, f64) {
    debug_assert!(eta > 0.0 && r >= 0.0);
    if r <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let t = eta * r.ln();
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let t2 = t * t;
    let s = t2 * t * (6.0 * t2 - 15.0 * t + 10.0);
    let ds = 30.0 * t2 * (t2 - 2.0 * t + 1.0);
    let dss = t * (120.0 * t2 - 180.0 * t + 60.0);
    let value = 1.0 - s;
    let d1 = -ds * eta / r;
    let d2 = (-dss * eta * eta + ds * eta) / (r * r);
    (value, d1, d2)
}

/// The test function Phi(z) = z^k phi_eta(|z|/L): equal to z^k on the closed
/// disk of radius L, vanishing outside radius L exp(1/eta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub k: u32,
    pub eta: f64,
    pub l: f64,
}

impl TestFunction {
    /// eta > 0 and L >= 1. The derivative bounds quoted for the bump hold for
    /// eta <= 1, which is the regime of the variance bound; larger eta keeps
    /// the support narrow and is used by the feasible fully-rigid runs.
    pub fn new(k: u32, eta: f64, l: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
        }
        if !(l >= 1.0) || !l.is_finite() {
            return Err(Error::InvalidInput(format!("L must be >= 1, got {l}")));
        }
        Ok(TestFunction { k, eta, l })
    }

    /// Outer support radius L exp(1/eta).
    pub fn support_radius(&self) -> f64 {
        self.l * (1.0 / self.eta).exp()
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        let x = z.norm() / self.l;
        if x >= (1.0 / self.eta).exp() {
            return Complex64::new(0.0, 0.0);
        }
        let (phi, _, _) = bump(self.eta, x);
        z.powu(self.k) * phi
    }

    /// Laplacian from the polar form: r^{k-2} e^{ik theta}
    /// [(2k+1)(r/L) phi' + (r/L)^2 phi''], identically zero off the annulus.
    pub fn laplacian(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        let x = r / self.l;
        if x <= 1.0 || x >= (1.0 / self.eta).exp() {
            return Complex64::new(0.0, 0.0);
        }
        let (_, d1, d2) = bump(self.eta, x);
        let radial = (2.0 * self.k as f64 + 1.0) * x * d1 + x * x * d2;
        let rk2 = r.powi(self.k as i32 - 2);
        Complex64::from_polar(1.0, self.k as f64 * z.arg()) * (rk2 * radial)
    }

    /// Radial Laplacian factor in the log-radius variable u = log(r/L):
    /// Delta Phi = r^{k-2} e^{ik theta} * radial_factor(u).
    fn radial_factor(&self, u: f64) -> f64 {
        let t = self.eta * u;
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let t2 = t * t;
        let ds = 30.0 * t2 * (t2 - 2.0 * t + 1.0);
        let dss = t * (120.0 * t2 - 180.0 * t + 60.0);
        // (2k+1) x phi' + x^2 phi'' collapses to -2k s' eta - s'' eta^2.
        -2.0 * self.k as f64 * ds * self.eta - dss * self.eta * self.eta
    }
}

/// Sum of Phi over the zeros of one realization.
pub fn linear_statistic(zs: &ZeroSet, tf: &TestFunction) -> Result<Complex64> {
    let support = tf.support_radius();
    if zs.disk_radius < support * (1.0 - 1e-9) {
        return Err(Error::SupportExceedsValidity {
            support,
            validity: zs.disk_radius,
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &z in &zs.points {
        acc += tf.value(z);
    }
    Ok(acc)
}

/// E[int Phi dZ]: zero for k >= 1 by rotation invariance; for k = 0 it is
/// a(L^2) plus the radial integral of the cutoff ramp against the intensity.
pub fn expected_statistic(spec: &KernelSpec, tf: &TestFunction) -> Result<Complex64> {
    if tf.k >= 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let inner = spec.a_of(tf.l * tf.l)?;
    // 2 int phi(r/L) b(r^2)/r dr = int phi b du over u = log r.
    let lo = tf.l.ln();
    let hi = lo + 1.0 / tf.eta;
    let mut integrand = |u: f64| -> Result<f64> {
        let r = u.exp();
        let (phi, _, _) = bump(tf.eta, r / tf.l);
        if phi == 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * phi * spec.b_of(r * r)?)
    };
    let ramp = refine_gl(&mut integrand, lo, hi, 1e-11)?;
    Ok(Complex64::new(inner + ramp, 0.0))
}

/// Panel Gauss-Legendre with doubling refinement to a relative tolerance.
fn refine_gl<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut prev = f64::NAN;
    let mut panels = 8;
    loop {
        let v = crate::quadrature::panel_gl_integrate(f, a, b, panels)?;
        if prev.is_finite() && (v - prev).abs() <= rel_tol * v.abs().max(1e-300) {
            return Ok(v);
        }
        prev = v;
        panels *= 2;
        if panels > 4096 {
            return Err(Error::NoConvergence(
                "radial quadrature refinement exhausted".into(),
            ));
        }
    }
}

/// Monte-Carlo variance of the linear statistic with jackknife standard
/// error. Returns (variance, stderr, mean).
pub fn variance_mc(
    spec: &KernelSpec,
    tf: &TestFunction,
    trials: u32,
    seed: u64,
) -> Result<(f64, f64, Complex64)> {
    if trials < 100 {
        return Err(Error::InvalidInput(format!(
            "variance_mc needs at least 100 trials, got {trials}"
        )));
    }
    let stats = statistics_over_trials(spec, tf, trials, seed)?;
    Ok(complex_variance_jackknife(&stats))
}

/// The per-trial statistics S_t = sum Phi(z) over the zeros of independent
/// realizations; deterministic in (seed, trial index) regardless of thread
/// count.
pub fn statistics_over_trials(
    spec: &KernelSpec,
    tf: &TestFunction,
    trials: u32,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let support = tf.support_radius();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = SampledFunction::sample_in_disk(spec, support, 1e-12, derive_seed(seed, t as u64))?;
            let zs = zeros_in_disk(&f, support)?;
            linear_statistic(&zs, tf)
        })
        .collect()
}

/// Sample variance E|S - mean|^2 with jackknife stderr for the variance
/// statistic itself.
pub fn complex_variance_jackknife(stats: &[Complex64]) -> (f64, f64, Complex64) {
    let t = stats.len() as f64;
    let m: Complex64 = stats.iter().sum::<Complex64>() / t;
    let q: f64 = stats.iter().map(|s| s.norm_sqr()).sum();
    let msum: Complex64 = stats.iter().sum();
    let var = ((q - msum.norm_sqr() / t) / (t - 1.0)).max(0.0);
    let mut jack = Vec::with_capacity(stats.len());
    for s in stats {
        let qi = q - s.norm_sqr();
        let mi = msum - s;
        let vi = ((qi - mi.norm_sqr() / (t - 1.0)) / (t - 2.0)).max(0.0);
        jack.push(vi);
    }
    let jm: f64 = jack.iter().sum::<f64>() / t;
    let se = ((t - 1.0) / t * jack.iter().map(|v| (v - jm) * (v - jm)).sum::<f64>()).sqrt();
    (var, se, m)
}

/// Angular evaluator of log |G(rs e^{i theta})| with the series prefix cached
/// per modulus, so the theta scans inside the variance quadrature do not
/// re-run the adaptive series.
enum AngularEval {
    Closed,
    Series {
        max_log: f64,
        weights: Vec<f64>,
        total: f64,
    },
}

impl AngularEval {
    fn new(spec: &KernelSpec, rs: f64) -> Result<Self> {
        if spec.closed_log_g(rs).is_some() && spec.log_g_complex(rs, 0.1).is_ok() {
            // Families with a complex closed form take the direct route.
            match spec.family() {
                crate::kernel::KernelFamily::Gef | crate::kernel::KernelFamily::DoubleExp => {
                    return Ok(AngularEval::Closed)
                }
                _ => {}
            }
        }
        let terms = spec.series_terms(
            if rs == 0.0 { f64::NEG_INFINITY } else { rs.ln() },
            &format!("angular kernel at rs = {rs}"),
        )?;
        Ok(AngularEval::Series {
            max_log: terms.max_log,
            weights: terms.weights,
            total: terms.total,
        })
    }

    /// log |G(rs e^{i theta})|; falls back to the spec for closed forms.
    fn log_mod(&self, spec: &KernelSpec, rs: f64, theta: f64) -> Result<f64> {
        match self {
            AngularEval::Closed => Ok(spec.log_g_complex(rs, theta)?.value.log_mod),
            AngularEval::Series {
                max_log,
                weights,
                total,
            } => {
                if theta == 0.0 {
                    return Ok(max_log + total.ln());
                }
                let step = Complex64::from_polar(1.0, theta);
                let mut rot = Complex64::new(1.0, 0.0);
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, &w) in weights.iter().enumerate() {
                    if n > 0 {
                        if n % 512 == 0 {
                            rot = Complex64::from_polar(1.0, wrap_angle(n as f64 * theta));
                        } else {
                            rot *= step;
                        }
                    }
                    if w > 1e-20 {
                        acc += w * rot;
                    }
                }
                let norm = acc.norm();
                if norm == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok((max_log + norm.ln()).min(max_log + total.ln()))
            }
        }
    }
}

/// Var(int Phi dZ) by quadrature of the covariance-kernel integral
///
///   (1/4pi^2) iint dPhi(z) conj(dPhi(w)) * (1/4) Li2(|J(z,w)|^2) dm dm,
///
/// collapsed by rotation invariance to a double integral in log radii with an
/// inner adaptive angular integral. Tensor Gauss-Legendre panels are refined
/// until two successive refinements agree to 1e-3 relative.
pub fn variance_quadrature(spec: &KernelSpec, tf: &TestFunction) -> Result<f64> {
    let mut prev = f64::NAN;
    let mut panels = 4usize;
    loop {
        let v = variance_quadrature_at(spec, tf, panels)?;
        if prev.is_finite() {
            if (v - prev).abs() <= 1e-3 * v.abs().max(1e-300) {
                return Ok(v.max(0.0));
            }
            if v.abs() < 1e-30 && prev.abs() < 1e-30 {
                return Ok(0.0);
            }
        }
        prev = v;
        panels *= 2;
        if panels > 128 {
            return Err(Error::NoConvergence(
                "variance quadrature refinement stalled".into(),
            ));
        }
    }
}

fn variance_quadrature_at(spec: &KernelSpec, tf: &TestFunction, panels: usize) -> Result<f64> {
    let (nodes, weights) = gauss_legendre_12();
    let width = 1.0 / tf.eta;
    let h = width / panels as f64;
    // Nodes in u = log(r/L) over (0, 1/eta).
    let mut us = Vec::with_capacity(panels * nodes.len());
    let mut wq = Vec::with_capacity(us.capacity());
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            us.push(mid + 0.5 * h * x);
            wq.push(w * 0.5 * h);
        }
    }
    let m = us.len();
    let rs: Vec<f64> = us.iter().map(|u| tf.l * u.exp()).collect();
    let mut log_g_sq = Vec::with_capacity(m);
    for &r in &rs {
        log_g_sq.push(spec.log_g(r * r)?);
    }
    // Full weight of a node: quadrature weight * r^k * radial factor.
    let k = tf.k as f64;
    let eff: Vec<f64> = (0..m)
        .map(|i| wq[i] * rs[i].powf(k) * tf.radial_factor(us[i]))
        .collect();

    let theta_tol = 1e-7;
    let mut total = 0.0f64;
    for i in 0..m {
        if eff[i] == 0.0 {
            continue;
        }
        for j in 0..=i {
            if eff[j] == 0.0 {
                continue;
            }
            let prod = rs[i] * rs[j];
            let ang = AngularEval::new(spec, prod)?;
            let denom = log_g_sq[i] + log_g_sq[j];
            let mut f = |theta: f64| -> Result<f64> {
                let lm = ang.log_mod(spec, prod, theta)?;
                let j2 = (2.0 * lm - denom).exp().min(1.0);
                Ok((k * theta).cos() * li2(j2))
            };
            let c = 2.0 * adaptive_simpson(&mut f, 0.0, std::f64::consts::PI, theta_tol)?;
            let contrib = eff[i] * eff[j] * c;
            total += if i == j { contrib } else { 2.0 * contrib };
        }
    }
    Ok(total / (8.0 * std::f64::consts::PI))
}

/// Numerical value of the variance bound
/// C (k+1)^2 eta^2 L^{2(k-1)} I_L, with the displayed double integral I_L
/// evaluated by the same panel scheme and the constant instantiated for the
/// quintic bump cascade.
pub fn variance_bound(spec: &KernelSpec, tf: &TestFunction) -> Result<f64> {
    // |Delta Phi| <= 16 (k+1) eta |z|^{k-2} for eta <= 1, and the loglog
    // kernel is at most |J|^2 / 2: C = (1/8 pi^2) * 16^2 = 32 / pi^2.
    let c = 32.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let k = tf.k as f64;
    let i_l = bound_integral(spec, tf)?;
    Ok(c * (k + 1.0) * (k + 1.0)
        * tf.eta
        * tf.eta
        * tf.l.powf(2.0 * (k - 1.0))
        * i_l)
}

/// I_L = iint chi(r) chi(s) A(L^2 r s) / (G(L^2 r^2) G(L^2 s^2)) r s dr ds
/// with chi(r) = r^{k-2} on [1, e^{1/eta}], evaluated in log coordinates.
fn bound_integral(spec: &KernelSpec, tf: &TestFunction) -> Result<f64> {
    let mut prev = f64::NAN;
    let mut panels = 4usize;
    loop {
        let v = bound_integral_at(spec, tf, panels)?;
        if prev.is_finite() && (v - prev).abs() <= 1e-3 * v.abs().max(1e-300) {
            return Ok(v);
        }
        prev = v;
        panels *= 2;
        if panels > 64 {
            return Err(Error::NoConvergence("I_L refinement stalled".into()));
        }
    }
}

fn bound_integral_at(spec: &KernelSpec, tf: &TestFunction, panels: usize) -> Result<f64> {
    let (nodes, weights) = gauss_legendre_12();
    let width = 1.0 / tf.eta;
    let h = width / panels as f64;
    let l2 = tf.l * tf.l;
    let mut us = Vec::new();
    let mut wq = Vec::new();
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            us.push(mid + 0.5 * h * x);
            wq.push(w * 0.5 * h);
        }
    }
    let m = us.len();
    let k = tf.k as f64;
    // chi(r) r dr = r^k du in u = log r over [0, 1/eta].
    let rk: Vec<f64> = us.iter().map(|u| (k * u).exp()).collect();
    let mut log_g_sq = Vec::with_capacity(m);
    for &u in &us {
        let r = u.exp();
        log_g_sq.push(spec.log_g(l2 * r * r)?);
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..=i {
            let prod = l2 * (us[i] + us[j]).exp();
            let log_g_prod = spec.log_g(prod)?;
            let ang = AngularEval::new(spec, prod)?;
            // q = int over theta of |G(prod e^{i t})|^2 / G(prod)^2.
            let mut f = |theta: f64| -> Result<f64> {
                let lm = ang.log_mod(spec, prod, theta)?;
                Ok((2.0 * (lm - log_g_prod)).exp().min(1.0))
            };
            let q = 2.0 * adaptive_simpson(&mut f, 0.0, std::f64::consts::PI, 1e-9)?;
            // A = 2 pi q G(prod)^2; integrand = chi chi A / (G G) r s.
            let val = 2.0 * std::f64::consts::PI
                * q
                * (2.0 * log_g_prod - log_g_sq[i] - log_g_sq[j]).exp();
            let contrib = wq[i] * wq[j] * rk[i] * rk[j] * val;
            total += if i == j { contrib } else { 2.0 * contrib };
        }
    }
    Ok(total)
}

/// Full report tying the three variance routes together.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceReport {
    pub family: String,
    pub k: u32,
    pub eta: f64,
    pub l: f64,
    pub trials: u32,
    pub seed: u64,
    pub mc_estimate: f64,
    pub mc_stderr: f64,
    pub mc_mean_re: f64,
    pub mc_mean_im: f64,
    pub quadrature_value: f64,
    pub bound_value: f64,
}

pub fn variance_report(
    spec: &KernelSpec,
    tf: &TestFunction,
    trials: u32,
    seed: u64,
) -> Result<VarianceReport> {
    let (mc, se, mean) = variance_mc(spec, tf, trials, seed)?;
    let quad = variance_quadrature(spec, tf)?;
    let bound = variance_bound(spec, tf)?;
    Ok(VarianceReport {
        family: spec.family().to_string(),
        k: tf.k,
        eta: tf.eta,
        l: tf.l,
        trials,
        seed,
        mc_estimate: mc,
        mc_stderr: se,
        mc_mean_re: mean.re,
        mc_mean_im: mean.im,
        quadrature_value: quad,
        bound_value: bound,
    })
}
