//! Sampling realizations of f(z) = sum xi_n a_n z^n and controlling the
//! truncation so zeros inside a target disk are trustworthy.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, COEFF_FLUSH_LOG, MAX_SERIES_TERMS};
use crate::logdomain::LogComplex;
use crate::poly::LogPolynomial;
use crate::rng::complex_gaussian;

/// Default relative tail tolerance used when a sample is constructed for a
/// target disk.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Smallest truncation degree N such that the coefficient tail beyond N is at
/// most `tail_tol` of G(R^2). Monotone nondecreasing in R.
pub fn truncation_degree(spec: &KernelSpec, radius: f64, tail_tol: f64) -> Result<usize> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "truncation radius must be positive, got {radius}"
        )));
    }
    if !(tail_tol > 0.0 && tail_tol <= 1e-6) {
        return Err(Error::InvalidInput(format!(
            "tail_tol must lie in (0, 1e-6], got {tail_tol}"
        )));
    }
    let terms = spec.series_terms(
        2.0 * radius.ln(),
        &format!("truncation tail at R = {radius}"),
    )?;
    // Suffix sums of the scaled weights; exact in the scaled domain, no
    // log-space cancellation.
    let mut suffix = 0.0f64;
    let budget = tail_tol * terms.total;
    let mut n_keep = terms.weights.len() - 1;
    for n in (0..terms.weights.len()).rev() {
        suffix += terms.weights[n];
        if suffix > budget {
            n_keep = n;
            break;
        }
    }
    if n_keep + 1 >= MAX_SERIES_TERMS {
        return Err(Error::NonConvergent {
            cap: MAX_SERIES_TERMS,
            context: format!("truncation degree at R = {radius}"),
        });
    }
    Ok(n_keep)
}

/// One realization of the random Taylor series, truncated at `degree`.
///
/// Immutable after construction; evaluation is pure. The linear-scale
/// coefficients flush entries with log a_n^2 below the documented floor; the
/// log-domain representation keeps everything.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    spec: KernelSpec,
    xi: Vec<Complex64>,
    seed: u64,
    valid_radius: f64,
    coeffs: Vec<Complex64>,
    log_mod: Vec<f64>,
    phase: Vec<f64>,
}

impl SampledFunction {
    /// Draw a realization valid for zero-finding in |z| <= radius, with the
    /// truncation degree chosen so the relative coefficient tail is below
    /// `tail_tol` there.
    pub fn sample_in_disk(
        spec: &KernelSpec,
        radius: f64,
        tail_tol: f64,
        seed: u64,
    ) -> Result<Self> {
        let degree = truncation_degree(spec, radius, tail_tol)?;
        Self::assemble(spec, degree, seed, radius)
    }

    /// Draw a realization of fixed degree N >= 1. The validity radius is the
    /// largest disk where the dropped tail stays below the default tolerance.
    pub fn sample(spec: &KernelSpec, degree: usize, seed: u64) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidInput("sample needs degree >= 1".into()));
        }
        // Bisect for the validity radius: tail(N, R) / G(R^2) is increasing in R.
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let fits = |r: f64| -> bool {
            truncation_degree(spec, r, DEFAULT_TAIL_TOL)
                .map(|n| n <= degree)
                .unwrap_or(false)
        };
        if !fits(hi) {
            while hi > 1e-6 && !fits(hi) {
                hi *= 0.5;
            }
            lo = 0.0;
        } else {
            while fits(hi * 2.0) && hi < 1e6 {
                lo = hi;
                hi *= 2.0;
            }
            lo = lo.max(hi * 0.5);
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::assemble(spec, degree, seed, lo)
    }

    fn assemble(spec: &KernelSpec, degree: usize, seed: u64, valid_radius: f64) -> Result<Self> {
        let n = degree + 1;
        let mut xi = Vec::with_capacity(n);
        let mut coeffs = Vec::with_capacity(n);
        let mut log_mod = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        for i in 0..n {
            let g = complex_gaussian(seed, 0, i as u64);
            xi.push(g);
            let lsq = spec.log_sq_coeff(i);
            let lm = 0.5 * lsq + g.norm().ln();
            log_mod.push(lm);
            phase.push(if g.norm() == 0.0 { 0.0 } else { g.arg() });
            if lsq < COEFF_FLUSH_LOG {
                coeffs.push(Complex64::new(0.0, 0.0));
            } else {
                coeffs.push(g * (0.5 * lsq).exp());
            }
        }
        Ok(SampledFunction {
            spec: spec.clone(),
            xi,
            seed,
            valid_radius,
            coeffs,
            log_mod,
            phase,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn valid_radius(&self) -> f64 {
        self.valid_radius
    }

    pub fn gaussians(&self) -> &[Complex64] {
        &self.xi
    }

    /// True when an evaluation point is beyond the soft bound 1.5 x the
    /// validity radius, where the truncation is no longer trustworthy.
    pub fn truncation_warning(&self, z: Complex64) -> bool {
        z.norm() > 1.5 * self.valid_radius
    }

    /// Horner evaluation of the truncated series in linear scale.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Derivative by Horner on n * xi_n * a_n.
    pub fn evaluate_d1(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in (1..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[n] * n as f64;
        }
        acc
    }

    /// Log-domain evaluation; usable far outside the linear floating range.
    pub fn evaluate_log(&self, z: Complex64) -> LogComplex {
        self.log_polynomial().eval_log(z)
    }

    /// |f(z)| / sqrt(G(|z|^2)), the residual scale used for zero
    /// certificates, computed fully in log domain.
    pub fn normalized_residual(&self, z: Complex64) -> Result<f64> {
        let v = self.evaluate_log(z);
        let g = self.spec.log_g(z.norm_sqr())?;
        Ok((v.log_mod - 0.5 * g).exp())
    }

    /// The truncation as a log-domain polynomial for root finding.
    pub fn log_polynomial(&self) -> LogPolynomial {
        LogPolynomial::from_log_coeffs(self.log_mod.clone(), self.phase.clone())
    }
}
