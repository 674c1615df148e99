//! Kernel families and evaluation of G, log G, a(r), b(r), the normalized
//! kernel J, the first zero intensity, and the lower-order estimate.
//!
//! All series work happens in log domain: a term of G(r) is carried as
//! `log a_n^2 + n log r`, sums are max-factored, and values like exp(exp(50))
//! never appear in linear scale.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logdomain::{wrap_angle, KahanComplexSum, KahanSum, LogComplex};

/// Hard cap on the adaptive series prefix.
pub const MAX_SERIES_TERMS: usize = 200_000;

/// A term is considered negligible once it is below this fraction of the
/// running maximum; the series stops after 50 consecutive negligible terms.
const LOG_TINY: f64 = -36.841_361_487_904_73; // ln(1e-16)
const TINY_RUN: usize = 50;

/// Coefficients are materialized in linear scale only above this floor.
pub const COEFF_FLUSH_LOG: f64 = -1400.0;

/// The built-in kernel families plus user-supplied coefficient rules.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// a_n^2 = 1/n!, G(z) = e^z.
    Gef,
    /// a_n^2 = 1/Gamma(1 + n/alpha).
    MittagLeffler { alpha: f64 },
    /// G(z) = exp(exp(z)); a_n^2 = e * B_n / n! with B_n the Bell numbers.
    DoubleExp,
    /// a_n^2 = 1/log^{alpha n}(n + e).
    Lindelof { alpha: f64 },
    /// Custom coefficient rule, named for reports.
    Custom { name: String },
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Gef => write!(f, "gef"),
            KernelFamily::MittagLeffler { alpha } => write!(f, "mittag-leffler:{alpha}"),
            KernelFamily::DoubleExp => write!(f, "double-exp"),
            KernelFamily::Lindelof { alpha } => write!(f, "lindelof:{alpha}"),
            KernelFamily::Custom { name } => write!(f, "custom:{name}"),
        }
    }
}

enum CoeffRule {
    Gef,
    MittagLeffler { alpha: f64 },
    DoubleExp { bell: RwLock<BellTriangle> },
    Lindelof { alpha: f64 },
    Table(Vec<f64>),
    Rule(Box<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for CoeffRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRule::Gef => write!(f, "Gef"),
            CoeffRule::MittagLeffler { alpha } => write!(f, "MittagLeffler({alpha})"),
            CoeffRule::DoubleExp { .. } => write!(f, "DoubleExp"),
            CoeffRule::Lindelof { alpha } => write!(f, "Lindelof({alpha})"),
            CoeffRule::Table(t) => write!(f, "Table(len={})", t.len()),
            CoeffRule::Rule(_) => write!(f, "Rule"),
        }
    }
}

/// Bell numbers by the Bell-triangle recurrence, kept in log domain.
///
/// Row n starts with B_n and ends with B_{n+1}; rows are extended on demand.
#[derive(Debug)]
struct BellTriangle {
    log_bell: Vec<f64>,
    row: Vec<f64>,
}

impl BellTriangle {
    fn new() -> Self {
        BellTriangle {
            log_bell: vec![0.0, 0.0], // B_0 = B_1 = 1
            row: vec![0.0],           // row 0 = [1]
        }
    }

    fn ensure(&mut self, n: usize) {
        use crate::logdomain::log_add_exp;
        while self.log_bell.len() <= n {
            let prev = &self.row;
            let mut next = Vec::with_capacity(prev.len() + 1);
            next.push(*prev.last().unwrap());
            for &p in prev.iter() {
                let last = *next.last().unwrap();
                next.push(log_add_exp(last, p));
            }
            self.log_bell.push(*next.last().unwrap());
            self.row = next;
        }
    }
}

#[derive(Debug)]
struct Inner {
    family: KernelFamily,
    rule: CoeffRule,
    cache: RwLock<Vec<f64>>,
}

/// A kernel family: the coefficient sequence a_n^2 of G(z) = sum a_n^2 z^n,
/// plus closed forms where the family admits them.
///
/// Cheap to clone; all operations are pure and safe to call concurrently.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    inner: Arc<Inner>,
}

/// Result of a complex kernel evaluation. When the minor-arc cancellation
/// leaves fewer than 20 significant bits, `precision_loss` carries the log of
/// a certified upper bound on the absolute error and the value should be
/// treated as bounded by it.
#[derive(Debug, Clone, Copy)]
pub struct ComplexEval {
    pub value: LogComplex,
    pub precision_loss: Option<f64>,
}

/// Monotone-trend flag for log b(r) / log r over the tail of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GrowthTrend {
    Finite,
    Diverging,
}

/// Output of [`KernelSpec::lower_order_estimate`].
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LowerOrderEstimate {
    pub estimate: f64,
    pub trend: GrowthTrend,
}

pub(crate) struct SeriesTerms {
    /// Log of the largest term.
    pub max_log: f64,
    /// term_n / max_term for n = 0..len.
    pub weights: Vec<f64>,
    /// Compensated sum of the weights.
    pub total: f64,
}

impl KernelSpec {
    pub fn gef() -> Self {
        Self::build(KernelFamily::Gef, CoeffRule::Gef)
    }

    pub fn mittag_leffler(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "mittag-leffler alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self::build(
            KernelFamily::MittagLeffler { alpha },
            CoeffRule::MittagLeffler { alpha },
        ))
    }

    pub fn double_exp() -> Self {
        Self::build(
            KernelFamily::DoubleExp,
            CoeffRule::DoubleExp {
                bell: RwLock::new(BellTriangle::new()),
            },
        )
    }

    pub fn lindelof(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lindelof alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self::build(
            KernelFamily::Lindelof { alpha },
            CoeffRule::Lindelof { alpha },
        ))
    }

    /// Custom rule mapping n to log a_n^2. Validated with the same prefix
    /// heuristics as the built-in families.
    pub fn custom_rule<F>(name: &str, rule: F) -> Result<Self>
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        let spec = Self::build(
            KernelFamily::Custom { name: name.into() },
            CoeffRule::Rule(Box::new(rule)),
        );
        spec.validate()?;
        Ok(spec)
    }

    /// Custom rule without the transcendentality prefix check. Intended for
    /// degenerate diagnostic specs (for example a single-term kernel).
    pub fn custom_rule_unchecked<F>(name: &str, rule: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self::build(
            KernelFamily::Custom { name: name.into() },
            CoeffRule::Rule(Box::new(rule)),
        )
    }

    /// Custom coefficients from a table of log a_n^2 values.
    pub fn custom_table(name: &str, log_sq: Vec<f64>) -> Result<Self> {
        if log_sq.len() < 2 {
            return Err(Error::InvalidInput(
                "custom coefficient table needs at least two entries".into(),
            ));
        }
        if log_sq.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InvalidInput(
                "custom coefficient table entries must be finite or -inf".into(),
            ));
        }
        Ok(Self::build(
            KernelFamily::Custom { name: name.into() },
            CoeffRule::Table(log_sq),
        ))
    }

    /// Parse a family string: `gef`, `mittag-leffler:{alpha}`, `double-exp`,
    /// `lindelof:{alpha}`, or `custom:{path}` where the path points to a text
    /// file with one log a_n^2 value per line.
    pub fn from_family_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "gef" {
            return Ok(Self::gef());
        }
        if s == "double-exp" {
            return Ok(Self::double_exp());
        }
        if let Some(rest) = s.strip_prefix("mittag-leffler:") {
            let alpha: f64 = rest
                .parse()
                .map_err(|_| Error::Config(format!("bad mittag-leffler alpha: {rest}")))?;
            return Self::mittag_leffler(alpha);
        }
        if let Some(rest) = s.strip_prefix("lindelof:") {
            let alpha: f64 = rest
                .parse()
                .map_err(|_| Error::Config(format!("bad lindelof alpha: {rest}")))?;
            return Self::lindelof(alpha);
        }
        if let Some(path) = s.strip_prefix("custom:") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
            let mut log_sq = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let v: f64 = line
                    .parse()
                    .map_err(|_| Error::Config(format!("{path}:{}: bad value {line}", i + 1)))?;
                log_sq.push(v);
            }
            return Self::custom_table(path, log_sq);
        }
        Err(Error::Config(format!("unknown kernel family: {s}")))
    }

    fn build(family: KernelFamily, rule: CoeffRule) -> Self {
        KernelSpec {
            inner: Arc::new(Inner {
                family,
                rule,
                cache: RwLock::new(Vec::new()),
            }),
        }
    }

    pub fn family(&self) -> &KernelFamily {
        &self.inner.family
    }

    /// log a_n^2 (natural log; -inf for a zero coefficient).
    pub fn log_sq_coeff(&self, n: usize) -> f64 {
        self.ensure_coeffs(n + 1);
        self.inner.cache.read().unwrap()[n]
    }

    fn ensure_coeffs(&self, upto: usize) {
        {
            let cache = self.inner.cache.read().unwrap();
            if cache.len() >= upto {
                return;
            }
        }
        let mut cache = self.inner.cache.write().unwrap();
        let start = cache.len();
        if start >= upto {
            return;
        }
        match &self.inner.rule {
            CoeffRule::Gef => {
                for n in start..upto {
                    cache.push(-libm::lgamma(n as f64 + 1.0));
                }
            }
            CoeffRule::MittagLeffler { alpha } => {
                for n in start..upto {
                    cache.push(-libm::lgamma(1.0 + n as f64 / alpha));
                }
            }
            CoeffRule::DoubleExp { bell } => {
                let mut tri = bell.write().unwrap();
                tri.ensure(upto);
                for n in start..upto {
                    cache.push(1.0 + tri.log_bell[n] - libm::lgamma(n as f64 + 1.0));
                }
            }
            CoeffRule::Lindelof { alpha } => {
                for n in start..upto {
                    let l = ((n as f64) + std::f64::consts::E).ln().ln();
                    cache.push(-alpha * (n as f64) * l);
                }
            }
            CoeffRule::Table(t) => {
                for n in start..upto {
                    cache.push(t.get(n).copied().unwrap_or(f64::NEG_INFINITY));
                }
            }
            CoeffRule::Rule(f) => {
                for n in start..upto {
                    cache.push(f(n));
                }
            }
        }
    }

    /// Prefix heuristics for the entirety condition: log a_n / n strictly
    /// decreasing along dyadic checkpoints, negative at the end, and a
    /// nonzero coefficient present in every checkpoint block.
    pub fn validate(&self) -> Result<()> {
        let checkpoints = [64usize, 128, 256, 512];
        let mut prev = f64::INFINITY;
        let mut lo = 0usize;
        for &n in &checkpoints {
            let mut nonzero = None;
            for m in (lo..=n).rev() {
                if self.log_sq_coeff(m) > f64::NEG_INFINITY {
                    nonzero = Some(m);
                    break;
                }
            }
            let m = nonzero.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no nonzero coefficient in ({lo}, {n}]: not transcendental on the tested prefix"
                ))
            })?;
            let kappa = self.log_sq_coeff(m) / (2.0 * m as f64);
            if kappa >= prev {
                return Err(Error::InvalidInput(format!(
                    "log a_n / n not decreasing near n = {n}: a_n^(1/n) does not appear to vanish"
                )));
            }
            prev = kappa;
            lo = n;
        }
        if prev >= 0.0 {
            return Err(Error::InvalidInput(
                "log a_n / n still nonnegative at the end of the tested prefix".into(),
            ));
        }
        Ok(())
    }

    // ----- closed forms ---------------------------------------------------

    /// Closed-form log G(r) when the family admits one at this r.
    ///
    /// The Mittag-Leffler closed form is the saturated principal-sector
    /// asymptotic alpha * exp(r^alpha); its relative error is of order
    /// exp(-r^alpha), below double precision once r^alpha >= 40.
    pub fn closed_log_g(&self, r: f64) -> Option<f64> {
        match self.inner.family {
            KernelFamily::Gef => Some(r),
            KernelFamily::DoubleExp => Some(r.exp()),
            KernelFamily::MittagLeffler { alpha } => {
                let p = r.powf(alpha);
                (p >= 40.0).then(|| p + alpha.ln())
            }
            _ => None,
        }
    }

    pub fn closed_a(&self, r: f64) -> Option<f64> {
        match self.inner.family {
            KernelFamily::Gef => Some(r),
            KernelFamily::DoubleExp => Some(r * r.exp()),
            KernelFamily::MittagLeffler { alpha } => {
                let p = r.powf(alpha);
                (p >= 40.0).then_some(alpha * p)
            }
            _ => None,
        }
    }

    pub fn closed_b(&self, r: f64) -> Option<f64> {
        match self.inner.family {
            KernelFamily::Gef => Some(r),
            KernelFamily::DoubleExp => Some(r * (r + 1.0) * r.exp()),
            KernelFamily::MittagLeffler { alpha } => {
                let p = r.powf(alpha);
                (p >= 40.0).then_some(alpha * alpha * p)
            }
            _ => None,
        }
    }

    /// log b(r), usable where b itself overflows (double exponential b(r)
    /// leaves the floating range at r ~ 700).
    pub fn log_b_of(&self, r: f64) -> Result<f64> {
        match self.inner.family {
            KernelFamily::Gef => Ok(r.ln()),
            KernelFamily::DoubleExp => Ok(r.ln() + (r + 1.0).ln() + r),
            KernelFamily::MittagLeffler { alpha } if r.powf(alpha) >= 40.0 => {
                Ok(2.0 * alpha.ln() + alpha * r.ln())
            }
            _ => Ok(self.b_of(r)?.ln()),
        }
    }

    fn closed_log_g_complex(&self, r: f64, theta: f64) -> Option<LogComplex> {
        match self.inner.family {
            KernelFamily::Gef => Some(LogComplex::new(r * theta.cos(), r * theta.sin())),
            KernelFamily::DoubleExp => {
                // G(z) = exp(exp(z)); log G(re^{it}) = exp(r cos t) * e^{i r sin t}.
                let m = r * theta.cos();
                if m > 700.0 {
                    return None; // exp(m) would overflow even as a log value
                }
                let scale = m.exp();
                Some(LogComplex::new(
                    scale * (r * theta.sin()).cos(),
                    scale * (r * theta.sin()).sin(),
                ))
            }
            _ => None,
        }
    }

    // ----- series engine --------------------------------------------------

    /// Scaled series terms of G at argument r = exp(log_r), with the adaptive
    /// prefix rule. `log_r` may be -inf (argument zero).
    pub(crate) fn series_terms(&self, log_r: f64, context: &str) -> Result<SeriesTerms> {
        if log_r == f64::NEG_INFINITY {
            let l0 = self.log_sq_coeff(0);
            return Ok(SeriesTerms {
                max_log: l0,
                weights: vec![1.0],
                total: 1.0,
            });
        }
        // The dominant term of G(r) sits at index ~ a(r); when a closed form
        // puts that past the cap, fail fast instead of grinding coefficients.
        if let Some(peak) = self.closed_a(log_r.exp()) {
            if !(peak < MAX_SERIES_TERMS as f64 * 1.05) {
                return Err(Error::NonConvergent {
                    cap: MAX_SERIES_TERMS,
                    context: context.to_string(),
                });
            }
        }
        let table_len = match &self.inner.rule {
            CoeffRule::Table(t) => Some(t.len()),
            _ => None,
        };
        let mut logs: Vec<f64> = Vec::with_capacity(1024);
        let mut max_log = f64::NEG_INFINITY;
        let mut tiny_run = 0usize;
        let mut n = 0usize;
        const CHUNK: usize = 512;
        'outer: loop {
            let cap = table_len.unwrap_or(MAX_SERIES_TERMS);
            if n >= cap {
                if table_len.is_some() {
                    break;
                }
                return Err(Error::NonConvergent {
                    cap: MAX_SERIES_TERMS,
                    context: context.to_string(),
                });
            }
            let hi = (n + CHUNK).min(cap);
            self.ensure_coeffs(hi);
            let cache = self.inner.cache.read().unwrap();
            while n < hi {
                let t = cache[n] + n as f64 * log_r;
                logs.push(t);
                if t > max_log {
                    max_log = t;
                    tiny_run = 0;
                } else if t < max_log + LOG_TINY {
                    tiny_run += 1;
                    if tiny_run >= TINY_RUN && table_len.is_none() {
                        break 'outer;
                    }
                } else {
                    tiny_run = 0;
                }
                n += 1;
            }
        }
        if max_log == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(format!(
                "{context}: all coefficients vanish on the examined prefix"
            )));
        }
        let mut total = KahanSum::new();
        let mut weights = Vec::with_capacity(logs.len());
        for &t in &logs {
            let w = if t == f64::NEG_INFINITY {
                0.0
            } else {
                (t - max_log).exp()
            };
            weights.push(w);
            total.add(w);
        }
        Ok(SeriesTerms {
            max_log,
            weights,
            total: total.value(),
        })
    }

    /// Series-path log G(r); exposed so closed forms can be cross-checked.
    pub fn log_g_series(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::InvalidInput(format!("log_g needs r >= 0, got {r}")));
        }
        let log_r = if r == 0.0 { f64::NEG_INFINITY } else { r.ln() };
        let terms = self.series_terms(log_r, &format!("log_g series at r = {r}"))?;
        Ok(terms.max_log + terms.total.ln())
    }

    /// log G(r) = log sum a_n^2 r^n for r >= 0. Uses the closed form when the
    /// family admits one at this r, the adaptive series otherwise.
    pub fn log_g(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::InvalidInput(format!("log_g needs r >= 0, got {r}")));
        }
        if let Some(v) = self.closed_log_g(r) {
            return Ok(v);
        }
        self.log_g_series(r)
    }

    /// Log-domain G(re^{i theta}) with compensated accumulation after
    /// factoring out the largest term modulus. |G(re^{i theta})| <= G(r) is
    /// enforced on the returned value.
    pub fn log_g_complex(&self, r: f64, theta: f64) -> Result<ComplexEval> {
        if r < 0.0 {
            return Err(Error::InvalidInput(format!(
                "log_g_complex needs r >= 0, got {r}"
            )));
        }
        let theta = wrap_angle(theta);
        if theta == 0.0 || r == 0.0 {
            return Ok(ComplexEval {
                value: LogComplex::new(self.log_g(r)?, 0.0),
                precision_loss: None,
            });
        }
        if let Some(v) = self.closed_log_g_complex(r, theta) {
            return Ok(ComplexEval {
                value: v,
                precision_loss: None,
            });
        }
        let terms = self.series_terms(r.ln(), &format!("log_g_complex series at r = {r}"))?;
        let mut acc = KahanComplexSum::new();
        let mut rot = Complex64::new(1.0, 0.0);
        let step = Complex64::from_polar(1.0, theta);
        for (n, &w) in terms.weights.iter().enumerate() {
            if n > 0 {
                if n % 512 == 0 {
                    // Periodic refresh keeps the incremental rotation from drifting.
                    rot = Complex64::from_polar(1.0, wrap_angle(n as f64 * theta));
                } else {
                    rot *= step;
                }
            }
            if w > 0.0 {
                acc.add(w * rot);
            }
        }
        let s = acc.value();
        let total_abs = terms.total;
        let norm = s.norm();
        // Absolute rounding noise of the compensated sum, in log scale.
        let log_err = terms.max_log + (total_abs * (terms.weights.len() as f64).sqrt()).ln()
            + (-52.0f64) * std::f64::consts::LN_2;
        let lost_all = norm == 0.0 || norm < total_abs * 2f64.powi(-32);
        let log_g_r = terms.max_log + total_abs.ln();
        let value = if norm == 0.0 {
            LogComplex::ZERO
        } else {
            LogComplex::new((terms.max_log + norm.ln()).min(log_g_r), s.arg())
        };
        Ok(ComplexEval {
            value,
            precision_loss: lost_all.then_some(log_err),
        })
    }

    /// a(r) = r G'(r) / G(r) and b(r) = r a'(r) in one pass.
    ///
    /// b is accumulated as the centered second moment of the term index,
    /// which keeps it nonnegative even when b << a^2.
    pub fn a_b_of(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("a/b need r > 0, got {r}")));
        }
        if let (Some(a), Some(b)) = (self.closed_a(r), self.closed_b(r)) {
            return Ok((a, b));
        }
        let terms = self.series_terms(r.ln(), &format!("a/b series at r = {r}"))?;
        let mut s1 = KahanSum::new();
        for (n, &w) in terms.weights.iter().enumerate() {
            s1.add(n as f64 * w);
        }
        let a = s1.value() / terms.total;
        let mut s2 = KahanSum::new();
        for (n, &w) in terms.weights.iter().enumerate() {
            let d = n as f64 - a;
            s2.add(d * d * w);
        }
        let b = s2.value() / terms.total;
        Ok((a, b))
    }

    pub fn a_of(&self, r: f64) -> Result<f64> {
        Ok(self.a_b_of(r)?.0)
    }

    pub fn b_of(&self, r: f64) -> Result<f64> {
        Ok(self.a_b_of(r)?.1)
    }

    /// Series-path a and b, bypassing closed forms (for cross-checks).
    pub fn a_b_series(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("a/b need r > 0, got {r}")));
        }
        let terms = self.series_terms(r.ln(), &format!("a/b series at r = {r}"))?;
        let mut s1 = KahanSum::new();
        for (n, &w) in terms.weights.iter().enumerate() {
            s1.add(n as f64 * w);
        }
        let a = s1.value() / terms.total;
        let mut s2 = KahanSum::new();
        for (n, &w) in terms.weights.iter().enumerate() {
            let d = n as f64 - a;
            s2.add(d * d * w);
        }
        Ok((a, s2.value() / terms.total))
    }

    /// |J(z,w)|^2 in [0, 1], where J is the normalized kernel
    /// G(z conj(w)) / sqrt(G(|z|^2) G(|w|^2)).
    pub fn normalized_kernel_sq(&self, z: Complex64, w: Complex64) -> Result<f64> {
        let zw = z * w.conj();
        let r = zw.norm();
        let theta = if r == 0.0 { 0.0 } else { zw.arg() };
        let num = self.log_g_complex(r, theta)?;
        let log_num = match num.precision_loss {
            // With full cancellation the certified bound is still a valid
            // upper estimate for |G|; use whichever is smaller.
            Some(bound) => num.value.log_mod.max(f64::NEG_INFINITY).min(bound),
            None => num.value.log_mod,
        };
        let d = 2.0 * log_num - self.log_g(z.norm_sqr())? - self.log_g(w.norm_sqr())?;
        let j2 = d.exp();
        if j2 > 1.0 + 1e-10 {
            return Err(Error::KernelBoundViolated { value: j2 });
        }
        Ok(j2.min(1.0))
    }

    /// First intensity of the zero set: rho_1(z) = a'(|z|^2) / pi, with
    /// a'(u) evaluated as b(u)/u.
    pub fn first_intensity(&self, z: Complex64) -> Result<f64> {
        let u = z.norm_sqr();
        if u == 0.0 {
            // a'(0) = a_1^2 / a_0^2.
            let l0 = self.log_sq_coeff(0);
            let l1 = self.log_sq_coeff(1);
            if l0 == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(
                    "first_intensity at 0 needs a_0 != 0".into(),
                ));
            }
            return Ok((l1 - l0).exp() / std::f64::consts::PI);
        }
        let (_, b) = self.a_b_of(u)?;
        Ok(b / u / std::f64::consts::PI)
    }

    /// Expected number of zeros in |z| <= radius, which equals a(radius^2).
    pub fn expected_zero_count(&self, radius: f64) -> Result<f64> {
        self.a_of(radius * radius)
    }

    /// Estimate of the lower order B = liminf log b(r) / log r over the tail
    /// half of an increasing grid, plus a trend flag separating finite-B
    /// kernels from ones with log b(r)/log r diverging.
    pub fn lower_order_estimate(&self, r_grid: &[f64]) -> Result<LowerOrderEstimate> {
        if r_grid.len() < 8 {
            return Err(Error::GridTooSmall(format!(
                "need at least 8 grid points, got {}",
                r_grid.len()
            )));
        }
        if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid[0] <= 0.0 {
            return Err(Error::GridTooSmall("grid must be positive increasing".into()));
        }
        let span = r_grid[r_grid.len() - 1] / r_grid[0];
        if span < 1e4 {
            return Err(Error::GridTooSmall(format!(
                "grid must span at least 4 decades, got {span:.3e}"
            )));
        }
        let q: Vec<f64> = r_grid
            .iter()
            .map(|&r| Ok(self.log_b_of(r)? / r.ln()))
            .collect::<Result<_>>()?;
        let tail = &q[q.len() / 2..];
        let estimate = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let increasing = tail.windows(2).all(|w| w[1] > w[0]);
        let gain = tail[tail.len() - 1] - tail[0];
        let trend = if increasing && gain > 0.5 {
            GrowthTrend::Diverging
        } else {
            GrowthTrend::Finite
        };
        Ok(LowerOrderEstimate { estimate, trend })
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_family_str(s)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.inner.family)
    }
}
