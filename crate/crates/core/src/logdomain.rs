//! Overflow-safe log-domain arithmetic.
//!
//! Kernel values here can be as large as exp(exp(r)), so nothing in the hot
//! paths materializes them in linear scale. A complex value is carried as
//! `LogComplex` (log of the modulus plus a wrapped argument), and series are
//! accumulated with streaming log-sum-exp or max-factored compensated sums.

use num_complex::Complex64;

/// A complex number stored as (log modulus, argument).
///
/// Zero is represented as `log_mod = -inf`, `arg = 0`. The argument is kept
/// wrapped in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_mod: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mod: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn new(log_mod: f64, arg: f64) -> Self {
        if log_mod == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex {
            log_mod,
            arg: wrap_angle(arg),
        }
    }

    /// Log-domain representation of a linear-scale complex number.
    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        LogComplex {
            log_mod: z.norm().ln(),
            arg: z.arg(),
        }
    }

    /// Materialize in linear scale. Overflows to infinity past ~exp(709).
    pub fn to_complex(self) -> Complex64 {
        if self.log_mod == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mod.exp(), self.arg)
    }

    pub fn is_zero(self) -> bool {
        self.log_mod == f64::NEG_INFINITY
    }
}

impl std::ops::Mul for LogComplex {
    type Output = LogComplex;

    fn mul(self, other: LogComplex) -> LogComplex {
        if self.log_mod == f64::NEG_INFINITY || other.log_mod == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex::new(self.log_mod + other.log_mod, self.arg + other.arg)
    }
}

impl std::ops::Div for LogComplex {
    type Output = LogComplex;

    fn div(self, other: LogComplex) -> LogComplex {
        LogComplex::new(self.log_mod - other.log_mod, self.arg - other.arg)
    }
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    if a.abs() <= std::f64::consts::PI {
        // Already wrapped except possibly the open endpoint.
        if a == -std::f64::consts::PI {
            return std::f64::consts::PI;
        }
        return a;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a % two_pi;
    if r > std::f64::consts::PI {
        r -= two_pi;
    } else if r <= -std::f64::consts::PI {
        r += two_pi;
    }
    r
}

/// log(exp(a) + exp(b)) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Streaming log-sum-exp accumulator over nonnegative terms given by their
/// natural logs. Rescales on the fly when a new maximum appears, so the
/// running sum stays in a sane floating range.
#[derive(Debug, Clone)]
pub struct LogSumAcc {
    max_log: f64,
    sum: f64,
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumAcc {
    pub fn new() -> Self {
        LogSumAcc {
            max_log: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add_log(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term <= self.max_log {
            self.sum += (log_term - self.max_log).exp();
        } else {
            if self.max_log != f64::NEG_INFINITY {
                self.sum = self.sum * (self.max_log - log_term).exp() + 1.0;
            } else {
                self.sum = 1.0;
            }
            self.max_log = log_term;
        }
    }

    /// Natural log of the accumulated sum.
    pub fn log_sum(&self) -> f64 {
        if self.max_log == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max_log + self.sum.ln()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.max_log == f64::NEG_INFINITY
    }
}

/// Kahan compensated accumulator for a real sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated accumulator for a complex sum (Kahan on both components).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
