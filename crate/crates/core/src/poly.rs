//! Polynomial roots by Aberth-Ehrlich simultaneous iteration.
//!
//! Coefficients are carried in log-polar form so the engine works for
//! truncated random entire functions whose coefficient magnitudes span
//! thousands of orders; evaluation factors out the dominant term before
//! summing. Initial guesses sit on circles given by the max-term (Newton
//! polygon) profile of the coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logdomain::{wrap_angle, LogComplex};

/// Terms more than this far (in nats) below the dominant one are skipped.
const EVAL_WINDOW: f64 = 45.0;

/// A polynomial stored as log|c_n| plus unit-phase directions.
#[derive(Debug, Clone)]
pub struct LogPolynomial {
    log_mod: Vec<f64>,
    dir: Vec<Complex64>,
}

/// Outcome of a simultaneous-iteration run.
#[derive(Debug, Clone)]
pub struct AberthResult {
    pub roots: Vec<Complex64>,
    pub converged: Vec<bool>,
    pub sweeps: u32,
    /// Roots at the origin from leading zero coefficients.
    pub origin_multiplicity: usize,
}

impl LogPolynomial {
    pub fn from_log_coeffs(log_mod: Vec<f64>, phase: Vec<f64>) -> Self {
        assert_eq!(log_mod.len(), phase.len());
        let dir = phase
            .iter()
            .zip(log_mod.iter())
            .map(|(&p, &lm)| {
                if lm == f64::NEG_INFINITY {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(1.0, p)
                }
            })
            .collect();
        LogPolynomial { log_mod, dir }
    }

    pub fn from_complex_coeffs(coeffs: &[Complex64]) -> Self {
        let log_mod = coeffs
            .iter()
            .map(|c| {
                let n = c.norm();
                if n == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    n.ln()
                }
            })
            .collect();
        let phase = coeffs
            .iter()
            .map(|c| if c.norm() == 0.0 { 0.0 } else { c.arg() })
            .collect();
        Self::from_log_coeffs(log_mod, phase)
    }

    pub fn len(&self) -> usize {
        self.log_mod.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_mod.is_empty()
    }

    fn trailing_degree(&self) -> usize {
        let mut d = self.log_mod.len() - 1;
        while d > 0 && self.log_mod[d] == f64::NEG_INFINITY {
            d -= 1;
        }
        d
    }

    fn leading_zeros(&self) -> usize {
        let mut k = 0;
        while k < self.log_mod.len() && self.log_mod[k] == f64::NEG_INFINITY {
            k += 1;
        }
        k
    }

    /// Value as a LogComplex; safe at any magnitude.
    pub fn eval_log(&self, z: Complex64) -> LogComplex {
        let (s, scale) = self.eval_value_scaled(z);
        if s.norm() == 0.0 {
            return LogComplex::ZERO;
        }
        LogComplex::new(scale + s.norm().ln(), s.arg())
    }

    /// P(z) scaled: the value is s exp(log_scale). Only the index window
    /// within EVAL_WINDOW nats of the dominant term is summed.
    fn eval_value_scaled(&self, z: Complex64) -> (Complex64, f64) {
        let r = z.norm();
        if r == 0.0 {
            return if self.log_mod[0] == f64::NEG_INFINITY {
                (Complex64::new(0.0, 0.0), 0.0)
            } else {
                (self.dir[0], self.log_mod[0])
            };
        }
        let lr = r.ln();
        // Pass 1: dominant magnitude and the index window around it.
        let mut m_val = f64::NEG_INFINITY;
        let mut tau = 0.0;
        for (n, &lm) in self.log_mod.iter().enumerate() {
            if n > 0 {
                tau += lr;
            }
            if lm > f64::NEG_INFINITY && lm + tau > m_val {
                m_val = lm + tau;
            }
        }
        if m_val == f64::NEG_INFINITY {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let (lo, hi) = self.window(lr, m_val, 0.0);
        let theta = z.arg();
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::from_polar(1.0, wrap_angle(lo as f64 * theta));
        let mut s_val = Complex64::new(0.0, 0.0);
        let mut c_val = Complex64::new(0.0, 0.0);
        tau = lo as f64 * lr;
        for n in lo..=hi {
            if n > lo {
                tau += lr;
                if n % 512 == 0 {
                    rot = Complex64::from_polar(1.0, wrap_angle(n as f64 * theta));
                } else {
                    rot *= step;
                }
            }
            let lm = self.log_mod[n];
            if lm == f64::NEG_INFINITY {
                continue;
            }
            let t = lm + tau;
            if t > m_val - EVAL_WINDOW {
                let term = self.dir[n] * rot * (t - m_val).exp();
                let y = term - c_val;
                let tmp = s_val + y;
                c_val = (tmp - s_val) - y;
                s_val = tmp;
            }
        }
        (s_val, m_val)
    }

    /// First and last index whose term magnitude (plus `log_extra(n)` =
    /// extra * ln n) reaches within EVAL_WINDOW of the maximum.
    fn window(&self, lr: f64, m: f64, extra: f64) -> (usize, usize) {
        let mut lo = usize::MAX;
        let mut hi = 0;
        let mut tau = 0.0;
        for (n, &lm) in self.log_mod.iter().enumerate() {
            if n > 0 {
                tau += lr;
            }
            if lm == f64::NEG_INFINITY {
                continue;
            }
            let mut t = lm + tau;
            if extra != 0.0 && n >= 1 {
                t += extra * (n as f64).ln();
            }
            if t > m - EVAL_WINDOW {
                if n < lo {
                    lo = n;
                }
                hi = n;
            }
        }
        if lo == usize::MAX {
            (0, 0)
        } else {
            (lo, hi)
        }
    }

    /// P and P' scaled: returns (s, log_scale, s_deriv, log_scale_deriv) with
    /// P(z) = s exp(log_scale) and P'(z) = s_deriv exp(log_scale_deriv) / z.
    fn eval_pair_scaled(&self, z: Complex64) -> (Complex64, f64, Complex64, f64) {
        let n_coeff = self.log_mod.len();
        let r = z.norm();
        if r == 0.0 {
            let p = if self.log_mod[0] == f64::NEG_INFINITY {
                (Complex64::new(0.0, 0.0), 0.0)
            } else {
                (self.dir[0], self.log_mod[0])
            };
            let dp = if n_coeff > 1 && self.log_mod[1] > f64::NEG_INFINITY {
                (self.dir[1], self.log_mod[1])
            } else {
                (Complex64::new(0.0, 0.0), 0.0)
            };
            return (p.0, p.1, dp.0, dp.1);
        }
        let lr = r.ln();
        let theta = z.arg();
        // Pass 1: dominant magnitudes for value and derivative.
        let mut m_val = f64::NEG_INFINITY;
        let mut m_der = f64::NEG_INFINITY;
        let mut tau = 0.0;
        for (n, &lm) in self.log_mod.iter().enumerate() {
            if n > 0 {
                tau += lr;
            }
            if lm == f64::NEG_INFINITY {
                continue;
            }
            let t = lm + tau;
            if t > m_val {
                m_val = t;
            }
            if n >= 1 {
                let td = t + (n as f64).ln();
                if td > m_der {
                    m_der = td;
                }
            }
        }
        if m_val == f64::NEG_INFINITY {
            return (Complex64::new(0.0, 0.0), 0.0, Complex64::new(0.0, 0.0), 0.0);
        }
        let (lo_v, hi_v) = self.window(lr, m_val, 0.0);
        let (lo_d, hi_d) = self.window(lr, m_der, 1.0);
        let lo = lo_v.min(lo_d);
        let hi = hi_v.max(hi_d);
        // Pass 2: compensated sums of the scaled terms over the window.
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::from_polar(1.0, wrap_angle(lo as f64 * theta));
        let mut s_val = Complex64::new(0.0, 0.0);
        let mut c_val = Complex64::new(0.0, 0.0);
        let mut s_der = Complex64::new(0.0, 0.0);
        let mut c_der = Complex64::new(0.0, 0.0);
        tau = lo as f64 * lr;
        for n in lo..=hi {
            if n > lo {
                tau += lr;
                if n % 512 == 0 {
                    rot = Complex64::from_polar(1.0, wrap_angle(n as f64 * theta));
                } else {
                    rot *= step;
                }
            }
            let lm = self.log_mod[n];
            if lm == f64::NEG_INFINITY {
                continue;
            }
            let t = lm + tau;
            if t > m_val - EVAL_WINDOW {
                let term = self.dir[n] * rot * (t - m_val).exp();
                let y = term - c_val;
                let tmp = s_val + y;
                c_val = (tmp - s_val) - y;
                s_val = tmp;
            }
            if n >= 1 {
                let td = t + (n as f64).ln();
                if td > m_der - EVAL_WINDOW {
                    let term = self.dir[n] * rot * (td - m_der).exp();
                    let y = term - c_der;
                    let tmp = s_der + y;
                    c_der = (tmp - s_der) - y;
                    s_der = tmp;
                }
            }
        }
        (s_val, m_val, s_der, m_der)
    }

    /// Newton ratio P(z) / P'(z), computed scale-free. Returns None when the
    /// derivative vanishes at z.
    pub fn newton_ratio(&self, z: Complex64) -> Option<Complex64> {
        let (s, m, sd, md) = self.eval_pair_scaled(z);
        if sd.norm() == 0.0 {
            return None;
        }
        if s.norm() == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        // P/P' = (s/sd) * exp(m - md) * z   (derivative sums used n c_n z^n).
        let ratio = (s / sd) * (m - md).exp() * z;
        ratio.is_finite().then_some(ratio)
    }

    /// Initial guesses on max-term circles: one circle per upper-hull edge of
    /// (n, log|c_n|), carrying as many guesses as the edge spans.
    fn initial_guesses(&self, lead: usize, degree: usize) -> Vec<Complex64> {
        let pts: Vec<(f64, f64)> = (lead..=degree)
            .filter(|&n| self.log_mod[n] > f64::NEG_INFINITY)
            .map(|n| (n as f64, self.log_mod[n]))
            .collect();
        // Upper convex hull by monotone chain.
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for &p in &pts {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // Keep the chain concave (upper hull).
                if (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1) >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let mut guesses = Vec::with_capacity(degree - lead);
        for (e, pair) in hull.windows(2).enumerate() {
            let (n1, l1) = pair[0];
            let (n2, l2) = pair[1];
            let m = (n2 - n1) as usize;
            let rho = ((l1 - l2) / (n2 - n1)).exp();
            let offset = 0.401 + 0.77 * e as f64;
            for j in 0..m {
                let ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64 + offset;
                guesses.push(Complex64::from_polar(rho, ang));
            }
        }
        guesses
    }

    /// All roots by Aberth-Ehrlich. Roots from leading zero coefficients are
    /// reported through `origin_multiplicity` and prepended as exact zeros.
    pub fn find_roots(&self, max_sweeps: u32) -> Result<AberthResult> {
        let lead = self.leading_zeros();
        if lead == self.log_mod.len() {
            return Err(Error::InvalidInput("zero polynomial has no roots".into()));
        }
        let degree = self.trailing_degree();
        if degree <= lead {
            return Ok(AberthResult {
                roots: vec![Complex64::new(0.0, 0.0); lead],
                converged: vec![true; lead],
                sweeps: 0,
                origin_multiplicity: lead,
            });
        }
        // Reduced polynomial without the origin roots.
        let red = LogPolynomial {
            log_mod: self.log_mod[lead..=degree].to_vec(),
            dir: self.dir[lead..=degree].to_vec(),
        };
        let n_roots = degree - lead;
        if n_roots == 1 {
            let root = Complex64::from_polar(
                (red.log_mod[0] - red.log_mod[1]).exp(),
                wrap_angle(red.dir[0].arg() - red.dir[1].arg() + std::f64::consts::PI),
            );
            let mut roots = vec![Complex64::new(0.0, 0.0); lead];
            roots.push(root);
            return Ok(AberthResult {
                converged: vec![true; roots.len()],
                roots,
                sweeps: 0,
                origin_multiplicity: lead,
            });
        }

        let mut w = red.initial_guesses(0, n_roots);
        debug_assert_eq!(w.len(), n_roots);
        let mut done = vec![false; n_roots];
        let mut sweeps = 0u32;
        while sweeps < max_sweeps {
            sweeps += 1;
            let mut moved = false;
            for i in 0..n_roots {
                if done[i] {
                    continue;
                }
                let nr = match red.newton_ratio(w[i]) {
                    Some(r) => r,
                    None => {
                        // Critical point; nudge off it.
                        let nudge = Complex64::new(1e-6 * (1.0 + w[i].norm()), 1e-6);
                        w[i] += nudge;
                        moved = true;
                        continue;
                    }
                };
                let mut rep = Complex64::new(0.0, 0.0);
                for j in 0..n_roots {
                    if j == i {
                        continue;
                    }
                    let d = w[i] - w[j];
                    if d.norm_sqr() == 0.0 {
                        let nudge = Complex64::new(1e-9 * (1.0 + w[i].norm()), 3e-10);
                        w[i] += nudge;
                        rep = Complex64::new(f64::NAN, 0.0);
                        break;
                    }
                    rep += d.inv();
                }
                if rep.re.is_nan() {
                    moved = true;
                    continue;
                }
                let denom = Complex64::new(1.0, 0.0) - nr * rep;
                let delta = if denom.norm_sqr() < 1e-280 { nr } else { nr / denom };
                if !delta.is_finite() {
                    let nudge = Complex64::new(1e-6 * (1.0 + w[i].norm()), -1e-6);
                    w[i] += nudge;
                    moved = true;
                    continue;
                }
                w[i] -= delta;
                let tol = 1e-12 * (w[i].norm() + 1.0);
                if delta.norm() <= tol {
                    done[i] = true;
                } else {
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        let mut roots = vec![Complex64::new(0.0, 0.0); lead];
        let mut converged = vec![true; lead];
        roots.extend(w);
        converged.extend(done);
        Ok(AberthResult {
            roots,
            converged,
            sweeps,
            origin_multiplicity: lead,
        })
    }

    /// A few Newton steps from an approximate root; returns the refined
    /// point and whether the iteration contracted.
    pub fn polish(&self, mut z: Complex64, iters: u32) -> (Complex64, bool) {
        let mut ok = false;
        for _ in 0..iters {
            match self.newton_ratio(z) {
                Some(r) => {
                    z -= r;
                    if r.norm() <= 1e-12 * (z.norm() + 1.0) {
                        ok = true;
                        break;
                    }
                }
                None => break,
            }
        }
        (z, ok)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sort_roots(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        c
    }

    #[test]
    fn cubic_with_known_roots() {
        // (z-1)(z-2)(z-3) = -6 + 11 z - 6 z^2 + z^3
        let p = LogPolynomial::from_complex_coeffs(&[
            Complex64::new(-6.0, 0.0),
            Complex64::new(11.0, 0.0),
            Complex64::new(-6.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let res = p.find_roots(100).unwrap();
        assert!(res.converged.iter().all(|&c| c));
        let roots = sort_roots(res.roots);
        for (r, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - Complex64::new(want, 0.0)).norm() < 1e-10, "{r}");
        }
    }

    #[test]
    fn linear_case_closed_form() {
        let c0 = Complex64::new(2.0, -1.0);
        let c1 = Complex64::new(0.5, 3.0);
        let p = LogPolynomial::from_complex_coeffs(&[c0, c1]);
        let res = p.find_roots(10).unwrap();
        assert_eq!(res.roots.len(), 1);
        assert!((res.roots[0] - (-c0 / c1)).norm() < 1e-12);
    }

    #[test]
    fn roots_of_unity() {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 9];
        coeffs[0] = Complex64::new(-1.0, 0.0);
        coeffs[8] = Complex64::new(1.0, 0.0);
        let p = LogPolynomial::from_complex_coeffs(&coeffs);
        let res = p.find_roots(200).unwrap();
        assert!(res.converged.iter().all(|&c| c));
        for r in &res.roots {
            assert!((r.norm() - 1.0).abs() < 1e-10);
            let p8 = r.powu(8);
            assert!((p8 - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn origin_roots_from_leading_zeros() {
        // z^3 (z - 2)
        let p = LogPolynomial::from_complex_coeffs(&[
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let res = p.find_roots(50).unwrap();
        assert_eq!(res.origin_multiplicity, 3);
        let mut away: Vec<_> = res.roots.iter().filter(|r| r.norm() > 0.5).collect();
        assert_eq!(away.len(), 1);
        assert!((away.pop().unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn random_root_multiset_recovered() {
        let roots = [
            Complex64::new(0.3, 0.8),
            Complex64::new(-1.1, 0.2),
            Complex64::new(2.0, -1.5),
            Complex64::new(0.01, -0.02),
            Complex64::new(-0.7, -0.6),
            Complex64::new(1.4, 1.4),
        ];
        let coeffs = poly_from_roots(&roots);
        let p = LogPolynomial::from_complex_coeffs(&coeffs);
        let res = p.find_roots(200).unwrap();
        assert!(res.converged.iter().all(|&c| c));
        let found = sort_roots(res.roots);
        let want = sort_roots(roots.to_vec());
        for (f, w) in found.iter().zip(want.iter()) {
            assert!((f - w).norm() < 1e-8, "{f} vs {w}");
        }
    }

    #[test]
    fn huge_dynamic_range_coefficients() {
        // Roots at moduli 1e-3 and 1e3: coefficients span ~12 orders; then
        // shift the whole log profile by 500 nats to leave linear range.
        let roots = [
            Complex64::new(1e-3, 0.0),
            Complex64::new(0.0, -1e-3),
            Complex64::new(1e3, 0.0),
            Complex64::new(0.0, 1e3),
        ];
        let coeffs = poly_from_roots(&roots);
        let log_mod: Vec<f64> = coeffs.iter().map(|c| c.norm().ln() + 500.0).collect();
        let phase: Vec<f64> = coeffs.iter().map(|c| c.arg()).collect();
        let p = LogPolynomial::from_log_coeffs(log_mod, phase);
        let res = p.find_roots(200).unwrap();
        let mut found = res.roots.clone();
        for w in roots {
            let (idx, d) = found
                .iter()
                .enumerate()
                .map(|(i, f)| (i, (f - w).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(d < 1e-6 * (1.0 + w.norm()), "no match for {w} (closest {d})");
            found.swap_remove(idx);
        }
    }

    #[test]
    fn eval_log_matches_linear() {
        let coeffs = [
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.25),
            Complex64::new(3.0, -1.0),
        ];
        let p = LogPolynomial::from_complex_coeffs(&coeffs);
        for z in [Complex64::new(0.7, -0.3), Complex64::new(-2.0, 1.0)] {
            let direct = coeffs[0] + coeffs[1] * z + coeffs[2] * z * z;
            let lg = p.eval_log(z).to_complex();
            assert!((direct - lg).norm() < 1e-12 * direct.norm());
        }
    }
}
