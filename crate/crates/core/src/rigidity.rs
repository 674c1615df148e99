//! The headline experiment: recover the power sums of the zeros inside a
//! disk from (i) the zeros outside it and (ii) the deterministic expectation
//! of the linear statistic, then rebuild the inside configuration through
//! Newton's identities and score it against the ground truth.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linstat::{expected_statistic, TestFunction};
use crate::poly::LogPolynomial;
use crate::rng::derive_seed;
use crate::sampler::SampledFunction;
use crate::zerofinder::{zeros_in_disk, ZeroSet};

/// Estimator for one power sum: expected statistic minus the observed sum of
/// Phi over the zeros outside the disk. Deterministic given its inputs; the
/// estimation error equals the centered linear statistic.
pub fn recover_power_sum(
    spec: &KernelSpec,
    outside: &ZeroSet,
    tf: &TestFunction,
) -> Result<Complex64> {
    let expected = expected_statistic(spec, tf)?;
    recover_power_sum_with_expected(outside, tf, expected)
}

/// Same as [`recover_power_sum`] with the expectation precomputed, so
/// experiment loops pay for the radial quadrature once.
pub fn recover_power_sum_with_expected(
    outside: &ZeroSet,
    tf: &TestFunction,
    expected: Complex64,
) -> Result<Complex64> {
    let support = tf.support_radius();
    if outside.disk_radius < support * (1.0 - 1e-9) {
        return Err(Error::SupportExceedsValidity {
            support,
            validity: outside.disk_radius,
        });
    }
    let mut observed = Complex64::new(0.0, 0.0);
    for &z in &outside.points {
        if z.norm() > tf.l {
            observed += tf.value(z);
        }
    }
    Ok(expected - observed)
}

/// Reconstruction output: the recovered multiset of points plus a warning
/// flag when the Newton recursion amplified the inputs past 1e12.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub points: Vec<Complex64>,
    pub ill_conditioned: bool,
}

/// Rebuild N points from power sums (S_0, ..., S_N) with S_0 = N: elementary
/// symmetric functions by Newton's identities, then the roots of the monic
/// polynomial they define.
pub fn newton_reconstruct(s: &[Complex64]) -> Result<Reconstruction> {
    if s.is_empty() {
        return Err(Error::InvalidInput("power sum array is empty".into()));
    }
    let n_real = s[0].re;
    if s[0].im.abs() > 1e-6 || (n_real - n_real.round()).abs() > 1e-6 || n_real < -1e-9 {
        return Err(Error::InvalidInput(format!(
            "S_0 must be a nonnegative integer, got {}",
            s[0]
        )));
    }
    let n = n_real.round() as usize;
    if n == 0 {
        return Ok(Reconstruction {
            points: Vec::new(),
            ill_conditioned: false,
        });
    }
    if s.len() < n + 1 {
        return Err(Error::InvalidInput(format!(
            "need S_0..S_{n}, got {} entries",
            s.len()
        )));
    }
    let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
    e[0] = Complex64::new(1.0, 0.0);
    let s_scale = s.iter().take(n + 1).map(|v| v.norm()).fold(1.0, f64::max);
    let mut ill = false;
    for m in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sign = 1.0;
        for i in 1..=m {
            acc += sign * e[m - i] * s[i];
            sign = -sign;
        }
        e[m] = acc / m as f64;
        if e[m].norm() > 1e12 * s_scale {
            ill = true;
        }
    }
    // prod (z - z_j) = sum_l (-1)^{n-l} e_{n-l} z^l.
    let mut coeffs = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let sign = if (n - l).is_multiple_of(2) { 1.0 } else { -1.0 };
        coeffs.push(sign * e[n - l]);
    }
    let lp = LogPolynomial::from_complex_coeffs(&coeffs);
    let ab = lp.find_roots(300)?;
    let mut points: Vec<Complex64> = ab.roots.iter().map(|&w| lp.polish(w, 10).0).collect();
    points.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(Reconstruction {
        points,
        ill_conditioned: ill,
    })
}

/// Minimal total |a_i - b_{sigma(i)}| over assignments sigma; exact bitmask
/// DP for n <= 20, greedy with pair swaps beyond.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    if n <= 20 {
        let full = (1usize << n) - 1;
        let mut dp = vec![f64::INFINITY; 1 << n];
        dp[0] = 0.0;
        for mask in 0..full {
            let i = (mask as u32).count_ones() as usize;
            if dp[mask].is_infinite() {
                continue;
            }
            for j in 0..n {
                if mask & (1 << j) == 0 {
                    let cost = dp[mask] + (a[i] - b[j]).norm();
                    let next = mask | (1 << j);
                    if cost < dp[next] {
                        dp[next] = cost;
                    }
                }
            }
        }
        dp[full]
    } else {
        // Greedy assignment then 2-opt passes.
        let mut perm: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for i in 0..n {
            let mut best = f64::INFINITY;
            let mut pick = 0;
            for j in 0..n {
                if !used[j] {
                    let c = (a[i] - b[j]).norm();
                    if c < best {
                        best = c;
                        pick = j;
                    }
                }
            }
            used[pick] = true;
            perm[i] = pick;
        }
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n {
                for j in i + 1..n {
                    let cur = (a[i] - b[perm[i]]).norm() + (a[j] - b[perm[j]]).norm();
                    let alt = (a[i] - b[perm[j]]).norm() + (a[j] - b[perm[i]]).norm();
                    if alt + 1e-15 < cur {
                        perm.swap(i, j);
                        improved = true;
                    }
                }
            }
        }
        (0..n).map(|i| (a[i] - b[perm[i]]).norm()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RigidityConfig {
    pub d_radius: f64,
    pub k_max: usize,
    pub eta: f64,
    pub trials: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub seed: u64,
    pub true_count: usize,
    pub recovered_count_raw: f64,
    pub recovered_count: usize,
    pub count_distance_to_integer: f64,
    /// (re, im) pairs for S_0..S_Kmax.
    pub true_power_sums: Vec<(f64, f64)>,
    pub recovered_power_sums: Vec<(f64, f64)>,
    pub true_inside: Vec<(f64, f64)>,
    pub reconstructed: Vec<(f64, f64)>,
    /// Defined only when the recovered count matches the true count and a
    /// reconstruction was possible.
    pub matching_distance: Option<f64>,
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub family: String,
    pub d_radius: f64,
    pub k_max: usize,
    pub eta: f64,
    pub trials: u32,
    pub seed: u64,
    pub failed_trials: u32,
    pub count_success_rate: f64,
    pub rms_error_per_k: Vec<f64>,
    pub mean_matching_distance: Option<f64>,
    pub median_matching_distance: Option<f64>,
    pub records: Vec<TrialRecord>,
}

/// Run the recovery experiment: per trial, sample, find all zeros in the
/// support disk, recover the inside power sums from the outside zeros alone,
/// reconstruct, and score. Trials whose zero finding fails are excluded and
/// counted, never imputed.
pub fn rigidity_experiment(spec: &KernelSpec, cfg: &RigidityConfig) -> Result<RecoveryReport> {
    if cfg.d_radius < 1.0 {
        return Err(Error::InvalidInput(
            "d_radius must be >= 1 (it doubles as the test-function scale L)".into(),
        ));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let l = cfg.d_radius;
    let tfs: Vec<TestFunction> = (0..=cfg.k_max)
        .map(|k| TestFunction::new(k as u32, cfg.eta, l))
        .collect::<Result<_>>()?;
    let support = tfs[0].support_radius();
    // Feasibility gate: the truncation degree for the support disk must exist
    // under the hard cap before any trials run.
    crate::sampler::truncation_degree(spec, support, 1e-12)?;
    let expected: Vec<Complex64> = tfs
        .iter()
        .map(|tf| expected_statistic(spec, tf))
        .collect::<Result<_>>()?;

    let outcomes: Vec<std::result::Result<TrialRecord, String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            run_trial(spec, cfg, &tfs, &expected, t).map_err(|e| e.to_string())
        })
        .collect();

    let mut records = Vec::new();
    let mut failed = 0u32;
    for o in outcomes {
        match o {
            Ok(rec) => records.push(rec),
            Err(_) => failed += 1,
        }
    }
    if records.is_empty() {
        return Err(Error::RootFindingStalled(
            "every trial failed zero finding".into(),
        ));
    }
    let successes = records
        .iter()
        .filter(|r| r.recovered_count == r.true_count)
        .count();
    let count_success_rate = successes as f64 / records.len() as f64;
    let mut rms = Vec::with_capacity(cfg.k_max + 1);
    for k in 0..=cfg.k_max {
        let mse: f64 = records
            .iter()
            .map(|r| {
                let t = Complex64::new(r.true_power_sums[k].0, r.true_power_sums[k].1);
                let g = Complex64::new(r.recovered_power_sums[k].0, r.recovered_power_sums[k].1);
                (g - t).norm_sqr()
            })
            .sum::<f64>()
            / records.len() as f64;
        rms.push(mse.sqrt());
    }
    let mut dists: Vec<f64> = records.iter().filter_map(|r| r.matching_distance).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean_matching_distance = if dists.is_empty() {
        None
    } else {
        Some(dists.iter().sum::<f64>() / dists.len() as f64)
    };
    let median_matching_distance = if dists.is_empty() {
        None
    } else {
        Some(dists[dists.len() / 2])
    };
    Ok(RecoveryReport {
        family: spec.family().to_string(),
        d_radius: cfg.d_radius,
        k_max: cfg.k_max,
        eta: cfg.eta,
        trials: cfg.trials,
        seed: cfg.seed,
        failed_trials: failed,
        count_success_rate,
        rms_error_per_k: rms,
        mean_matching_distance,
        median_matching_distance,
        records,
    })
}

fn run_trial(
    spec: &KernelSpec,
    cfg: &RigidityConfig,
    tfs: &[TestFunction],
    expected: &[Complex64],
    t: u32,
) -> Result<TrialRecord> {
    let l = cfg.d_radius;
    let support = tfs[0].support_radius();
    let seed_t = derive_seed(cfg.seed, t as u64);
    let f = SampledFunction::sample_in_disk(spec, support, 1e-12, seed_t)?;
    let zs = zeros_in_disk(&f, support)?;
    let inside: Vec<Complex64> = zs.points.iter().copied().filter(|z| z.norm() <= l).collect();
    let true_count = inside.len();

    let mut true_s = Vec::with_capacity(tfs.len());
    let mut rec_s = Vec::with_capacity(tfs.len());
    let mut rec_complex = Vec::with_capacity(tfs.len());
    for (k, tf) in tfs.iter().enumerate() {
        let t_sum: Complex64 = inside.iter().map(|z| z.powu(k as u32)).sum();
        let r_sum = recover_power_sum_with_expected(&zs, tf, expected[k])?;
        true_s.push((t_sum.re, t_sum.im));
        rec_s.push((r_sum.re, r_sum.im));
        rec_complex.push(r_sum);
    }

    let raw = rec_complex[0].re;
    let rounded = raw.round().max(0.0) as usize;
    let dist = (raw - raw.round()).abs();

    let mut reconstructed = Vec::new();
    let mut matching = None;
    let mut ill = false;
    if rounded <= cfg.k_max {
        let mut s_arr = vec![Complex64::new(rounded as f64, 0.0)];
        for k in 1..=rounded {
            s_arr.push(rec_complex[k]);
        }
        let rec = newton_reconstruct(&s_arr)?;
        ill = rec.ill_conditioned;
        reconstructed = rec.points.iter().map(|z| (z.re, z.im)).collect();
        if rounded == true_count {
            matching = Some(matching_distance(&inside, &rec.points));
        }
    }

    Ok(TrialRecord {
        trial: t,
        seed: seed_t,
        true_count,
        recovered_count_raw: raw,
        recovered_count: rounded,
        count_distance_to_integer: dist,
        true_power_sums: true_s,
        recovered_power_sums: rec_s,
        true_inside: inside.iter().map(|z| (z.re, z.im)).collect(),
        reconstructed,
        matching_distance: matching,
        ill_conditioned: ill,
    })
}
