//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Criterion 9 is asserted twice: once exactly as specified -- a configuration
//! whose test-function support requires a truncation degree around 10^3800000,
//! so the run reports the infeasibility honestly and the test stays red with
//! the analysis in its message -- and once in the feasible narrow-annulus
//! regime, where the recovery machinery demonstrably improves as the cutoff
//! widens, which is the operative fully-rigid signal at desk scale.

use num_complex::Complex64;

use gaflab::admissibility::{check_log_convexity, verify_claim1, verify_claim2};
use gaflab::kernel::KernelSpec;
use gaflab::linstat::{variance_mc, variance_quadrature, variance_bound, TestFunction};
use gaflab::rigidity::{
    matching_distance, newton_reconstruct, rigidity_experiment, RigidityConfig,
};
use gaflab::rng::{counter_u64, counter_unit};
use gaflab::sampler::SampledFunction;
use gaflab::zerofinder::zeros_in_disk;

fn families_for_bounds() -> Vec<(KernelSpec, f64)> {
    // (spec, max |z| for random draws): radii keep every series under the
    // term cap while exercising a nontrivial range.
    vec![
        (KernelSpec::gef(), 3.5),
        (KernelSpec::mittag_leffler(2.0).unwrap(), 3.4),
        (KernelSpec::double_exp(), 3.4),
        (KernelSpec::lindelof(1.0).unwrap(), 2.2),
        (custom_family(), 3.5),
    ]
}

fn custom_family() -> KernelSpec {
    // Squared-factorial decay: a transcendental kernel of order 1/2 with no
    // closed form, exercising the pure series path everywhere.
    KernelSpec::custom_rule("inverse-square-factorial", |n| {
        -2.0 * libm::lgamma(n as f64 + 1.0)
    })
    .unwrap()
}

#[test]
fn criterion_01_intensity_law() {
    let trials = 20_000u64;
    // Flat kernel: one certified zero set per sample at R = 3 serves the
    // three nested radii.
    let spec = KernelSpec::gef();
    let mut counts = [Vec::new(), Vec::new(), Vec::new()];
    let edges_hist = [0.0, 0.6, 1.2, 1.8, 2.4, 3.0];
    let mut annulus_counts: Vec<Vec<f64>> = vec![Vec::new(); edges_hist.len() - 1];
    for seed in 0..trials {
        let f = SampledFunction::sample_in_disk(&spec, 3.0, 1e-12, seed).unwrap();
        let zs = zeros_in_disk(&f, 3.0).unwrap();
        for (i, r) in [1.0, 2.0, 3.0].iter().enumerate() {
            counts[i].push(zs.points.iter().filter(|z| z.norm() <= *r).count() as f64);
        }
        for b in 0..edges_hist.len() - 1 {
            let c = zs
                .points
                .iter()
                .filter(|z| z.norm() >= edges_hist[b] && z.norm() < edges_hist[b + 1])
                .count();
            annulus_counts[b].push(c as f64);
        }
    }
    let mut lines = Vec::new();
    for (i, r) in [1.0f64, 2.0, 3.0].iter().enumerate() {
        let want = r * r;
        let (mean, se) = mean_and_se(&counts[i]);
        lines.push(format!("R={r}: {mean:.4} vs {want} (se {se:.4})"));
        assert!(
            (mean - want).abs() <= 3.0 * se,
            "gef intensity at R={r}: mean {mean}, want {want}, se {se}"
        );
    }
    // Annulus histogram: per-bin counts match the flat intensity within 3
    // standard errors (expected count in an annulus is the area over pi).
    let edges = [0.0, 0.6, 1.2, 1.8, 2.4, 3.0];
    for b in 0..edges.len() - 1 {
        let (lo, hi) = (edges[b], edges[b + 1]);
        let want = hi * hi - lo * lo;
        let per_sample: Vec<f64> = annulus_counts[b].clone();
        let (mean, se) = mean_and_se(&per_sample);
        assert!(
            (mean - want).abs() <= 3.0 * se,
            "annulus [{lo},{hi}): mean {mean}, want {want}, se {se}"
        );
    }
    let de = KernelSpec::double_exp();
    let mut de_counts = Vec::new();
    for seed in 0..trials {
        let f = SampledFunction::sample_in_disk(&de, 1.0, 1e-12, 1_000_000 + seed).unwrap();
        de_counts.push(zeros_in_disk(&f, 1.0).unwrap().points.len() as f64);
    }
    let want = std::f64::consts::E;
    let (mean, se) = mean_and_se(&de_counts);
    assert!(
        (mean - want).abs() <= 3.0 * se,
        "double-exp intensity at R=1: mean {mean}, want {want}, se {se}"
    );
    println!(
        "criterion 01 (intensity law): PASS -- gef {}; double-exp R=1: {mean:.4} vs {want:.4} (se {se:.4})",
        lines.join("; ")
    );
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn criterion_02_kernel_bound() {
    let per_family = 10_000u64;
    for (spec, rad) in families_for_bounds() {
        let mut max_seen = 0.0f64;
        for i in 0..per_family {
            let z = random_point(7, 2 * i, rad);
            let w = random_point(7, 2 * i + 1, rad);
            let j2 = spec
                .normalized_kernel_sq(z, w)
                .unwrap_or_else(|e| panic!("{spec}: kernel bound violated: {e}"));
            assert!((0.0..=1.0).contains(&j2), "{spec}: |J|^2 = {j2}");
            if j2 > max_seen {
                max_seen = j2;
            }
        }
        // Diagonal: exactly one.
        for i in 0..32 {
            let z = random_point(13, i, rad);
            assert_eq!(spec.normalized_kernel_sq(z, z).unwrap(), 1.0, "{spec} at {z}");
        }
    }
    println!("criterion 02 (kernel bound): PASS -- |J|^2 in [0,1] on 1e4 pairs per family, diagonal exact");
}

fn random_point(stream: u64, i: u64, rad: f64) -> Complex64 {
    let r = rad * counter_unit(901, stream, 2 * i).sqrt();
    let th = 2.0 * std::f64::consts::PI * counter_unit(901, stream, 2 * i + 1);
    Complex64::from_polar(r, th)
}

#[test]
fn criterion_03_log_convexity() {
    let cases: Vec<(KernelSpec, f64)> = vec![
        (KernelSpec::gef(), 8.0),
        (KernelSpec::mittag_leffler(2.0).unwrap(), 5.4),
        (KernelSpec::double_exp(), 6.0),
        (KernelSpec::lindelof(1.0).unwrap(), 2.4),
        (custom_family(), 8.0),
    ];
    let mut details = Vec::new();
    for (spec, t_max) in cases {
        let grid: Vec<f64> = (0..96)
            .map(|i| -2.0 + (t_max + 2.0) * i as f64 / 95.0)
            .collect();
        let c = check_log_convexity(&spec, &grid).unwrap();
        assert!(
            c.min_second_difference >= -1e-9 * c.scale,
            "{spec}: min second difference {} at scale {}",
            c.min_second_difference,
            c.scale
        );
        details.push(format!("{spec}: {:.2e}", c.min_second_difference));
    }
    println!("criterion 03 (log convexity): PASS -- {}", details.join(", "));
}

#[test]
fn criterion_04_claim2_slack() {
    // 5x5x3 (r, s, L) grid per family; slack >= -1e-9 * scale and exactly 0
    // on the diagonal r = s.
    let cases: Vec<(KernelSpec, [f64; 3], [f64; 5])> = vec![
        (KernelSpec::gef(), [1.0, 2.0, 3.0], [0.5, 1.0, 1.5, 2.0, 2.5]),
        (
            KernelSpec::mittag_leffler(2.0).unwrap(),
            [1.0, 2.0, 3.0],
            [0.5, 1.0, 1.5, 2.0, 2.5],
        ),
        (KernelSpec::double_exp(), [1.0, 2.0, 3.0], [0.5, 1.0, 1.5, 2.0, 2.5]),
        (
            KernelSpec::lindelof(1.0).unwrap(),
            [1.0, 1.3, 1.6],
            [0.4, 0.8, 1.2, 1.5, 1.9],
        ),
        (custom_family(), [1.0, 2.0, 3.0], [0.5, 1.0, 1.5, 2.0, 2.5]),
    ];
    for (spec, ls, rs) in cases {
        for &l in &ls {
            for &r in &rs {
                for &s in &rs {
                    if s < r {
                        continue;
                    }
                    let slack = verify_claim2(&spec, l, r, s).unwrap();
                    if s == r {
                        assert_eq!(slack, 0.0, "{spec} r=s={r} L={l}");
                    } else {
                        let scale = (2.0 * spec.log_g(l * l * r * s).unwrap()).abs().max(1.0);
                        assert!(
                            slack >= -1e-9 * scale,
                            "{spec} L={l} r={r} s={s}: slack {slack}"
                        );
                    }
                }
            }
        }
    }
    println!("criterion 04 (normalized-kernel bound slack): PASS -- nonnegative on 5x5x3 grids, exact zero at r=s");
}

#[test]
fn criterion_05_inner_integral_boundedness() {
    let gef = KernelSpec::gef();
    let a1 = verify_claim1(&gef, 25.0).unwrap();
    let a2 = verify_claim1(&gef, 100.0).unwrap();
    assert!(
        (a2 - a1).abs() / a1 < 0.5,
        "gef ratio varies too much: {a1} vs {a2}"
    );
    let ml = KernelSpec::mittag_leffler(2.0).unwrap();
    let b1 = verify_claim1(&ml, 50.0).unwrap();
    let b2 = verify_claim1(&ml, 200.0).unwrap();
    assert!(
        (b2 - b1).abs() / b1 < 0.5,
        "mittag-leffler ratio varies too much: {b1} vs {b2}"
    );
    println!(
        "criterion 05 (inner-integral boundedness): PASS -- gef {a1:.4}->{a2:.4} (R 25->100), ml2 {b1:.4}->{b2:.4} (R 50->200)"
    );
}

#[test]
fn criterion_06_asymptotics_golden() {
    // Mittag-Leffler b(r)/(alpha^2 r^alpha) at r = 1e4: the pure series is
    // feasible for alpha <= 1 and checks the law directly; for alpha in
    // {2, 3} the saturated asymptotic is validated against the series on the
    // overlap window instead.
    let r = 1e4;
    for alpha in [0.5, 1.0] {
        let spec = KernelSpec::mittag_leffler(alpha).unwrap();
        let (_, b) = spec.a_b_series(r).unwrap();
        let ratio = b / (alpha * alpha * r.powf(alpha));
        assert!(
            (0.9..=1.1).contains(&ratio),
            "alpha={alpha}: series b ratio {ratio}"
        );
    }
    for (alpha, r_overlap) in [(2.0, 10.0), (3.0, 4.0)] {
        let spec = KernelSpec::mittag_leffler(alpha).unwrap();
        let (_, b_series) = spec.a_b_series(r_overlap).unwrap();
        let b_closed = spec.closed_b(r_overlap).expect("closed form active");
        assert!(
            (b_series / b_closed - 1.0).abs() < 1e-4,
            "alpha={alpha} overlap: {b_series} vs {b_closed}"
        );
        let ratio = spec.b_of(r).unwrap() / (alpha * alpha * r.powf(alpha));
        assert!((0.9..=1.1).contains(&ratio), "alpha={alpha}: {ratio}");
    }

    // Double exponential: series matches the exact closed forms to 1e-10.
    let de = KernelSpec::double_exp();
    for rr in [0.5, 1.0, 2.0, 4.0] {
        let (a_s, b_s) = de.a_b_series(rr).unwrap();
        let a_c = rr * rr.exp();
        let b_c = rr * (rr + 1.0) * rr.exp();
        assert!((a_s / a_c - 1.0).abs() < 1e-10, "a at {rr}: {a_s} vs {a_c}");
        assert!((b_s / b_c - 1.0).abs() < 1e-10, "b at {rr}: {b_s} vs {b_c}");
    }

    // Lindelof: b against its asymptotic law at the largest feasible radii.
    // With a(r) ~ exp(r^{1/alpha} - 1) and b = r a'(r), the law reads
    // log b = r^{1/alpha} + (log r)/alpha - 1 - log(alpha).
    let mut lines = Vec::new();
    for (alpha, r_max) in [(1.0, 11.5), (2.0, 121.0)] {
        let spec = KernelSpec::lindelof(alpha).unwrap();
        let (_, b) = spec.a_b_series(r_max).unwrap();
        let asym =
            (r_max.powf(1.0 / alpha) + r_max.ln() / alpha - 1.0 - alpha.ln()).exp();
        let ratio = b / asym;
        assert!(
            (0.85..=1.15).contains(&ratio),
            "lindelof alpha={alpha} at r={r_max}: ratio {ratio}"
        );
        lines.push(format!("lindelof:{alpha} ratio {ratio:.3}"));
    }
    println!(
        "criterion 06 (asymptotics golden): PASS -- ml ratios in [0.9,1.1] at r=1e4, dexp closed forms to 1e-10, {}",
        lines.join(", ")
    );
}

#[test]
fn criterion_07_variance_cross_oracle() {
    let gef = KernelSpec::gef();
    let ml = KernelSpec::mittag_leffler(0.5).unwrap();
    let configs: Vec<(&str, &KernelSpec, u32, f64, f64, u32)> = vec![
        ("gef", &gef, 0, 1.0, 1.0, 3000),
        ("gef", &gef, 1, 1.0, 1.0, 3000),
        ("gef", &gef, 0, 0.7, 1.0, 2500),
        ("mittag-leffler:0.5", &ml, 0, 0.5, 1.0, 3000),
        ("mittag-leffler:0.5", &ml, 1, 0.5, 1.0, 3000),
        ("mittag-leffler:0.5", &ml, 0, 0.25, 1.0, 2500),
    ];
    let mut lines = Vec::new();
    for (name, spec, k, eta, l, trials) in configs {
        let tf = TestFunction::new(k, eta, l).unwrap();
        let (mc, se, _) = variance_mc(spec, &tf, trials, 2024).unwrap();
        let quad = variance_quadrature(spec, &tf).unwrap();
        let bound = variance_bound(spec, &tf).unwrap();
        assert!(se > 0.0);
        assert!(
            (mc - quad).abs() <= 3.0 * se,
            "{name} k={k} eta={eta} L={l}: mc {mc} vs quad {quad} (se {se})"
        );
        assert!(
            bound >= quad,
            "{name} k={k} eta={eta} L={l}: bound {bound} below quadrature {quad}"
        );
        lines.push(format!(
            "{name}/k{k}/eta{eta}: mc {mc:.3e} quad {quad:.3e} (3se {:.1e}) bound {bound:.1e}",
            3.0 * se
        ));
    }
    println!(
        "criterion 07 (variance cross-oracle): PASS on 6 configurations --\n  {}",
        lines.join("\n  ")
    );
}

#[test]
fn criterion_08_variance_scaling() {
    let spec = KernelSpec::gef();
    // L doubled at fixed eta = 1.
    let tf_l2 = TestFunction::new(0, 1.0, 2.0).unwrap();
    let tf_l4 = TestFunction::new(0, 1.0, 4.0).unwrap();
    let (v_l2, se_l2, _) = variance_mc(&spec, &tf_l2, 2500, 41).unwrap();
    let (v_l4, se_l4, _) = variance_mc(&spec, &tf_l4, 1200, 42).unwrap();
    let l_ratio = v_l4 / v_l2;
    assert!(
        l_ratio <= 0.5,
        "Var(L=4)/Var(L=2) = {l_ratio} ({v_l4} +- {se_l4} over {v_l2} +- {se_l2})"
    );
    // eta halved at fixed L = 1.
    let tf_h = TestFunction::new(0, 0.5, 1.0).unwrap();
    let tf_q = TestFunction::new(0, 0.25, 1.0).unwrap();
    let (v_h, se_h, _) = variance_mc(&spec, &tf_h, 2500, 43).unwrap();
    let (v_q, se_q, _) = variance_mc(&spec, &tf_q, 100, 44).unwrap();
    let eta_ratio = v_q / v_h;
    assert!(
        eta_ratio <= 0.5,
        "Var(eta=1/4)/Var(eta=1/2) = {eta_ratio} ({v_q} +- {se_q} over {v_h} +- {se_h})"
    );
    println!(
        "criterion 08 (variance scaling): PASS -- L-doubling ratio {l_ratio:.3} <= 0.5, eta-halving ratio {eta_ratio:.3} <= 0.5"
    );
}

#[test]
fn criterion_09_rigidity_recovery_as_specified() {
    // Exactly the stated configuration: double-exponential kernel, unit
    // disk, eta = 1/8, 500 trials. The cutoff support then reaches
    // L e^{1/eta} = e^8 ~ 2981, where the expected zero count -- and with it
    // the truncation degree -- is about exp(e^16), putting the run beyond any
    // hardware. The experiment must refuse via the truncation cap; the
    // criterion's thresholds are therefore unattainable as stated and this
    // test documents that fact by failing.
    let spec = KernelSpec::double_exp();
    let cfg = RigidityConfig {
        d_radius: 1.0,
        k_max: 4,
        eta: 0.125,
        trials: 500,
        seed: 7,
    };
    match rigidity_experiment(&spec, &cfg) {
        Err(e) => {
            println!("criterion 09 (rigidity recovery, as specified): FAIL -- {e}");
            panic!(
                "configuration infeasible as specified: support radius e^8 = {:.0} needs \
                 a truncation degree near a(e^16) ~ 10^3800000; the run stops at the term \
                 cap with `{e}`. See criterion_09_supplement_fully_rigid_feasible_regime \
                 for the demonstrable narrow-annulus version.",
                (8.0f64).exp()
            );
        }
        Ok(rep) => {
            // Unreachable on any real hardware; keep the stated thresholds.
            assert!(rep.count_success_rate >= 0.9);
            let med = rep.median_matching_distance.unwrap_or(f64::INFINITY);
            assert!(med <= 0.1);
            println!("criterion 09 (rigidity recovery, as specified): PASS");
        }
    }
}

#[test]
fn criterion_09_supplement_fully_rigid_feasible_regime() {
    // Same estimator and reconstruction pipeline on annuli the double
    // exponential kernel can actually populate: recovery must improve
    // strictly as the cutoff widens (eta decreasing), the operative reading
    // of the fully-rigid claim at desk scale.
    let spec = KernelSpec::double_exp();
    let mut rates = Vec::new();
    let mut rms0 = Vec::new();
    let mut rms1 = Vec::new();
    let mut medians = Vec::new();
    for eta in [6.0, 3.0, 1.5] {
        let cfg = RigidityConfig {
            d_radius: 1.0,
            k_max: 8,
            eta,
            trials: 400,
            seed: 11,
        };
        let rep = rigidity_experiment(&spec, &cfg).unwrap();
        assert!(rep.failed_trials <= 4, "eta={eta}: {} failed trials", rep.failed_trials);
        rates.push(rep.count_success_rate);
        rms0.push(rep.rms_error_per_k[0]);
        rms1.push(rep.rms_error_per_k[1]);
        medians.push(rep.median_matching_distance);
    }
    assert!(
        rates[1] > rates[0] && rates[2] > rates[1],
        "count-recovery rate not strictly improving: {rates:?}"
    );
    assert!(
        rms0[1] < rms0[0] && rms0[2] < rms0[1],
        "count (S_0) recovery RMS not strictly improving: {rms0:?}"
    );
    assert!(
        rms1[2] < 0.9 * rms1[0],
        "S_1 recovery RMS did not improve across the sweep: {rms1:?}"
    );
    println!(
        "criterion 09 (supplement, feasible fully-rigid regime): PASS -- eta {{6,3,1.5}}: \
         count recovery rates {:.3?}, S0 RMS {:.3?}, S1 RMS {:.3?}, median matching {:?}",
        rates, rms0, rms1, medians
    );
}

#[test]
fn criterion_10_level_discrimination() {
    // Flat kernel has lower order 1: the k = 0 recovery error must decrease
    // monotonically as the cutoff widens, while k = 1 is reported alongside.
    let spec = KernelSpec::gef();
    let mut rms0 = Vec::new();
    let mut rms1 = Vec::new();
    for eta in [1.0, 0.7, 0.5] {
        let cfg = RigidityConfig {
            d_radius: 1.0,
            k_max: 1,
            eta,
            trials: 150,
            seed: 23,
        };
        let rep = rigidity_experiment(&spec, &cfg).unwrap();
        rms0.push(rep.rms_error_per_k[0]);
        rms1.push(rep.rms_error_per_k[1]);
    }
    assert!(
        rms0[1] < rms0[0] && rms0[2] < rms0[1],
        "k=0 RMS not monotone decreasing: {rms0:?}"
    );
    println!(
        "criterion 10 (level discrimination): PASS -- eta {{1, 0.7, 0.5}}: k=0 RMS {:.4?} strictly decreasing; k=1 RMS {:.4?} (reported)",
        rms0, rms1
    );
}

#[test]
fn criterion_11_newton_round_trip() {
    // 100 seeded multisets of size <= 12: power sums -> reconstruction ->
    // matching distance below 1e-6.
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let n = 1 + (counter_u64(555, 1, trial) % 12) as usize;
        let mut pts: Vec<Complex64> = Vec::with_capacity(n);
        let mut i = 0u64;
        while pts.len() < n {
            let re = 4.0 * counter_unit(trial, 8, i) - 2.0;
            let im = 4.0 * counter_unit(trial, 9, i) - 2.0;
            let z = Complex64::new(re, im);
            if pts.iter().all(|p| (p - z).norm() > 0.02) {
                pts.push(z);
            }
            i += 1;
        }
        let mut s = vec![Complex64::new(n as f64, 0.0)];
        for k in 1..=n {
            s.push(pts.iter().map(|z| z.powu(k as u32)).sum());
        }
        let rec = newton_reconstruct(&s).unwrap();
        let d = matching_distance(&pts, &rec.points);
        worst = worst.max(d);
        assert!(d < 1e-6, "trial {trial} (n={n}): matching distance {d}");
    }
    println!("criterion 11 (power-sum round trip): PASS -- worst matching distance {worst:.2e} over 100 multisets");
}

#[test]
fn criterion_12_determinism_across_parallelism() {
    let bin = env!("CARGO_BIN_EXE_gaflab");
    let base = std::env::temp_dir().join(format!("gaflab-acc12-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    let run = |dir: &std::path::Path, threads: &str, args: &[&str]| {
        let status = std::process::Command::new(bin)
            .arg("--threads")
            .arg(threads)
            .arg("--output-dir")
            .arg(dir)
            .args(args)
            .output()
            .expect("spawn gaflab");
        assert!(
            status.status.success(),
            "gaflab failed: {}",
            String::from_utf8_lossy(&status.stderr)
        );
    };
    let variance_args = [
        "variance", "--family", "gef", "--k", "0", "--eta", "1", "--l", "1", "--trials", "150",
        "--seed", "3",
    ];
    let rigidity_args = [
        "rigidity", "--family", "double-exp", "--d-radius", "1", "--k-max", "3", "--eta", "3",
        "--trials", "24", "--seed", "7",
    ];
    for (name, args) in [("variance", &variance_args[..]), ("rigidity", &rigidity_args[..])] {
        let d1 = base.join(format!("{name}-t1"));
        let d2 = base.join(format!("{name}-t2"));
        std::fs::create_dir_all(&d1).unwrap();
        std::fs::create_dir_all(&d2).unwrap();
        run(&d1, "1", args);
        run(&d2, "2", args);
        let mut names: Vec<_> = std::fs::read_dir(&d1)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for file in &names {
            let a = std::fs::read(d1.join(file)).unwrap();
            let b = std::fs::read(d2.join(file)).unwrap();
            assert_eq!(
                a,
                b,
                "{name}: artifact {:?} differs between thread counts",
                file
            );
        }
    }
    let _ = std::fs::remove_dir_all(&base);
    println!("criterion 12 (determinism): PASS -- byte-identical artifacts at 1 and 2 threads for variance and rigidity runs");
}
