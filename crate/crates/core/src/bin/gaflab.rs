//! Deterministic experiment runner: parses config, dispatches subcommands,
//! persists JSON/CSV/SVG artifacts. Identical config and seed give
//! byte-identical outputs at any parallelism level.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use gaflab::admissibility::{admissibility_report, default_r_grid, default_t_grid};
use gaflab::linstat::{variance_report, TestFunction};
use gaflab::report::{fmt_f64, loglog_svg, write_csv, write_json, zero_overlay_svg};
use gaflab::rigidity::{rigidity_experiment, RigidityConfig};
use gaflab::sampler::SampledFunction;
use gaflab::zerofinder::zeros_in_disk;
use gaflab::{Error, KernelSpec};

#[derive(Parser)]
#[command(name = "gaflab", version, about = "Gaussian entire function laboratory")]
struct Cli {
    /// Rayon thread count (defaults to the number of cores). Outputs do not
    /// depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for report artifacts.
    #[arg(long, global = true, default_value = "gaflab-out")]
    output_dir: PathBuf,

    /// Optional key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print kernel quantities at a radius: log G, a, b, intensity.
    KernelInfo(KernelInfoArgs),
    /// Admissibility diagnostics over an r-grid.
    Admissibility(AdmissibilityArgs),
    /// Sample realizations and write their zero sets.
    SampleZeros(SampleZerosArgs),
    /// Variance of a linear statistic: Monte Carlo, quadrature, and bound.
    Variance(VarianceArgs),
    /// Recover inside zeros from outside zeros over many trials.
    Rigidity(RigidityArgs),
}

#[derive(Args)]
struct KernelInfoArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct AdmissibilityArgs {
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated r grid; family default when omitted.
    #[arg(long)]
    r_grid: Option<String>,
}

#[derive(Args)]
struct SampleZerosArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    tail_tol: Option<f64>,
}

#[derive(Args)]
struct VarianceArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    eta: Option<f64>,
    /// Comma-separated list of L values; one report per L.
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Emit a log-log SVG of variance vs L (needs at least two L values).
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct RigidityArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    d_radius: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_err()
        {
            eprintln!("warning: global thread pool already initialized");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) | Err(e @ Error::InvalidInput(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(3)
        }
    }
}

/// key=value lines, # comments; keys must belong to the allowlist.
fn load_config(path: &Path, allowed: &[&str]) -> Result<BTreeMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(Error::Config(format!(
                "{}:{}: unknown key '{k}' (allowed: {})",
                path.display(),
                i + 1,
                allowed.join(", ")
            )));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn get<T: std::str::FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
    default: Option<T>,
) -> Result<T, Error> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(raw) = file.get(key) {
        return raw
            .parse()
            .map_err(|_| Error::Config(format!("bad value for {key}: {raw}")));
    }
    default.ok_or_else(|| Error::Config(format!("missing required parameter: {key}")))
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} entry: {p}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    std::fs::create_dir_all(&cli.output_dir)?;
    let out = cli.output_dir.clone();
    match cli.command {
        Command::KernelInfo(a) => {
            let file = match &cli.config {
                Some(p) => load_config(p, &["family", "r"])?,
                None => BTreeMap::new(),
            };
            let family = get(a.family, &file, "family", None::<String>)?;
            let r = get(a.r, &file, "r", None::<f64>)?;
            let spec = KernelSpec::from_family_str(&family)?;
            let log_g = spec.log_g(r)?;
            let (av, bv) = spec.a_b_of(r)?;
            let rho = spec.first_intensity(Complex64::new(r.sqrt(), 0.0))?;
            let expected = spec.expected_zero_count(r)?;
            let mut config = BTreeMap::new();
            config.insert("family".into(), family.clone());
            config.insert("r".into(), fmt_f64(r));
            #[derive(serde::Serialize)]
            struct KernelInfo {
                log_g: f64,
                a: f64,
                b: f64,
                intensity_at_sqrt_r: f64,
                expected_zero_count_in_disk_r: f64,
            }
            println!("family {family} at r = {r}:");
            println!("  log G(r)        = {log_g:.12e}");
            println!("  a(r)            = {av:.12e}");
            println!("  b(r)            = {bv:.12e}");
            println!("  rho_1(sqrt(r))  = {rho:.12e}");
            println!("  E#zeros(|z|<=r) = {expected:.12e}");
            write_json(
                &out.join("kernel_info.json"),
                &config,
                KernelInfo {
                    log_g,
                    a: av,
                    b: bv,
                    intensity_at_sqrt_r: rho,
                    expected_zero_count_in_disk_r: expected,
                },
            )?;
        }
        Command::Admissibility(a) => {
            let file = match &cli.config {
                Some(p) => load_config(p, &["family", "r-grid"])?,
                None => BTreeMap::new(),
            };
            let family = get(a.family, &file, "family", None::<String>)?;
            let spec = KernelSpec::from_family_str(&family)?;
            let r_grid = match get(a.r_grid, &file, "r-grid", Some(String::new())) {
                Ok(s) if !s.is_empty() => parse_f64_list(&s, "r-grid")?,
                _ => default_r_grid(&spec),
            };
            let t_grid = default_t_grid(&spec);
            let rep = admissibility_report(&spec, &r_grid, &t_grid)?;
            let mut config = BTreeMap::new();
            config.insert("family".into(), family.clone());
            config.insert(
                "r-grid".into(),
                r_grid.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
            );
            let rows: Vec<Vec<String>> = (0..rep.r_grid.len())
                .map(|i| {
                    vec![
                        fmt_f64(rep.r_grid[i]),
                        fmt_f64(rep.delta_hat[i]),
                        fmt_f64(rep.major_arc_err[i]),
                        fmt_f64(rep.minor_arc_ratio[i]),
                        fmt_f64(rep.minor_arc_ratio_quartic[i]),
                    ]
                })
                .collect();
            write_csv(
                &out.join("admissibility.csv"),
                &config,
                &["r", "delta_hat", "major_arc_err", "minor_arc_ratio", "minor_arc_ratio_quartic"],
                &rows,
            )?;
            println!(
                "admissibility({family}): major_arc_err {:?} minor_arc_ratio {:?} convexity_min {:.3e} b_divergent {}",
                rep.major_arc_err, rep.minor_arc_ratio, rep.convexity_min, rep.b_divergent
            );
            write_json(&out.join("admissibility_report.json"), &config, rep)?;
        }
        Command::SampleZeros(a) => {
            let file = match &cli.config {
                Some(p) => load_config(p, &["family", "radius", "seed", "trials", "tail-tol"])?,
                None => BTreeMap::new(),
            };
            let family = get(a.family, &file, "family", None::<String>)?;
            let radius = get(a.radius, &file, "radius", None::<f64>)?;
            let seed = get(a.seed, &file, "seed", Some(1))?;
            let trials = get(a.trials, &file, "trials", Some(1))?;
            let tail_tol = get(a.tail_tol, &file, "tail-tol", Some(1e-12))?;
            let spec = KernelSpec::from_family_str(&family)?;
            let mut config = BTreeMap::new();
            config.insert("family".into(), family.clone());
            config.insert("radius".into(), fmt_f64(radius));
            config.insert("seed".into(), seed.to_string());
            config.insert("trials".into(), trials.to_string());
            config.insert("tail-tol".into(), fmt_f64(tail_tol));
            let mut rows = Vec::new();
            let mut counts = Vec::new();
            for t in 0..trials {
                let s = gaflab::rng::derive_seed(seed, t as u64);
                let f = SampledFunction::sample_in_disk(&spec, radius, tail_tol, s)?;
                let zs = zeros_in_disk(&f, radius)?;
                counts.push(zs.points.len());
                for (z, res) in zs.points.iter().zip(zs.residuals.iter()) {
                    rows.push(vec![
                        s.to_string(),
                        fmt_f64(z.re),
                        fmt_f64(z.im),
                        fmt_f64(*res),
                    ]);
                }
            }
            write_csv(
                &out.join("zeros.csv"),
                &config,
                &["sample_seed", "re", "im", "residual"],
                &rows,
            )?;
            #[derive(serde::Serialize)]
            struct Summary {
                counts: Vec<usize>,
                mean_count: f64,
                expected_count: f64,
            }
            let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
            let expected = spec.expected_zero_count(radius)?;
            println!(
                "sample-zeros({family}, R={radius}): mean count {mean:.3} over {trials} trials (expected {expected:.3})"
            );
            write_json(
                &out.join("zeros_summary.json"),
                &config,
                Summary {
                    counts,
                    mean_count: mean,
                    expected_count: expected,
                },
            )?;
        }
        Command::Variance(a) => {
            let file = match &cli.config {
                Some(p) => load_config(p, &["family", "k", "eta", "l", "trials", "seed"])?,
                None => BTreeMap::new(),
            };
            let family = get(a.family, &file, "family", None::<String>)?;
            let k = get(a.k, &file, "k", Some(0))?;
            let eta = get(a.eta, &file, "eta", None::<f64>)?;
            let l_list = parse_f64_list(&get(a.l, &file, "l", None::<String>)?, "l")?;
            let trials = get(a.trials, &file, "trials", Some(10_000))?;
            let seed = get(a.seed, &file, "seed", Some(1))?;
            let spec = KernelSpec::from_family_str(&family)?;
            let mut config = BTreeMap::new();
            config.insert("family".into(), family.clone());
            config.insert("k".into(), k.to_string());
            config.insert("eta".into(), fmt_f64(eta));
            config.insert(
                "l".into(),
                l_list.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
            );
            config.insert("trials".into(), trials.to_string());
            config.insert("seed".into(), seed.to_string());
            let mut reports = Vec::new();
            let mut rows = Vec::new();
            for &l in &l_list {
                let tf = TestFunction::new(k, eta, l)?;
                let rep = variance_report(&spec, &tf, trials, seed)?;
                println!(
                    "variance({family}, k={k}, eta={eta}, L={l}): mc {:.6e} +- {:.2e}, quad {:.6e}, bound {:.3e}",
                    rep.mc_estimate, rep.mc_stderr, rep.quadrature_value, rep.bound_value
                );
                rows.push(vec![
                    family.clone(),
                    k.to_string(),
                    fmt_f64(eta),
                    fmt_f64(l),
                    trials.to_string(),
                    seed.to_string(),
                    fmt_f64(rep.mc_estimate),
                    fmt_f64(rep.mc_stderr),
                    fmt_f64(rep.quadrature_value),
                    fmt_f64(rep.bound_value),
                ]);
                reports.push(rep);
            }
            write_csv(
                &out.join("variance.csv"),
                &config,
                &[
                    "family", "k", "eta", "l", "trials", "seed", "mc_estimate", "mc_stderr",
                    "quadrature_value", "bound_value",
                ],
                &rows,
            )?;
            if a.plot && reports.len() >= 2 {
                let series = vec![
                    (
                        "mc".to_string(),
                        reports.iter().map(|r| (r.l, r.mc_estimate)).collect(),
                    ),
                    (
                        "quadrature".to_string(),
                        reports.iter().map(|r| (r.l, r.quadrature_value)).collect(),
                    ),
                ];
                std::fs::write(out.join("var_vs_l.svg"), loglog_svg(&series, "L", "Var"))?;
            }
            write_json(&out.join("variance_report.json"), &config, reports)?;
        }
        Command::Rigidity(a) => {
            let file = match &cli.config {
                Some(p) => load_config(
                    p,
                    &["family", "d-radius", "k-max", "eta", "trials", "seed"],
                )?,
                None => BTreeMap::new(),
            };
            let family = get(a.family, &file, "family", None::<String>)?;
            let d_radius = get(a.d_radius, &file, "d-radius", Some(1.0))?;
            let k_max = get(a.k_max, &file, "k-max", Some(4))?;
            let eta = get(a.eta, &file, "eta", None::<f64>)?;
            let trials = get(a.trials, &file, "trials", Some(200))?;
            let seed = get(a.seed, &file, "seed", Some(1))?;
            let spec = KernelSpec::from_family_str(&family)?;
            let cfg = RigidityConfig {
                d_radius,
                k_max,
                eta,
                trials,
                seed,
            };
            let rep = rigidity_experiment(&spec, &cfg)?;
            let mut config = BTreeMap::new();
            config.insert("family".into(), family.clone());
            config.insert("d-radius".into(), fmt_f64(d_radius));
            config.insert("k-max".into(), k_max.to_string());
            config.insert("eta".into(), fmt_f64(eta));
            config.insert("trials".into(), trials.to_string());
            config.insert("seed".into(), seed.to_string());
            println!(
                "rigidity({family}, eta={eta}): count success rate {:.3}, rms per k {:?}, median matching {:?}, failed {}",
                rep.count_success_rate, rep.rms_error_per_k, rep.median_matching_distance, rep.failed_trials
            );
            let mut rows = Vec::new();
            for rec in &rep.records {
                rows.push(vec![
                    rec.trial.to_string(),
                    rec.seed.to_string(),
                    rec.true_count.to_string(),
                    rec.recovered_count.to_string(),
                    fmt_f64(rec.recovered_count_raw),
                    fmt_f64(rec.count_distance_to_integer),
                    rec.matching_distance.map(fmt_f64).unwrap_or_default(),
                    rec.ill_conditioned.to_string(),
                ]);
            }
            write_csv(
                &out.join("rigidity_trials.csv"),
                &config,
                &[
                    "trial", "seed", "true_count", "recovered_count", "recovered_count_raw",
                    "count_distance_to_integer", "matching_distance", "ill_conditioned",
                ],
                &rows,
            )?;
            let mut ps_rows = Vec::new();
            for rec in &rep.records {
                for k in 0..=k_max {
                    ps_rows.push(vec![
                        rec.trial.to_string(),
                        k.to_string(),
                        fmt_f64(rec.true_power_sums[k].0),
                        fmt_f64(rec.true_power_sums[k].1),
                        fmt_f64(rec.recovered_power_sums[k].0),
                        fmt_f64(rec.recovered_power_sums[k].1),
                    ]);
                }
            }
            write_csv(
                &out.join("rigidity_power_sums.csv"),
                &config,
                &["trial", "k", "true_re", "true_im", "rec_re", "rec_im"],
                &ps_rows,
            )?;
            for rec in rep.records.iter().take(10) {
                let svg = zero_overlay_svg(
                    &rec.true_inside,
                    &rec.reconstructed,
                    d_radius,
                    &format!(
                        "trial {} true {} recovered {}",
                        rec.trial, rec.true_count, rec.recovered_count
                    ),
                );
                std::fs::write(out.join(format!("rigidity_overlay_{:02}.svg", rec.trial)), svg)?;
            }
            write_json(&out.join("recovery_report.json"), &config, rep)?;
        }
    }
    Ok(())
}
