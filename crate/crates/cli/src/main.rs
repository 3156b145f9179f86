//! Command-line surface: run one model layer, compare layers on a shared
//! grid, sweep pump photon numbers, or execute the invariant self-test.

mod output;

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex;

use pdc_core::analysis::{extract_features, SweepRow};
use pdc_core::driver::run_method;
use pdc_core::{Method, SimConfig64, Trajectory64};

#[derive(Debug, Parser)]
#[command(
    name = "pdc",
    version,
    about = "Degenerate parametric down-conversion simulator (classical, linearized, mean-field and exact layers)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one model layer and write a trajectory CSV plus a features JSON.
    Run(RunArgs),
    /// Run several layers on a shared grid and report their divergence.
    Compare(CompareArgs),
    /// Sweep the pump photon number and tabulate conversion efficiencies.
    Sweep(SweepArgs),
    /// Execute the invariant suite on small instances.
    Selftest(SelftestArgs),
}

/// Options shared by the simulation subcommands. Flags override values from
/// the configuration file.
#[derive(Debug, Args, Clone)]
struct CommonOpts {
    /// TOML configuration file; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model layer: classical | linearized | meanfield | exact | adaptive.
    #[arg(long)]
    method: Option<String>,
    /// Mean pump photon number n2_0.
    #[arg(long)]
    n2: Option<f64>,
    /// Coupling strength K.
    #[arg(long)]
    k: Option<f64>,
    /// End of the output grid in scaled time tau = K sqrt(n2_0) t.
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of output grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Sub-harmonic coherent seed, "re" or "re,im".
    #[arg(long, value_name = "RE[,IM]")]
    seed_alpha1: Option<String>,
    /// Worker threads for sector propagation and sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Append a raw-time column (t = tau / (K sqrt(n2_0))) to the CSV.
    #[arg(long)]
    raw_time: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Trajectory CSV path ("-" for stdout).
    #[arg(long, default_value = "-")]
    out: String,
    /// Features JSON path (defaults to stderr when the CSV goes to stdout,
    /// or to <out>.features.json next to a CSV file).
    #[arg(long)]
    features_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Comma-separated list of layers to compare.
    #[arg(long, default_value = "meanfield,exact")]
    methods: String,
    /// Aligned multi-method CSV path ("-" for stdout).
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Comma-separated pump photon numbers.
    #[arg(long, value_name = "LIST", default_value = "50,100,200")]
    n2_list: String,
    /// Sweep table CSV path ("-" for stdout).
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_complex(s: &str) -> Result<Complex<f64>> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex::new(
            f64::from_str(re.trim()).context("bad real part")?,
            0.0,
        )),
        [re, im] => Ok(Complex::new(
            f64::from_str(re.trim()).context("bad real part")?,
            f64::from_str(im.trim()).context("bad imaginary part")?,
        )),
        _ => bail!("expected `re` or `re,im`, got `{s}`"),
    }
}

/// Build the effective configuration: file values first, flags on top.
fn build_config(common: &CommonOpts) -> Result<SimConfig64> {
    let mut cfg: SimConfig64 = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SimConfig64::default(),
    };
    if let Some(m) = &common.method {
        cfg.method = Method::from_str(m).map_err(|e| anyhow!("{e}"))?;
    }
    if let Some(n2) = common.n2 {
        cfg.n2_0 = n2;
    }
    if let Some(k) = common.k {
        cfg.k = k;
    }
    if let Some(tmax) = common.tmax {
        cfg.t_max_scaled = Some(tmax);
    }
    if let Some(points) = common.points {
        cfg.n_points = points;
    }
    if let Some(seed) = &common.seed_alpha1 {
        cfg.seed_alpha1 = parse_complex(seed)?;
    }
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing thread pool")?;
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    init_threads(args.common.threads)?;
    let cfg = build_config(&args.common)?;
    let traj: Trajectory64 = run_method(&cfg).map_err(|e| anyhow!("{e}"))?;
    let features = extract_features(&traj).map_err(|e| anyhow!("{e}"))?;

    let csv = output::trajectory_csv(&traj, args.common.raw_time);
    let features_doc = output::features_json(&cfg, &features)?;

    if args.out == "-" {
        print!("{csv}");
        match &args.features_out {
            Some(path) => std::fs::write(path, &features_doc)
                .with_context(|| format!("writing {}", path.display()))?,
            None => eprintln!("{features_doc}"),
        }
    } else {
        std::fs::write(&args.out, &csv).with_context(|| format!("writing {}", args.out))?;
        let fpath = args
            .features_out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.features.json", args.out)));
        std::fs::write(&fpath, &features_doc)
            .with_context(|| format!("writing {}", fpath.display()))?;
        eprintln!("wrote {} and {}", args.out, fpath.display());
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    init_threads(args.common.threads)?;
    let base = build_config(&args.common)?;
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|m| Method::from_str(m.trim()).map_err(|e| anyhow!("{e}")))
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        bail!("no methods requested");
    }

    let mut survivors: Vec<(Method, Trajectory64)> = Vec::new();
    for method in &methods {
        let mut cfg = base.clone();
        cfg.method = *method;
        match run_method(&cfg) {
            Ok(traj) => survivors.push((*method, traj)),
            Err(e) => eprintln!("method {} failed: {e}", method.tag()),
        }
    }
    if survivors.is_empty() {
        bail!("every requested method failed");
    }

    let csv = output::compare_csv(&survivors, args.common.raw_time, base.time_scale());
    if args.out == "-" {
        print!("{csv}");
    } else {
        std::fs::write(&args.out, &csv).with_context(|| format!("writing {}", args.out))?;
        eprintln!("wrote {}", args.out);
    }

    // Divergence report: max relative <n1> deviation per method pair, and
    // the scaled time at which mean-field and exact pump amplitudes first
    // differ by 5%.
    for i in 0..survivors.len() {
        for j in i + 1..survivors.len() {
            let (ma, ta) = &survivors[i];
            let (mb, tb) = &survivors[j];
            let mut worst = 0.0f64;
            let mut t_worst = 0.0f64;
            for (k, (pa, pb)) in ta.points.iter().zip(&tb.points).enumerate() {
                let denom = pa.n1.abs().max(pb.n1.abs()).max(1e-12);
                let rel = (pa.n1 - pb.n1).abs() / denom;
                if rel > worst {
                    worst = rel;
                    t_worst = ta.times[k];
                }
            }
            println!(
                "divergence {} vs {}: max relative <n1> deviation {:.6e} at tau = {:.6}",
                ma.tag(),
                mb.tag(),
                worst,
                t_worst
            );
        }
    }
    let mf = survivors.iter().find(|(m, _)| *m == Method::Meanfield);
    let ex = survivors
        .iter()
        .find(|(m, _)| matches!(m, Method::Exact | Method::Adaptive));
    if let (Some((_, tmf)), Some((me, tex))) = (mf, ex) {
        let x0 = tmf.points[0].a2.re.abs().max(1e-12);
        let mut crossing: Option<f64> = None;
        for (k, (pa, pb)) in tmf.points.iter().zip(&tex.points).enumerate() {
            if (pa.a2.re - pb.a2.re).abs() / x0 >= 0.05 {
                crossing = Some(tmf.times[k]);
                break;
            }
        }
        match crossing {
            Some(t) => println!(
                "pump amplitudes of meanfield and {} first differ by 5% at tau = {:.6}",
                me.tag(),
                t
            ),
            None => println!(
                "pump amplitudes of meanfield and {} stay within 5% over the grid",
                me.tag()
            ),
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    init_threads(args.common.threads)?;
    let mut template = build_config(&args.common)?;
    if args.common.method.is_none() {
        template.method = Method::Exact;
    }
    let n2_list: Vec<f64> = args
        .n2_list
        .split(',')
        .map(|s| f64::from_str(s.trim()).context("bad n2 value"))
        .collect::<Result<_>>()?;

    let rows = sweep_rows(&n2_list, &template)?;
    let csv = output::sweep_csv(&rows);
    if args.out == "-" {
        print!("{csv}");
    } else {
        std::fs::write(&args.out, &csv).with_context(|| format!("writing {}", args.out))?;
        eprintln!("wrote {}", args.out);
    }
    if rows.iter().any(|r| r.error.is_some()) {
        bail!("one or more sweep rows failed; see the errors column");
    }
    Ok(())
}

fn sweep_rows(n2_list: &[f64], template: &SimConfig64) -> Result<Vec<SweepRow<f64>>> {
    if template.method == Method::Exact {
        pdc_core::analysis::efficiency_sweep(n2_list, template).map_err(|e| anyhow!("{e}"))
    } else {
        // non-exact layers reuse the generic driver per row
        Ok(n2_list
            .iter()
            .map(|&n2_0| {
                let start = std::time::Instant::now();
                let mut cfg = template.clone();
                cfg.n2_0 = n2_0;
                let outcome = run_method(&cfg).and_then(|t| extract_features(&t));
                let runtime_s = start.elapsed().as_secs_f64();
                match outcome {
                    Ok(f) => SweepRow {
                        n2_0,
                        max_efficiency: Some(f.max_conversion_efficiency),
                        t_of_max: Some(f.t_of_max_conversion),
                        runtime_s,
                        error: None,
                    },
                    Err(e) => SweepRow {
                        n2_0,
                        max_efficiency: None,
                        t_of_max: None,
                        runtime_s,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect())
    }
}

fn cmd_selftest(args: &SelftestArgs) -> Result<()> {
    init_threads(args.threads)?;
    let results = pdc_core::selftest::run_selftest();
    let mut failed = 0usize;
    for r in &results {
        let status = if r.pass { "ok  " } else { "FAIL" };
        println!("{status} {:32} {}", r.name, r.detail);
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        bail!("{failed} of {} selftest checks failed", results.len());
    }
    println!("all {} checks passed", results.len());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Selftest(args) => cmd_selftest(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
