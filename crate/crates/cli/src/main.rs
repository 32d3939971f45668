use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use polyspec_core::bounds::{evaluate_all, BoundInputs};
use polyspec_core::harness::{self, CheckSuite, Format, RunConfig, RunRecord};
use polyspec_core::lemma::{lemma1_fuzz, FuzzConfig};
use polyspec_core::Error;

const EXIT_VIOLATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

/// Eigenvalue lower bounds for the Dirichlet poly-Laplacian, checked
/// against finite-difference spectra.
#[derive(Parser, Debug)]
#[command(name = "polyspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve, extrapolate and compare every bound for k = 1..k_max.
    Run(RunArgs),
    /// Fuzz the radial moment inequality over sampled admissible profiles.
    #[command(name = "lemma1-fuzz")]
    Lemma1Fuzz(FuzzArgs),
    /// Run the Fourier-side checks for a config.
    #[command(name = "fourier-check")]
    FourierCheck(FourierArgs),
    /// Evaluate the closed-form bounds without solving anything.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, gnuplot.
    #[arg(long, value_delimiter = ',', value_parser = parse_format)]
    format: Option<Vec<Format>>,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3,5")]
    b_grid: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    l_max: usize,
    /// Fixed slope bound; drawn per seed when omitted.
    #[arg(long)]
    eta: Option<f64>,
    /// Write the full JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FourierArgs {
    #[arg(long)]
    config: PathBuf,
    /// Truncation radius of the z integrals.
    #[arg(long = "Z")]
    z_max: Option<f64>,
    #[arg(long)]
    dz: Option<f64>,
    /// Write the run record (with the check rows) into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: usize,
    #[arg(long = "V")]
    volume: f64,
    #[arg(long = "I")]
    inertia: f64,
    /// Rows are printed for 1..=k.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    json: bool,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    match s.trim() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        "gnuplot" => Ok(Format::Gnuplot),
        other => Err(format!("unknown format `{other}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Lemma1Fuzz(a) => fuzz(a),
        Command::FourierCheck(a) => fourier_check(a),
        Command::Bounds(a) => bounds(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::NoConvergence { .. }) => ExitCode::from(EXIT_SOLVER),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("POLYSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("POLYSPEC_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn load(path: &Path) -> Result<RunConfig> {
    harness::load_config(path).with_context(|| format!("loading {}", path.display()))
}

fn output_dir(config: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| {
        config
            .output
            .dir
            .as_ref()
            .map(|d| if d.is_absolute() { d.clone() } else { config.base_dir.join(d) })
    })
    .unwrap_or_else(|| PathBuf::from("."))
}

fn print_summary(rec: &RunRecord) {
    let r = &rec.report;
    println!(
        "{}  n={} l={}  V={:.6} I={:.6}  extrapolation order {}",
        r.domain,
        r.n,
        r.l,
        r.volume,
        r.inertia,
        rec.extrapolation_order.map_or("-".to_string(), |o| o.to_string())
    );
    println!(
        "{:>4} {:>14} {:>14} {:>14} {:>8}",
        "k", "mean_lambda", "theorem1", "classical", "margin"
    );
    for row in &r.rows {
        println!(
            "{:>4} {:>14.6} {:>14.6} {:>14.6} {:>8.4}{}",
            row.k,
            row.mean_lambda,
            row.theorem1,
            row.classical,
            row.margin_ratio,
            if row.passed { "" } else { "  VIOLATION" }
        );
    }
    for c in &rec.checks {
        if !c.passed {
            let tag = if c.advisory { "advisory" } else { "FAILED" };
            println!("{tag}: {} lhs={} rhs={} tol={}", c.name, c.lhs, c.rhs, c.tolerance);
        }
    }
    if let Some(f) = &rec.lemma1 {
        println!("lemma1: {} cases, {} violations", f.cases, f.violations.len());
    }
    if !rec.passed() {
        println!("run FAILED; refine the grid levels before suspecting the bound");
    }
}

fn run(a: RunArgs) -> Result<bool> {
    let config = load(&a.config)?;
    let rec = harness::run_report(&config)?;
    print_summary(&rec);
    let dir = output_dir(&config, a.out);
    let formats = a.format.unwrap_or_else(|| config.output.formats.clone());
    for p in harness::emit(&rec, &dir, &formats)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(rec.passed())
}

fn fuzz(a: FuzzArgs) -> Result<bool> {
    let cfg = FuzzConfig {
        seeds: a.seeds,
        first_seed: a.first_seed,
        b_grid: a.b_grid,
        l_max: a.l_max,
        eta: a.eta,
        ..FuzzConfig::default()
    };
    let report = lemma1_fuzz(&cfg)?;
    println!("{} cases, {} violations", report.cases, report.violations.len());
    if let Some(t) = &report.tightest {
        println!("tightest ratio {:.6} (seed {}, b {}, l {})", t.ratio(), t.seed, t.b, t.l);
    }
    if let Some(path) = a.report {
        std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.passed())
}

fn fourier_check(a: FourierArgs) -> Result<bool> {
    let mut config = load(&a.config)?;
    config.checks.insert(CheckSuite::Fourier);
    if a.z_max.is_some() {
        config.fourier.z_max = a.z_max;
    }
    if a.dz.is_some() {
        config.fourier.dz = a.dz;
    }
    let rec = harness::run_report(&config)?;
    let fourier: Vec<_> = rec
        .checks
        .iter()
        .filter(|c| !c.name.contains("theorem1=") && !c.name.contains("classical<"))
        .collect();
    let failed = fourier.iter().filter(|c| !c.passed && !c.advisory).count();
    for c in fourier.iter().filter(|c| !c.name.contains("z=")) {
        println!(
            "{:<20} {:>14.8} {:>14.8} {:>10.2e} {}",
            c.name,
            c.lhs,
            c.rhs,
            c.tolerance,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    println!("{} checks, {failed} failed", fourier.len());
    if let Some(dir) = a.out {
        for p in harness::emit(&rec, &dir, &[Format::Json])? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(rec.passed())
}

fn bounds(a: BoundsArgs) -> Result<bool> {
    if a.k == 0 {
        bail!("--k must be at least 1");
    }
    let base = BoundInputs::new(a.n, a.l, a.volume, a.inertia, 1)?;
    if !base.inertia_is_feasible() {
        eprintln!("warning: I is below the ball value for this V; no domain has these data");
    }
    let tables = (1..=a.k)
        .map(|k| evaluate_all(&base.with_k(k)))
        .collect::<polyspec_core::Result<Vec<_>>>()?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&tables)?);
        return Ok(true);
    }
    println!("k,asymptotic,classical,theorem1,melas,polya");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for t in &tables {
        println!(
            "{},{},{},{},{},{}",
            t.inputs.k,
            t.asymptotic_average,
            t.classical,
            t.theorem1,
            opt(t.melas),
            opt(t.polya)
        );
    }
    Ok(true)
}
