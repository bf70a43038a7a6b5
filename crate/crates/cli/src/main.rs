mod input;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use povmix::classifier::Branch;
use povmix::distributions::sample_poisson_mixture;
use povmix::pot::mean_residual_life;
use povmix::rng::substream;
use povmix::study::{
    run_study, shape_sweep, summarize, write_records_csv, write_summary_csv, write_sweep_csv, write_timings_csv,
    SweepConfig,
};
use povmix::{classify, ClassifierConfig, DecisionTrace, MixingLaw};

/// Replicate count used by `study --paper`.
const PAPER_REPLICATES: usize = 1000;
const THREADS_ENV: &str = "POVMIX_THREADS";

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<povmix::Error> for CliError {
    fn from(e: povmix::Error) -> Self {
        match e {
            povmix::Error::Numerical(_) | povmix::Error::PoissonOverflow(_) => Self::numerical(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::input(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "povmix", version, about = "Tail classification of overdispersed counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a counts file as frechet, gumbel or pseudo-gumbel.
    Classify(ClassifyArgs),
    /// Draw counts from a Poisson mixture.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo study described by a config file.
    Study(StudyArgs),
    /// Mean residual life table over a threshold grid.
    Mrl(MrlArgs),
    /// First-stage rejection rate across inverse-Gaussian shapes.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Counts file, one integer per line ("-" for stdin).
    #[arg(long)]
    input: PathBuf,
    /// Quantile level of the threshold.
    #[arg(long, default_value_t = 0.95)]
    quantile: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates per goodness-of-fit test.
    #[arg(long, default_value_t = 250)]
    boot: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Aligned key/value report (default).
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// One of gamma, exponential, lognormal, frechet, folded-cauchy, weibull,
    /// inverse-gamma, beta2, inverse-gaussian.
    #[arg(long)]
    law: String,
    /// Comma-separated parameters, e.g. 2,1.
    #[arg(long, allow_hyphen_values = true)]
    params: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for records.csv, summary.csv and timings.csv.
    #[arg(long)]
    out: PathBuf,
    /// Use 1000 replicates per scenario.
    #[arg(long)]
    paper: bool,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MrlArgs {
    #[arg(long)]
    input: PathBuf,
    /// Thresholds as LO:HI:STEP.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    #[arg(long, default_value = "0.1,0.5,1,2,4,8")]
    sigmas: String,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 0.975)]
    quantile: f64,
    #[arg(long, default_value_t = 500)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 250)]
    boot: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Study(a) => cmd_study(a),
        Command::Mrl(a) => cmd_mrl(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::input(format!("{THREADS_ENV}='{v}' is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn capped_workers(requested: usize) -> CliResult<usize> {
    Ok(match (requested, thread_cap()?) {
        (0, Some(cap)) => cap,
        (w, Some(cap)) => w.min(cap),
        (w, None) => w,
    })
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    quantile: f64,
    alpha: f64,
    boot: usize,
    n_obs: usize,
    #[serde(flatten)]
    trace: DecisionTrace,
}

fn cmd_classify(a: ClassifyArgs) -> CliResult {
    let ys = input::parse_counts(&read_text(&a.input)?)?;
    let seed = resolve_seed(a.seed);
    let cfg = ClassifierConfig { threshold_p: a.quantile, alpha: a.alpha, n_boot: a.boot, seed, ..Default::default() };
    let c = classify(&ys, &cfg)?;
    let report = Report { seed, quantile: a.quantile, alpha: a.alpha, boot: a.boot, n_obs: ys.len(), trace: c.trace };
    let mut out = io::stdout().lock();
    if a.json {
        let s = serde_json::to_string_pretty(&report).map_err(|e| CliError::numerical(e.to_string()))?;
        writeln!(out, "{s}")?;
    } else {
        write_text_report(&mut out, &report)?;
    }
    Ok(())
}

fn write_text_report(out: &mut impl Write, r: &Report) -> io::Result<()> {
    let t = &r.trace;
    let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
    let category = match t.category.reason() {
        Some(reason) => format!("{} ({})", t.category.label(), reason.code()),
        None => t.category.label().to_string(),
    };
    let rows = [
        ("category", category),
        ("branch", t.branch.map_or("-".into(), |b| branch_label(b).into())),
        ("observations", r.n_obs.to_string()),
        ("threshold", format!("{} (q{})", t.u, r.quantile)),
        ("excesses", t.n_excess.to_string()),
        ("gamma_hat", f(t.gamma_hat)),
        ("sigma_hat", f(t.sigma_hat)),
        ("loglik", f(t.loglik)),
        ("fit_converged", t.fit_converged.map_or("-".into(), |b| b.to_string())),
        ("mad1_t", f(t.mad1_t)),
        ("mad1_p", f(t.mad1_p)),
        ("dev_d", f(t.dev_d)),
        ("dev_p", f(t.dev_p)),
        ("sigma_jitter", f(t.sigma_jitter)),
        ("mad2_t", f(t.mad2_t)),
        ("mad2_p", f(t.mad2_p)),
        ("alpha", r.alpha.to_string()),
        ("bootstrap", r.boot.to_string()),
        ("seed", r.seed.to_string()),
    ];
    for (k, v) in rows {
        writeln!(out, "{k:<14} {v}")?;
    }
    Ok(())
}

fn branch_label(b: Branch) -> &'static str {
    match b {
        Branch::GpdAdequate => "gpd-adequate",
        Branch::GpdRejected => "gpd-rejected",
    }
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let law = MixingLaw::from_name(&a.law, &input::parse_list(&a.params)?)?;
    let seed = resolve_seed(a.seed);
    let ys = sample_poisson_mixture(&law, a.n, &mut substream(seed, &[]))?;
    let mut out = open_out(a.out.as_deref())?;
    for y in &ys {
        writeln!(out, "{y}")?;
    }
    out.flush()?;
    let n = ys.len() as f64;
    let mean = ys.iter().map(|&y| y as f64).sum::<f64>() / n;
    let var = if ys.len() > 1 { ys.iter().map(|&y| (y as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    eprintln!("law: {law}\nseed: {seed}\nmean: {mean:.6}\nvariance: {var:.6}");
    Ok(())
}

const STUDY_FILES: [&str; 3] = ["records.csv", "summary.csv", "timings.csv"];

fn cmd_study(a: StudyArgs) -> CliResult {
    let parsed = input::parse_study(&read_text(&a.config)?)?;
    let mut cfg = parsed.config;
    if a.paper {
        cfg.replicates = PAPER_REPLICATES;
    }
    cfg.seed = match a.seed {
        Some(s) => s,
        None if parsed.has_seed => cfg.seed,
        None => resolve_seed(None),
    };
    cfg.workers = capped_workers(cfg.workers)?;
    cfg.validate()?;

    let paths: Vec<PathBuf> = STUDY_FILES.iter().map(|f| a.out.join(f)).collect();
    if !a.force {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(CliError::input(format!("{} exists; pass --force to overwrite", p.display())));
        }
    }
    fs::create_dir_all(&a.out).map_err(|e| CliError::input(format!("{}: {e}", a.out.display())))?;

    let records = run_study(&cfg)?;
    let summaries = summarize(&records);
    write_records_csv(&records, fs::File::create(&paths[0])?)?;
    write_summary_csv(&summaries, fs::File::create(&paths[1])?)?;
    write_timings_csv(&records, fs::File::create(&paths[2])?)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "{} scenarios x {} replicates (seed {}, {failed} failed) -> {}",
        cfg.scenarios.len(),
        cfg.replicates,
        cfg.seed,
        a.out.display()
    );
    Ok(())
}

fn cmd_mrl(a: MrlArgs) -> CliResult {
    let ys = input::parse_counts(&read_text(&a.input)?)?;
    let grid = input::parse_grid(&a.grid)?;
    let rows = mean_residual_life(&ys, &grid);
    let mut w = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    w.write_record(["u", "mean_excess", "ci_lo", "ci_hi", "n_excess"])?;
    let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([r.u.to_string(), f(r.mean_excess), f(r.ci_lo), f(r.ci_hi), r.n_excess.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CliResult {
    let cfg = SweepConfig {
        mu: a.mu,
        sigmas: input::parse_list(&a.sigmas)?,
        n: a.n,
        threshold_p: a.quantile,
        replicates: a.replicates,
        alpha: a.alpha,
        n_boot: a.boot,
        seed: resolve_seed(a.seed),
        workers: capped_workers(0)?,
        ..Default::default()
    };
    let rows = shape_sweep(&cfg)?;
    write_sweep_csv(&rows, open_out(a.out.as_deref())?)?;
    Ok(())
}
