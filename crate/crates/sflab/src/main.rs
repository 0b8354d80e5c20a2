use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sflab::acceptance::{run_suite, Variant};
use sflab::config::{ExperimentConfig, Mode};
use sflab::output::write_run;
use sflab::run::run;
use sflab::HarnessError;

/// Spectral flow of lattice domain-wall Dirac operators.
#[derive(Debug, Parser)]
#[command(name = "sflab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment file (flat key = value).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `out` key, then `results`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; the SFLAB_JOBS environment variable takes precedence.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomized inputs, overriding the config's `seed` key.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tracked spectral flow, endpoint eta and APS reference per config.
    Sf(RunArgs),
    /// Mod-two flow of the real odd-dimensional family.
    Mod2(RunArgs),
    /// Eta invariants of h(-1) and h(1).
    Eta(RunArgs),
    /// Spectral flow across lattice spacings.
    ScanA(RunArgs),
    /// Spectral flow across masses, with plateau report.
    ScanM(RunArgs),
    /// Interpolator convergence rates.
    Interp(RunArgs),
    /// Combined-operator invertibility along the staple path.
    Staple(RunArgs),
    /// Write gauge fields as JSON.
    GaugeGen(RunArgs),
    /// Run an acceptance suite and print one verdict per criterion.
    Acceptance {
        /// Suite name, e.g. `core`.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn thread_count(cli: Option<usize>) -> Result<Option<usize>, HarnessError> {
    match std::env::var("SFLAB_JOBS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Usage(format!("SFLAB_JOBS must be a positive integer, got '{v}'"))),
        },
        Err(_) => match cli {
            Some(0) => Err(HarnessError::Usage("--jobs must be positive".into())),
            other => Ok(other),
        },
    }
}

fn init_pool(jobs: Option<usize>) -> Result<(), HarnessError> {
    if let Some(n) = thread_count(jobs)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run_mode(mode: Mode, args: RunArgs) -> Result<(), HarnessError> {
    init_pool(args.jobs)?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let echo = format!("config {} (hash {})", args.config.display(), cfg.hash());
    let out = run(&cfg, mode).map_err(|e| annotate(e, &echo))?;
    let dir = args.out.or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let written = write_run(&dir, mode.name(), &out)?;
    for line in &out.summary {
        println!("{line}");
    }
    println!("{} rows; {echo}", out.rows.len());
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn annotate(e: HarnessError, echo: &str) -> HarnessError {
    match e {
        HarnessError::Usage(m) => HarnessError::Usage(format!("{m} [{echo}]")),
        HarnessError::Config(m) => HarnessError::Config(format!("{m} [{echo}]")),
        HarnessError::Numerical(m) => HarnessError::Numerical(format!("{m} [{echo}]")),
        HarnessError::Io(m) => HarnessError::Io(format!("{m} [{echo}]")),
    }
}

fn acceptance(suite: &str, out: Option<&Path>, jobs: Option<usize>) -> Result<bool, HarnessError> {
    init_pool(jobs)?;
    let verdicts = run_suite(suite, Variant::Faithful, |v| println!("{v}"))?;
    if let Some(dir) = out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["criterion", "name", "passed", "elapsed_s", "detail"])
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        for v in &verdicts {
            w.write_record([
                v.id.to_string(),
                v.name.to_string(),
                v.passed.to_string(),
                format!("{:.3}", v.elapsed.as_secs_f64()),
                v.detail.clone(),
            ])
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(e.to_string()))?;
        std::fs::write(dir.join(format!("acceptance-{suite}.csv")), bytes)
            .map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    let passed = verdicts.iter().filter(|v| v.passed).count();
    println!("{passed}/{} criteria passed", verdicts.len());
    Ok(passed == verdicts.len())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sf(a) => run_mode(Mode::Sf, a),
        Command::Mod2(a) => run_mode(Mode::Mod2, a),
        Command::Eta(a) => run_mode(Mode::Eta, a),
        Command::ScanA(a) => run_mode(Mode::ScanA, a),
        Command::ScanM(a) => run_mode(Mode::ScanM, a),
        Command::Interp(a) => run_mode(Mode::Interp, a),
        Command::Staple(a) => run_mode(Mode::Staple, a),
        Command::GaugeGen(a) => run_mode(Mode::GaugeGen, a),
        Command::Acceptance { suite, out, jobs } => match acceptance(&suite, out.as_deref(), jobs) {
            // a failed criterion is reported like a numerical failure
            Ok(all) => return ExitCode::from(if all { 0 } else { 2 }),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sflab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
