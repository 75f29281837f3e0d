use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use srcimage::harness::selftest::run_selftest;
use srcimage::harness::{
    emit_results, format_results, run_scenario, run_scenario_with_threads, ResultRow,
    ScenarioConfig, ScenarioKind,
};
use srcimage::model::{sample_covariance, SignalBatch};
use srcimage::separators::signal_file::{read_signal_csv, write_signal_csv, SignalFile};
use srcimage::separators::surrogate::{generate, SurrogateConfig};
use srcimage::separators::{
    denoise_by_image_subtraction, fastica_one_unit, principal_vector, DEFAULT_FASTICA_MAX_ITER,
    DEFAULT_FASTICA_TOL,
};
use srcimage::Error;

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

/// Monte Carlo experiments on source image estimation.
#[derive(Parser)]
#[command(name = "simlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output`; without either, rows go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run one of the preset experiments.
    Figure {
        /// fig1 .. fig6 or denoise-demo
        name: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Remove the dominant component of a multichannel recording.
    Denoise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: SeparatorKind,
        #[arg(long)]
        out: PathBuf,
        /// FastICA iteration cap.
        #[arg(long, default_value_t = DEFAULT_FASTICA_MAX_ITER)]
        max_iter: usize,
        /// FastICA convergence tolerance on `1 − |⟨w, w′⟩|`.
        #[arg(long, default_value_t = DEFAULT_FASTICA_TOL)]
        tol: f64,
    },
    /// Run the structural self-checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write the synthetic ECG-plus-interferer recording.
    Surrogate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Interferer-to-ECG power ratio in dB.
        #[arg(long)]
        interferer_db: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SeparatorKind {
    Pca,
    Fastica,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidScenario(_) => EXIT_CONFIG,
        Error::Io { .. } | Error::Parse { .. } => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

fn run(cfg: &ScenarioConfig, threads: Option<usize>) -> srcimage::Result<Vec<ResultRow>> {
    match threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => run_scenario_with_threads(cfg, n),
        None => run_scenario(cfg),
    }
}

fn deliver(rows: &[ResultRow], out: Option<&Path>) -> srcimage::Result<()> {
    match out {
        Some(path) => {
            emit_results(rows, path)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
            Ok(())
        }
        None => std::io::stdout()
            .write_all(format_results(rows).as_bytes())
            .map_err(|e| Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
    }
}

fn denoise(
    input: &Path,
    method: SeparatorKind,
    out: &Path,
    max_iter: usize,
    tol: f64,
) -> srcimage::Result<()> {
    let signal = read_signal_csv(input)?;
    let x = &signal.data;
    let w = match method {
        SeparatorKind::Pca => principal_vector(&sample_covariance(x))?,
        SeparatorKind::Fastica => {
            fastica_one_unit(x, &vec![1.0; x.channels()], max_iter, tol)?.require_converged()?
        }
    };
    let cleaned = denoise_by_image_subtraction(x, &w)?;
    let removed = 1.0 - cleaned.data().frobenius_norm_sq() / x.data().frobenius_norm_sq();
    write_signal_csv(
        out,
        &SignalFile {
            rate_hz: signal.rate_hz,
            names: signal.names.clone(),
            data: SignalBatch::new(cleaned.into_data())?,
        },
    )?;
    eprintln!(
        "removed {:.1}% of the signal energy after {} iterations; wrote {}",
        100.0 * removed,
        w.iterations,
        out.display()
    );
    Ok(())
}

fn surrogate(
    out: &Path,
    seed: Option<u64>,
    interferer_db: Option<f64>,
    duration: Option<f64>,
) -> srcimage::Result<()> {
    let defaults = SurrogateConfig::default();
    let cfg = SurrogateConfig {
        seed: seed.unwrap_or(defaults.seed),
        interferer_db: interferer_db.unwrap_or(defaults.interferer_db),
        duration_s: duration.unwrap_or(defaults.duration_s),
        ..defaults
    };
    let s = generate(&cfg)?;
    let names = (1..=cfg.channels).map(|i| format!("lead{i}")).collect();
    write_signal_csv(
        out,
        &SignalFile {
            rate_hz: s.rate_hz,
            names,
            data: s.observed,
        },
    )?;
    eprintln!(
        "wrote {} channels x {} samples to {}",
        cfg.channels,
        s.interferer.len(),
        out.display()
    );
    Ok(())
}

fn dispatch(command: Command) -> srcimage::Result<bool> {
    match command {
        Command::Run {
            config,
            out,
            threads,
        } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let rows = run(&cfg, threads)?;
            deliver(&rows, out.as_deref().or(cfg.output.as_deref()))?;
        }
        Command::Figure {
            name,
            trials,
            seed,
            out,
            threads,
        } => {
            let kind = ScenarioKind::parse(&name)?;
            let mut cfg = ScenarioConfig::preset(kind)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let rows = run(&cfg, threads)?;
            deliver(&rows, out.as_deref())?;
        }
        Command::Denoise {
            input,
            method,
            out,
            max_iter,
            tol,
        } => denoise(&input, method, &out, max_iter, tol)?,
        Command::Selftest { seed } => {
            let outcomes = run_selftest(seed);
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!(
                "selftest: {} of {} checks passed",
                outcomes.len() - failed,
                outcomes.len()
            );
            return Ok(failed == 0);
        }
        Command::Surrogate {
            out,
            seed,
            interferer_db,
            duration,
        } => surrogate(&out, seed, interferer_db, duration)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECKS_FAILED),
        Err(e) => {
            eprintln!("simlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
