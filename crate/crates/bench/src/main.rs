use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parex::problems::{self, NamedProblem};
use parex::Algorithm;
use parex_bench::config::{resolve_threads, THREADS_ENV};
use parex_bench::convergence::DEFAULT_DTS;
use parex_bench::{
    convergence_study, make_reference, monotonicity_violations, run_sweep, write_csv, write_svg, BenchConfig, BenchError,
    SweepConfig,
};

#[derive(Parser)]
#[command(name = "parex-bench", version, about = "Work-precision benchmarks for the parex extrapolation solvers")]
struct Cli {
    /// TOML file overriding defaults (keys: problem, algs, threads, repeats, warmup, out)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the problem's tolerance grid and write <out>/<problem>.csv and .svg
    Bench {
        #[arg(long)]
        problem: Option<String>,
        /// Comma-separated algorithm ids; defaults to the problem's tuned families
        #[arg(long, value_delimiter = ',')]
        algs: Option<Vec<String>>,
        /// Worker threads for the threaded variant (falls back to PAREX_THREADS)
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only run the serial variant
        #[arg(long)]
        serial_only: bool,
    },
    /// Compute the cross-checked reference solution and write it as JSON
    Reference {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed-step order study on u' = -u
    Convergence {
        /// Comma-separated algorithm ids; defaults to all
        #[arg(long, value_delimiter = ',')]
        algs: Option<Vec<String>>,
        #[arg(long, default_value_t = 4)]
        max_rows: usize,
    },
}

fn problem_named(name: Option<String>) -> Result<NamedProblem, BenchError> {
    let name = name.ok_or_else(|| BenchError::Config("--problem is required".into()))?;
    problems::by_name(&name).ok_or_else(|| {
        BenchError::Config(format!("unknown problem '{name}', expected one of {}", problems::NAMES.join(", ")))
    })
}

fn parse_algs(ids: &[String]) -> Result<Vec<Algorithm>, BenchError> {
    ids.iter().map(|s| s.parse().map_err(BenchError::Config)).collect()
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), BenchError> {
    std::fs::write(path, text).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<ExitCode, BenchError> {
    let config = match &cli.config {
        Some(path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    match cli.command {
        Command::Bench {
            problem,
            algs,
            threads,
            repeats,
            out,
            serial_only,
        } => {
            let named = problem_named(problem.or(config.problem.clone()))?;
            let env = std::env::var(THREADS_ENV).ok();
            let workers = resolve_threads(threads, &config, env.as_deref())?;
            let mut sweep = SweepConfig::for_problem(&named, workers);
            if let Some(ids) = algs.or(config.algs.clone()) {
                sweep.algorithms = parse_algs(&ids)?;
            }
            if sweep.algorithms.is_empty() {
                sweep.algorithms = Algorithm::ALL.to_vec();
            }
            if let Some(r) = repeats.or(config.repeats) {
                sweep.repeats = r;
            }
            if let Some(w) = config.warmup {
                sweep.warmup = w;
            }
            if serial_only {
                sweep.threaded = vec![false];
            }
            let out = out.or(config.out.clone()).unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&out).map_err(|source| BenchError::Io {
                path: out.clone(),
                source,
            })?;
            let reference = make_reference(&named)?;
            let points = run_sweep(&named, &reference, &sweep)?;
            for warning in monotonicity_violations(&points) {
                eprintln!("warning: {warning}");
            }
            let csv_path = out.join(format!("{}.csv", named.name));
            write_csv(&points, &csv_path)?;
            write_svg(&points, &out.join(format!("{}.svg", named.name)))?;
            let failed = points.iter().filter(|p| p.failed()).count();
            println!("{} points written to {}", points.len(), csv_path.display());
            if failed > 0 {
                eprintln!("{failed} point(s) failed");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reference { problem, out } => {
            let named = problem_named(problem.or(config.problem.clone()))?;
            let reference = make_reference(&named)?;
            let json = serde_json::to_string_pretty(&reference).expect("reference serializes");
            match out.or(config.out.clone()) {
                Some(path) => write_file(&path, &json)?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Convergence { algs, max_rows } => {
            let algs = match algs {
                Some(ids) => parse_algs(&ids)?,
                None => Algorithm::ALL.to_vec(),
            };
            let rows: Vec<usize> = (1..=max_rows).collect();
            for alg in algs {
                let table = convergence_study(alg, &rows, &DEFAULT_DTS)?;
                println!("{alg}");
                for (k, (errs, slope)) in table.rows.iter().zip(table.errors.iter().zip(&table.slopes)) {
                    let errs: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
                    println!("  rows {k}: slope {slope:6.3}  errors [{}]", errs.join(", "));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
