use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use defect_spectra::analysis::{
    compare_spec, oracle_report, periodicity_check, sample_wavefunction, series_state, sweep, sweep_with_threads,
    SolveReport, WavefunctionSample,
};
use defect_spectra::config::{JobConfig, OutputFormat, SolverChoice};
use defect_spectra::report::{json_document, periodicity_table, summary, sweep_csv, wavefunction_csv};
use defect_spectra::series::SeriesRoot;
use defect_spectra::Error;
use serde::Serialize;

const THREADS_VAR: &str = "DEFECT_SPECTRA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "defect-spectra", version, about = "Bound states of a charged particle near a topological defect")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job file (TOML, or JSON by extension or content).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    solver: Option<Solver>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Write the document here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    nu_max: Option<u32>,
    /// Coarsest oracle grid (the oracle also solves on 2N and 4N).
    #[arg(long, global = true, value_name = "N")]
    grid_n: Option<usize>,
    /// Accept beta >= 1.
    #[arg(long, global = true)]
    unsafe_beta: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Run the requested solvers on one configuration.
    Solve,
    /// One comparison row per point of the `[sweep]` grid.
    Sweep,
    /// Closed form vs series vs oracle, with a verdict.
    Compare,
    /// Sample the series wavefunction on both sides of the defect.
    Wavefunction,
    /// Numerical spectrum with convergence estimates and a shooting cross-check.
    Oracle,
    /// Flux-periodicity table.
    Periodicity,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Solver {
    Closed,
    Series,
    Oracle,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Input(String),
    Property(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Property(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    fn report(&self) {
        let (kind, msg) = match self {
            Failure::Input(m) => ("input", m),
            Failure::Property(m) => ("property", m),
            Failure::Solver(m) => ("solver", m),
        };
        eprintln!("defect-spectra: error[{kind}]: {}", msg.replace('\n', " "));
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let msg = format!("{e:#}");
        match e.downcast_ref::<Error>() {
            Some(Error::SingularRecurrence { .. } | Error::SolverFailure { .. } | Error::NotFound(_)) => {
                Failure::Solver(msg)
            }
            _ => Failure::Input(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid command line");
            Failure::Input(first.trim_start_matches("error: ").to_string()).report();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code())
        }
    }
}

fn load(cli: &Cli) -> Result<JobConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Input("--config PATH is required".into()))?;
    let mut job = JobConfig::load(path).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(s) = cli.solver {
        job.solver.solver = match s {
            Solver::Closed => SolverChoice::Closed,
            Solver::Series => SolverChoice::Series,
            Solver::Oracle => SolverChoice::Oracle,
            Solver::All => SolverChoice::All,
        };
    }
    if let Some(n) = cli.nu_max {
        job.solver.nu_max = n;
    }
    if let Some(n) = cli.grid_n {
        job.solver.grid_n = n;
    }
    if cli.unsafe_beta {
        job.solver.unsafe_beta = true;
    }
    if let Some(f) = cli.format {
        job.output.format = Some(match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        });
    }
    if let Some(p) = &cli.out {
        job.output.path = Some(p.display().to_string());
    }
    // A sweep point may be invalid on its own; that is recorded in its row.
    let checked = if cli.command == Command::Sweep {
        job.validate_solver()
    } else {
        job.validate()
    };
    checked.map_err(|e| Failure::Input(e.to_string()))?;
    Ok(job)
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Input(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

fn emit(job: &JobConfig, text: &str) -> Result<(), Failure> {
    match &job.output.path {
        Some(p) => std::fs::write(p, text)
            .with_context(|| format!("cannot write {p}"))
            .map_err(|e| Failure::Input(format!("{e:#}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let job = load(cli)?;
    let format = job.output.format;
    let options = job.solve_options();
    let spec = job.system_spec();
    let lib = |e: Error| Failure::from(anyhow::Error::new(e));
    match cli.command {
        Command::Solve | Command::Compare => {
            let row = compare_spec(&spec, &options);
            if format == Some(OutputFormat::Csv) {
                emit(&job, &sweep_csv(std::slice::from_ref(&row)).map_err(lib)?)?;
            } else if cli.command == Command::Compare {
                emit(&job, &json_document("compare", &job, &row).map_err(lib)?)?;
            } else {
                let report = SolveReport::from(row.clone());
                emit(&job, &json_document("solve", &job, &report).map_err(lib)?)?;
            }
            if cli.command == Command::Compare {
                let text = summary(&row);
                if job.output.path.is_some() {
                    print!("{text}");
                } else {
                    eprint!("{text}");
                }
            }
            if SolveReport::from(row).any_failed() {
                return Err(Failure::Solver("a requested solver failed; see the report".into()));
            }
            Ok(())
        }
        Command::Sweep => {
            let grid = job.sweep.clone().unwrap_or_default();
            let rows = match threads()? {
                Some(n) => sweep_with_threads(&grid, &spec, &options, n),
                None => sweep(&grid, &spec, &options),
            }
            .map_err(lib)?;
            let text = match format {
                Some(OutputFormat::Json) => json_document("sweep", &job, &rows),
                _ => sweep_csv(&rows),
            }
            .map_err(lib)?;
            emit(&job, &text)
        }
        Command::Wavefunction => {
            let system = job.system().map_err(lib)?;
            let (root, coeffs) = series_state(&system, &job.solver.window).map_err(lib)?;
            let samples = sample_wavefunction(&coeffs, job.solver.r_max, job.solver.samples).map_err(lib)?;
            let text = match format {
                Some(OutputFormat::Json) => json_document(
                    "wavefunction",
                    &job,
                    &WavefunctionDocument {
                        root: &root,
                        coefficients: &coeffs.c,
                        samples: &samples,
                    },
                ),
                _ => wavefunction_csv(&samples),
            }
            .map_err(lib)?;
            emit(&job, &text)
        }
        Command::Oracle => {
            if format == Some(OutputFormat::Csv) {
                return Err(Failure::Input("`oracle` writes JSON only".into()));
            }
            let system = job.system().map_err(lib)?;
            let report = oracle_report(&system, &options).map_err(lib)?;
            emit(&job, &json_document("oracle", &job, &report).map_err(lib)?)?;
            if report.any_failed() {
                return Err(Failure::Solver("an oracle solve failed; see the report".into()));
            }
            Ok(())
        }
        Command::Periodicity => {
            let system = job.system().map_err(lib)?;
            let reports = options
                .solvers
                .kinds()
                .into_iter()
                .map(|k| periodicity_check(k, &system, job.solver.nu_max, &options))
                .collect::<Result<Vec<_>, _>>()
                .map_err(lib)?;
            let text = match format {
                Some(OutputFormat::Json) => json_document("periodicity", &job, &reports).map_err(lib)?,
                Some(OutputFormat::Csv) => return Err(Failure::Input("`periodicity` writes a table or JSON".into())),
                None => periodicity_table(&reports),
            };
            emit(&job, &text)?;
            if reports.iter().any(|r| !r.passed) {
                return Err(Failure::Property("flux periodicity violated; see the table".into()));
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct WavefunctionDocument<'a> {
    root: &'a SeriesRoot,
    coefficients: &'a [f64],
    samples: &'a [WavefunctionSample],
}
