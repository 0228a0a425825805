//! `pbgent`: entanglement series, pole tables and parameter sweeps as CSV.
//!
//! Exit codes: 0 success, 2 usage or validation, 3 I/O, 4 numerical failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pbgent::scenario::{entanglement_csv, pole_csv, pole_report, sweep, sweep_file_name, sweep_summary_csv};
use pbgent::{preset, Engine, PresetKind, RunConfig, RunOptions, SweepParam};

#[derive(Parser)]
#[command(name = "pbgent", version, about = "Two-atom entanglement near a photonic band edge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a key = value config file and write the entanglement CSV.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Run a named figure preset (entanglement CSV, or pole CSV for poles*).
    Preset {
        name: String,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Write the dressed-state pole table for a config file.
    Poles {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a config template once per value and write one CSV each plus summary.csv.
    Sweep {
        config: PathBuf,
        /// gamma, eta (degrees) or omega1c_omega2c_pair (w1c:w2c).
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values; an empty list does nothing.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        opts: Overrides,
    },
}

#[derive(Args, Clone, Copy)]
struct Overrides {
    /// analytic, oracle or both.
    #[arg(long)]
    engine: Option<Engine>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Output time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Oracle bath size.
    #[arg(long)]
    modes: Option<usize>,
}

impl Overrides {
    fn options(self) -> RunOptions {
        RunOptions {
            engine: self.engine,
            t_max: self.tmax,
            dt_out: self.dt,
            modes: self.modes,
        }
    }
}

#[derive(Debug)]
struct Failure {
    operation: String,
    error: pbgent::Error,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self.error {
            pbgent::Error::Io(_) => 3,
            ref e if e.is_usage() => 2,
            _ => 4,
        }
    }
}

trait Context<T> {
    fn during(self, operation: impl Into<String>) -> Result<T, Failure>;
}

impl<T, E: Into<pbgent::Error>> Context<T> for Result<T, E> {
    fn during(self, operation: impl Into<String>) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            operation: operation.into(),
            error: e.into(),
        })
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let op = || format!("writing {}", path.display());
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).during(op())?;
    tmp.write_all(contents.as_bytes()).during(op())?;
    tmp.persist(path).map_err(|e| e.error).during(op())?;
    Ok(())
}

fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).during(format!("reading {}", path.display()))?;
    RunConfig::parse(&text).during(format!("parsing {}", path.display()))
}

fn run_dynamics(run: &RunConfig, label: &str, output: &Path) -> Result<(), Failure> {
    let outcome = pbgent::run_pipeline(run).during(format!("running {label}"))?;
    if let Some(check) = &outcome.oracle {
        eprintln!(
            "{label}: oracle horizon t = {}: max |A_i| deviation {:.3e}, norm drift {:.3e}",
            check.horizon, check.max_deviation, check.max_norm_drift
        );
    }
    write_atomic(output, &entanglement_csv(&outcome))
}

fn run_poles(run: &RunConfig, label: &str, output: &Path) -> Result<(), Failure> {
    let set = pole_report(&run.system, &run.initial).during(format!("finding poles for {label}"))?;
    write_atomic(output, &pole_csv(&set))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, output, opts } => {
            let run = opts.options().apply(&read_config(&config)?).during("applying options")?;
            run_dynamics(&run, &config.display().to_string(), &output)
        }
        Command::Preset { name, output, opts } => {
            let p = preset(&name).during("looking up preset")?;
            match p.kind {
                PresetKind::Poles => run_poles(&p.run_config(), &name, &output),
                PresetKind::Dynamics => {
                    let run = opts.options().apply(&p.run_config()).during("applying options")?;
                    run_dynamics(&run, &name, &output)
                }
            }
        }
        Command::Poles { config, output } => run_poles(&read_config(&config)?, &config.display().to_string(), &output),
        Command::Sweep {
            config,
            param,
            values,
            output,
            opts,
        } => {
            let values: Vec<String> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from)
                .collect();
            if values.is_empty() {
                return Ok(());
            }
            let template = opts.options().apply(&read_config(&config)?).during("applying options")?;
            let points = sweep(&template, param, &values).during(format!("sweeping {}", param.as_str()))?;
            fs::create_dir_all(&output).during(format!("creating {}", output.display()))?;
            for p in &points {
                write_atomic(&output.join(sweep_file_name(param, &p.value)), &entanglement_csv(&p.outcome))?;
            }
            write_atomic(&output.join("summary.csv"), &sweep_summary_csv(&points))
        }
    }
}

/// Caps the rayon pool at `THREADS` workers when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| pbgent::Error::Domain(format!("THREADS must be a positive integer (got `{raw}`)")))
        .during("reading THREADS")?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| pbgent::Error::Domain(e.to_string()))
        .during("configuring worker threads")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pbgent: {}: {}", f.operation, f.error);
            ExitCode::from(f.exit_code())
        }
    }
}
