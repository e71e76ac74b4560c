use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use lbsolid::acceptance;
use lbsolid::cli::{parse_config, preset, print_config, Overrides, Preset, SnapshotWriter};
use lbsolid::constitutive::Model;
use lbsolid::solver::{run, Observer, RunConfig};
use lbsolid::validation::{convergence_study, write_error_csv, write_error_csv_file, ErrorRow};
use lbsolid::{Error, Result};

#[derive(Parser)]
#[command(
    version,
    about = "Lattice Boltzmann solver for hyperelastic solids in 2D"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a configuration file.
    Run(RunArgs),
    /// Grid convergence study against the finest spacing.
    Converge(ConvergeArgs),
    /// Run the acceptance criteria.
    Validate,
    /// Print a preset as a configuration file.
    Show(ShowArgs),
}

#[derive(Args)]
struct Setup {
    /// tension, shear, wave or patch.
    #[arg(long, required_unless_present = "config")]
    preset: Option<Preset>,
    /// Configuration file; replaces the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// svk, nh or le.
    #[arg(long)]
    model: Option<Model>,
    #[arg(long)]
    t_max: Option<f64>,
}

impl Setup {
    fn overrides(&self) -> Overrides {
        Overrides {
            nu: self.nu,
            dx: self.dx,
            tau: self.tau,
            model: self.model,
            t_max: self.t_max,
            alpha: None,
        }
    }

    fn resolve(&self) -> Result<RunConfig> {
        match (&self.config, self.preset) {
            (Some(path), _) => {
                let mut config = parse_config(path)?;
                self.overrides().apply(&mut config)?;
                Ok(config)
            }
            (None, Some(p)) => preset(p, &self.overrides()),
            (None, None) => unreachable!("clap requires --preset or --config"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    setup: Setup,
    /// Directory for CSV snapshots and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    setup: Setup,
    /// Comma-separated lattice spacings, each half the previous one.
    #[arg(long, value_delimiter = ',', required = true)]
    spacings: Vec<f64>,
    /// Evaluation time.
    #[arg(long, default_value_t = 2.2)]
    t: f64,
    /// Write the error table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShowArgs {
    #[command(flatten)]
    setup: Setup,
}

fn run_command(args: RunArgs) -> Result<()> {
    let config = args.setup.resolve()?;
    info!(
        "running {} steps of dt = {:e}",
        config.step_count(),
        config.dt()
    );
    let mut writer = args
        .out
        .as_ref()
        .map(|dir| SnapshotWriter::new(dir, &config))
        .transpose()?;
    let mut observers: Vec<&mut dyn Observer> = Vec::new();
    if let Some(w) = writer.as_mut() {
        observers.push(w);
    }
    let summary = run(config, &mut observers)?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    emit(&format!("{json}\n"))
}

fn converge_command(args: ConvergeArgs) -> Result<()> {
    let config = args.setup.resolve()?;
    let study = convergence_study(&config, &args.spacings, args.t)?;
    let name = match (&args.setup.config, args.setup.preset) {
        (Some(path), _) => path.display().to_string(),
        (None, Some(p)) => p.to_string(),
        (None, None) => String::new(),
    };
    let rows: Vec<ErrorRow> = study
        .rows
        .iter()
        .map(|row| ErrorRow {
            preset: name.clone(),
            dx: row.dx,
            nu: config.material.nu(),
            tau: config.tau,
            t: args.t,
            e2: row.report.e2,
            einf: row.report.einf,
        })
        .collect();
    match &args.out {
        Some(path) => write_error_csv_file(path, &rows)?,
        None => {
            let mut buf = Vec::new();
            write_error_csv(&mut buf, &rows).map_err(|e| Error::io("<stdout>", e))?;
            emit(&String::from_utf8_lossy(&buf))?;
        }
    }
    eprintln!(
        "fitted order: E2 {:.3}, Einf {:.3} (reference dx = {})",
        study.order_e2, study.order_einf, study.reference_dx
    );
    Ok(())
}

/// Exits with status 1 when any criterion fails.
fn validate_command() -> Result<bool> {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        emit(&format!("{o}\n"))?;
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

/// Writes to standard output; a reader closing the pipe early is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors count as configuration errors.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run_command(args).map(|_| true),
        Command::Converge(args) => converge_command(args).map(|_| true),
        Command::Validate => validate_command(),
        Command::Show(args) => args
            .setup
            .resolve()
            .and_then(|c| emit(&print_config(&c)))
            .map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
