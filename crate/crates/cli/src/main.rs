use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use relrocket::simulation::{Trajectory, TrajectoryFormat};
use relrocket_cli::run::{EXIT_ERROR, EXIT_OK};
use relrocket_cli::{design, execute, parse_scenario, verify, RunReport, Scenario};

/// Closed-loop simulation of a relativistic rocket under feedback-linearizing control.
#[derive(Debug, Parser)]
#[command(name = "relrocket", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the closed loop and write the trajectory.
    Simulate(RunArgs),
    /// Print the designed gains or steering profile as JSON.
    Design(ConfigArgs),
    /// Run the closed loop and the full invariant suite.
    Verify(RunArgs),
    /// Print the JSON schema for scenario files.
    Schema,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Scenario file, or `-` for stdin.
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Trajectory output path; overrides the scenario's `output.path`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Trajectory format; overrides the scenario's `output.format`.
    #[arg(long, value_parser = parse_format)]
    format: Option<TrajectoryFormat>,
    /// Write the run report as JSON to this path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accepted for reproducible invocations; the simulation itself draws no random numbers.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the text report on stderr.
    #[arg(long, short)]
    quiet: bool,
}

fn parse_format(s: &str) -> Result<TrajectoryFormat, String> {
    s.parse()
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .context("reading scenario from stdin")?;
        buf
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    Ok(parse_scenario(&text)?)
}

fn render(trajectory: &Trajectory<f64>, format: TrajectoryFormat) -> anyhow::Result<String> {
    Ok(match format {
        TrajectoryFormat::Csv => trajectory.to_csv_string(),
        TrajectoryFormat::Json => trajectory.to_json_string()?,
    })
}

fn emit(path: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match path {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn finish(report: &RunReport, args: &RunArgs) -> anyhow::Result<i32> {
    if let Some(path) = &args.report {
        emit(Some(path), &serde_json::to_string_pretty(report)?)?;
    }
    if !args.quiet {
        eprint!("{}", report.to_text());
    }
    Ok(report.exit_code)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Schema => {
            emit(
                None,
                &serde_json::to_string_pretty(&relrocket_cli::schema::scenario_schema())?,
            )?;
            Ok(EXIT_OK)
        }
        Command::Design(args) => {
            let scenario = load(&args.config)?;
            let built = design(&scenario)?;
            emit(None, &serde_json::to_string_pretty(&built.design)?)?;
            Ok(EXIT_OK)
        }
        Command::Simulate(args) => {
            let scenario = load(&args.config.config)?;
            let exec = execute(&scenario)?;
            let format = args.format.unwrap_or(scenario.output.format);
            let out = args
                .out
                .clone()
                .or_else(|| scenario.output.path.as_ref().map(PathBuf::from));
            emit(out.as_deref(), &render(&exec.trajectory, format)?)?;
            finish(&exec.report, &args)
        }
        Command::Verify(args) => {
            let scenario = load(&args.config.config)?;
            let exec = verify(&scenario)?;
            if let Some(out) = &args.out {
                let format = args.format.unwrap_or(scenario.output.format);
                emit(Some(out), &render(&exec.trajectory, format)?)?;
            }
            finish(&exec.report, &args)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
