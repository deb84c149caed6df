use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use rmtlab::io::{self, Manifest, Table};
use rmtlab::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "rmtlab", version, about = "Random matrix and operator-limit pipelines")]
struct Cli {
    /// 64-bit seed; every random quantity is a function of it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (speed only, results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for data files and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// File stem; defaults to the command name.
    #[arg(long, global = true)]
    name: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw one random matrix.
    Sample(commands::SampleArgs),
    /// Eigenvalues and spectral measure of one draw.
    Spectrum(commands::SampleArgs),
    /// Tracy-Widom CDF table.
    Tw(commands::TwArgs),
    /// Law of the top eigenvalue under a rank-one spike (boundary parameter w).
    SpikedTw(commands::SpikedArgs),
    /// Sine_beta counts from the Brownian carousel.
    Sine(commands::SineArgs),
    /// Sine_beta gap probabilities.
    Gap(commands::GapArgs),
    /// Sine_beta counting CLT statistic.
    Clt(commands::CltArgs),
    /// Sch_tau counts and repulsion, or eigenvector shapes of the finite matrix.
    Schrodinger(commands::SchArgs),
    /// Szego recursion, eigenangles and the finite-n Dirac check.
    SzegoCheck(commands::SzegoArgs),
    /// Run the verification suite.
    Verify(commands::VerifyArgs),
    /// Summarize manifests, one row per run sorted by timestamp.
    Report(commands::ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Spectrum(_) => "spectrum",
            Command::Tw(_) => "tw",
            Command::SpikedTw(_) => "spiked-tw",
            Command::Sine(_) => "sine",
            Command::Gap(_) => "gap",
            Command::Clt(_) => "clt",
            Command::Schrodinger(_) => "schrodinger",
            Command::SzegoCheck(_) => "szego-check",
            Command::Verify(_) => "verify",
            Command::Report(_) => "report",
        }
    }
}

/// What a command produced, before anything is written.
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub parameters: serde_json::Value,
    pub headline: Option<(String, f64)>,
    pub passed: Option<bool>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::OutOfRange(_) | Error::DegenerateInput(_) => 2,
        Error::NumericalFailure(_) | Error::StepSize(_) | Error::DegenerateSpectrum(..) => 3,
        Error::Io(_) => 1,
    }
}

fn write_outputs(cli: &Cli, command: &str, run: &RunOutput) -> rmtlab::Result<Vec<String>> {
    std::fs::create_dir_all(&cli.out)?;
    let stem = cli.name.clone().unwrap_or_else(|| command.to_string());
    let ext = match cli.format {
        Format::Csv => "csv",
        Format::Json => "data.json",
    };
    let mut files = Vec::new();
    for (i, t) in run.tables.iter().enumerate() {
        let file = if i == 0 {
            format!("{stem}.{ext}")
        } else {
            format!("{stem}_{}.{ext}", t.schema)
        };
        let path = cli.out.join(&file);
        match cli.format {
            Format::Csv => t.save_csv(&path)?,
            Format::Json => io::write_json(&path, &t.to_json())?,
        }
        files.push(file);
    }
    Ok(files)
}

fn run(cli: &Cli) -> rmtlab::Result<Option<RunOutput>> {
    match &cli.command {
        Command::Sample(a) => commands::sample(a, cli.seed).map(Some),
        Command::Spectrum(a) => commands::spectrum(a, cli.seed).map(Some),
        Command::Tw(a) => commands::tw(a, cli.seed).map(Some),
        Command::SpikedTw(a) => commands::spiked_tw(a, cli.seed).map(Some),
        Command::Sine(a) => commands::sine(a, cli.seed).map(Some),
        Command::Gap(a) => commands::gap(a, cli.seed).map(Some),
        Command::Clt(a) => commands::clt(a, cli.seed).map(Some),
        Command::Schrodinger(a) => commands::schrodinger(a, cli.seed).map(Some),
        Command::SzegoCheck(a) => commands::szego_check(a, cli.seed).map(Some),
        Command::Verify(a) => commands::verify(a, cli.seed).map(Some),
        Command::Report(a) => {
            commands::report(a)?;
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let command = cli.command.name();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let start = Instant::now();
    let out = match run(&cli) {
        Ok(Some(out)) => out,
        Ok(None) => return ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let written = write_outputs(&cli, command, &out).and_then(|files| {
        let manifest = Manifest {
            command: command.to_string(),
            parameters: out.parameters.clone(),
            seed: cli.seed,
            threads: cli.threads.unwrap_or_else(rayon::current_num_threads),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            schema: out.tables.first().map_or("none", |t| t.schema).to_string(),
            schema_version: io::SCHEMA_VERSION,
            outputs: files,
            timestamp,
            wall_time_s: wall,
            headline: out.headline.clone(),
            passed: out.passed,
        };
        let stem = cli.name.clone().unwrap_or_else(|| command.to_string());
        let path = cli.out.join(format!("{stem}.json"));
        io::write_json(&path, &manifest)?;
        Ok(path)
    });
    match written {
        Ok(path) => {
            if let Some((name, value)) = &out.headline {
                println!("{name} = {value}");
            }
            println!("manifest: {}", display(&path));
            if out.passed == Some(false) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}
