use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oofsk_cli::{evaluate, report_path, write_csv, CliError, Manifest, McSettings, Mode, Report};

/// OOFSK error-rate sweeps: closed-form, Monte Carlo, or both side by side.
#[derive(Debug, Parser)]
#[command(name = "oofsk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form error probabilities only.
    Analytic(RunArgs),
    /// Monte Carlo estimates only.
    Simulate(RunArgs),
    /// Both, plus a report flagging points that disagree by more than 3 sigma.
    Compare(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Output CSV; overrides `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid point; overrides `mc.trials`.
    #[arg(long)]
    trials: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (mode, args) = match cli.command {
        Command::Analytic(a) => (Mode::Analytic, a),
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    let mut manifest = Manifest::load(&args.manifest)?;
    manifest.mode = Some(mode);
    if args.seed.is_some() || args.trials.is_some() {
        let mc = manifest.mc.get_or_insert(McSettings { trials: 0, seed: 0 });
        if let Some(seed) = args.seed {
            mc.seed = seed;
        }
        if let Some(trials) = args.trials {
            mc.trials = trials;
        }
    }
    let out = args
        .out
        .or_else(|| manifest.output.clone())
        .ok_or_else(|| CliError::Usage("no output path: pass --out or set output.path".into()))?;
    let rows = evaluate(&manifest)?;

    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).expect("writing to memory");
    write_file(&out, &csv)?;
    if mode == Mode::Compare {
        let report = Report::new(&rows);
        write_file(&report_path(&out), report.render().as_bytes())?;
        eprintln!("{} of {} points flagged", report.flagged().count(), report.checks.len());
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}
