use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use atwist::report::to_json;
use atwist::{parse_manifest, run, Options, Subcommand};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Validate,
    Prequant,
    Polarize,
    Hilbert,
    Report,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Validate => Subcommand::Validate,
            Command::Prequant => Subcommand::Prequant,
            Command::Polarize => Subcommand::Polarize,
            Command::Hilbert => Subcommand::Hilbert,
            Command::Report => Subcommand::Report,
        }
    }
}

/// Check almost twisted Poisson structures, prequantization data and
/// polarizations described by a manifest file.
///
/// Exit status: 0 when every check passes (warnings allowed), 1 when any
/// check fails, 2 on unreadable or incomplete input.
#[derive(Debug, Parser)]
#[command(name = "atwist", version)]
struct Cli {
    command: Command,
    manifest: PathBuf,
    /// Sample points per randomized identity check.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Relative tolerance of identity checks.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature points per axis (overrides the manifest; default 17).
    #[arg(long)]
    grid: Option<usize>,
    /// Write the JSON report here (`-` for standard output).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Report wall_ms = 0 so that reports are byte-for-byte reproducible.
    #[arg(long)]
    no_timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.manifest) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.manifest.display());
            return ExitCode::from(2);
        }
    };
    let manifest = match parse_manifest(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.manifest.display());
            return ExitCode::from(2);
        }
    };
    let opts = Options { samples: cli.samples, tol: cli.tol, seed: cli.seed, grid: cli.grid, timing: !cli.no_timing };
    let out = match run(cli.command.into(), &manifest, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for note in &out.notes {
        eprintln!("note: {note}");
    }
    let json = to_json(&out.reports);
    match cli.json.as_deref() {
        Some(p) if p.as_os_str() == "-" => print!("{json}"),
        Some(p) => {
            if let Err(e) = std::fs::write(p, &json) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
            out.reports.iter().for_each(|r| println!("{r}"));
        }
        None => out.reports.iter().for_each(|r| println!("{r}")),
    }
    ExitCode::from(out.exit_code())
}
