use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shrinkinit_cli::{probe_csv, run, timing_probe, CellStatus, RunError};

#[derive(Parser)]
#[command(name = "shrinkinit", version, about = "Compare network initializers on small MLPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (scheme, seed) cell of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Time shrinkage initialization across layer widths.
    Probe {
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, jobs } => match run(&config, out.as_deref(), jobs) {
            Ok(report) => {
                for cell in report.failures() {
                    if let CellStatus::Failed(msg) = &cell.status {
                        eprintln!("{} seed {}: {msg}", cell.scheme, cell.seed);
                    }
                }
                println!(
                    "{} cells, {} failed, results in {}",
                    report.cells.len(),
                    report.failures().count(),
                    report.output_dir.display()
                );
                exit(report.exit_code())
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit(e.exit_code())
            }
        },
        Command::Probe { widths, out } => {
            let result = timing_probe(&widths).and_then(|rows| {
                std::fs::write(&out, probe_csv(&rows))
                    .map_err(RunError::from)
                    .map(|_| rows)
            });
            match result {
                Ok(rows) => {
                    for (w, s) in rows {
                        println!("{w}\t{s:.6}s");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    // a bad sweep is a usage error
                    exit(if matches!(e, RunError::Core(shrinkinit::Error::Parameter(_))) {
                        2
                    } else {
                        1
                    })
                }
            }
        }
    }
}
