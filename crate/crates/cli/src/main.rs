use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use minlab_cli::{load_config, run_experiment, PROBE_KINDS};

const CONFIG_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "minlab", version, about = "Run probes on minimal dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every probe of a config and write the report bundle.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// List the available probe kinds.
    ListProbes,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    match cli.command {
        Command::ListProbes => {
            for (name, about) in PROBE_KINDS {
                println!("{name:<13} {about}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_config(&config) {
            Ok(exp) => {
                println!("{}: ok ({} probes)", config.display(), exp.config.probes.len());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Command::Run { config, out } => {
            let exp = match load_config(&config) {
                Ok(exp) => exp,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let dir = out.unwrap_or_else(|| exp.config.output.directory.clone());
            match run_experiment(&exp, &dir) {
                Ok(bundle) => {
                    for p in &bundle.probes {
                        println!(
                            "{:>2} {:<13} {:<5} {}",
                            p.index,
                            p.kind,
                            format!("{:?}", p.status).to_lowercase(),
                            p.message
                        );
                    }
                    if !bundle.complete {
                        println!("run stopped early; bundle incomplete");
                    }
                    println!("report: {}", dir.join("summary.json").display());
                    ExitCode::from(bundle.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
