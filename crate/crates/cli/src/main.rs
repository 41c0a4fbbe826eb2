use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use dgh_lab::scenario::ExperimentKind;

#[derive(Parser)]
#[command(name = "dgh-lab", version, about = "Numerical experiments on the DGH shallow-water equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Output root; overrides DGH_LAB_OUTPUT_ROOT.
        #[arg(long)]
        output_root: Option<PathBuf>,
    },
    /// List the experiment kinds.
    List,
    /// Explain one experiment kind.
    Describe { kind: String },
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, output_root } => {
            let root = output_root.unwrap_or_else(dgh_lab::output_root);
            let summary = dgh_lab::run_file(&config, &root);
            print!("{}", summary.text);
            println!("artifacts: {}", summary.dir.display());
            ExitCode::from(summary.exit_code() as u8)
        }
        Command::List => {
            for k in ExperimentKind::ALL {
                println!("{:<26}{}", k.name(), k.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Describe { kind } => match kind.parse::<ExperimentKind>() {
            Ok(k) => {
                println!("{}: {}\n\n{}", k.name(), k.summary(), k.description());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}; try `dgh-lab list`");
                ExitCode::from(2)
            }
        },
        Command::Version => {
            println!("dgh-lab {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}
