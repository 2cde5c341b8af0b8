use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use photonwf::core::transforms::{TransformKind, TransformSpec};
use photonwf::run::{run, EXIT_INVALID_SCENARIO, EXIT_IO};
use photonwf::scenario::{parse_scenario, Scenario, UnitSystem};

#[derive(Parser)]
#[command(name = "photonwf", version, about = "Electromagnetic wavefunction scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV outputs plus summary.txt.
    Run {
        scenario: PathBuf,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for random states (overrides random.seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        units: Option<UnitsArg>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
    /// List the transform kinds and their kernels.
    ListTransforms,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Natural,
    Si,
}

fn load(path: &PathBuf) -> Result<Scenario, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_IO as u8)
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_INVALID_SCENARIO as u8)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListTransforms => {
            for k in TransformKind::ALL {
                let spec = TransformSpec::new(k);
                println!("{:<6} {:?}  {}", k.name(), spec.direction(), spec.kernel_description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { scenario } => match load(&scenario) {
            Ok(s) => {
                println!("ok: {s}");
                for (k, v) in s.echoed_defaults() {
                    println!("default {k} = {v}");
                }
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run {
            scenario,
            out,
            seed,
            units,
        } => {
            let mut s = match load(&scenario) {
                Ok(s) => s,
                Err(code) => return code,
            };
            if let Some(seed) = seed {
                s.override_seed(seed);
            }
            if let Some(u) = units {
                let sys = match u {
                    UnitsArg::Natural => UnitSystem::Natural,
                    UnitsArg::Si => UnitSystem::Si,
                };
                if let Err(e) = s.override_units(sys) {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_INVALID_SCENARIO as u8);
                }
            }
            let dir = out.unwrap_or_else(|| s.output_dir.clone());
            match run(&s, &dir) {
                Ok(summary) => {
                    for st in &summary.stages {
                        println!("stage {} {}: {:?}", st.index, st.name, st.status);
                    }
                    println!("summary: {}", dir.join(photonwf::run::SUMMARY_FILE).display());
                    ExitCode::from(summary.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_IO as u8)
                }
            }
        }
    }
}
