use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use eitfwm::config::ExperimentSpec;
use eitfwm::{experiment, presets};

/// Pulse propagation and storage in a double-lambda atomic medium under
/// combined EIT and four-wave mixing.
#[derive(Parser)]
#[command(name = "eitfwm")]
struct Cli {
    /// TOML experiment spec to run.
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,

    /// Named preset to run (see --list-presets).
    #[arg(long)]
    preset: Option<String>,

    /// List available presets and exit.
    #[arg(long)]
    list_presets: bool,

    /// Output directory for the artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Also record full space-time field profiles.
    #[arg(long)]
    dump: bool,

    /// Suppress per-file progress lines.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.list_presets {
        for (name, description) in presets::list() {
            println!("{name}: {description}");
        }
        return ExitCode::SUCCESS;
    }

    let spec = match (&cli.spec, &cli.preset) {
        (Some(path), None) => ExperimentSpec::from_path(path),
        (None, Some(name)) => presets::preset(name),
        _ => Err(eitfwm::Error::Validation(
            "pass exactly one of --spec or --preset (or --list-presets)".into(),
        )),
    };

    let result = spec.and_then(|spec| experiment::run(&spec, &cli.out, cli.dump, cli.quiet));
    match result {
        Ok(dir) => {
            if !cli.quiet {
                println!("done: {}", dir.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{payload}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
