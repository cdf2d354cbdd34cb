use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use warpband_cli::{exit_code, run_config, ConfigError, RunConfig, Tolerances, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "warpband",
    version,
    about = "Checks warped-band rigidity data from a JSON config"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tabulate a model profile and its residuals.
    Model(Common),
    /// Spectrum of the stability operator on a round cross-section.
    Spectrum(Common),
    /// Convergence checks of the variation formulas on a band.
    Verify(Common),
    /// Cone tensors, leaf solve and sign estimate.
    Cone(Common),
    /// Hypothesis report, foliation sweep and rigidity flags.
    CheckBand(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides every tolerance in the config.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory; beats WARPBAND_OUTPUT_DIR and the config.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load(name: &str, args: &Common) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| ConfigError::Read {
        path: args.config.display().to_string(),
        source,
    })?;
    let mut cfg = RunConfig::from_json(&text)?;
    if cfg.command.name() != name {
        return Err(ConfigError::Invalid(format!(
            "config is for `{}`, not `{name}`",
            cfg.command.name()
        )));
    }
    if let Some(t) = args.tolerance {
        cfg.tolerances = Tolerances::uniform(t);
        cfg.tolerances.validate()?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Sub::Model(a) => ("model", a),
        Sub::Spectrum(a) => ("spectrum", a),
        Sub::Verify(a) => ("verify", a),
        Sub::Cone(a) => ("cone", a),
        Sub::CheckBand(a) => ("check-band", a),
    };
    let cfg = match load(name, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let dir = cfg.output_dir(args.output.clone());
    let result = run_config(&cfg, &dir);
    match &result {
        Ok(o) => {
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            println!("{name}: {}", if o.passed { "pass" } else { "violated" });
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
