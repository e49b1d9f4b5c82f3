use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use taskrisk::pipeline::{run_command, Command, Stage};
use taskrisk::{ErrorKind, PipelineConfig};

/// Detect automation-vulnerable occupations from task-attribute data.
#[derive(Debug, Parser)]
#[command(name = "taskrisk", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Pipeline config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Assemble and standardize the occupation x attribute matrix.
    Ingest(Common),
    /// Bartlett sphericity and KMO sampling adequacy.
    Adequacy(Common),
    /// Parallel analysis, factor extraction, rotation and scores.
    Factors(Common),
    /// PAM clustering of factor scores with a silhouette k-scan.
    Cluster(Common),
    /// Susceptibility flags and vulnerable-cluster labeling.
    Classify(Common),
    /// Employment growth of vulnerable vs non-vulnerable occupations.
    Trends(Common),
    /// The full pipeline.
    Run(Common),
    /// Render scree and k-scan plots from existing tables.
    Plot(Common),
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Ingest(c) => (Command::Stage(Stage::Ingest), c),
            Cmd::Adequacy(c) => (Command::Stage(Stage::Adequacy), c),
            Cmd::Factors(c) => (Command::Stage(Stage::Factors), c),
            Cmd::Cluster(c) => (Command::Stage(Stage::Cluster), c),
            Cmd::Classify(c) => (Command::Stage(Stage::Classify), c),
            Cmd::Trends(c) => (Command::Stage(Stage::Trends), c),
            Cmd::Run(c) => (Command::Run, c),
            Cmd::Plot(c) => (Command::Stage(Stage::Plot), c),
        }
    }
}

fn load(common: &Common) -> taskrisk::Result<PipelineConfig> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| taskrisk::Error::io(&common.config, e))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| taskrisk::Error::Config(e.to_string()))?;
    if let (Some(seed), Some(obj)) = (common.seed, value.as_object_mut()) {
        obj.insert("seed".into(), seed.into());
    }
    let mut config = PipelineConfig::from_json(&value.to_string())?;
    config.base_dir = common.config.parent().map(PathBuf::from).unwrap_or_default();
    Ok(config)
}

fn main() -> ExitCode {
    let (command, common) = Cli::parse().command.split();
    let result = load(&common).and_then(|config| {
        let out = common.out.clone().unwrap_or_else(|| config.output_dir());
        run_command(&config, command, &out).map(|m| (m, out))
    });
    match result {
        Ok((manifest, out)) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} complete: {} file(s) written to {}",
                manifest.command,
                manifest.outputs.len(),
                out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Validation => ExitCode::from(2),
                ErrorKind::Numeric => ExitCode::from(3),
            }
        }
    }
}
