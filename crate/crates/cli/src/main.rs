use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdeaccel_cli::runner::{format_table, run_single, write_run, write_summary};
use pdeaccel_cli::{parse_config, preset, run_experiment, ExperimentConfig, Summary, PRESETS};

#[derive(Parser)]
#[command(name = "pdeaccel", version, about = "Run PDE acceleration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single solve: first mesh, damping and seed of the config.
    Solve(Common),
    /// Every (damping, mesh, seed) combination of the config.
    Bench(Common),
    /// Run a built-in table config (or --config) and print the table.
    Table {
        /// Preset name; see --list.
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Replaces the config's seed list.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn apply(mut cfg: ExperimentConfig, common: &Common) -> ExperimentConfig {
    if let Some(dir) = &common.out {
        cfg.output = Some(dir.clone());
    }
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    cfg
}

fn resolve(common: &Common, name: Option<&str>) -> Result<ExperimentConfig, String> {
    let cfg = match (name, &common.config) {
        (Some(_), Some(_)) => return Err("give either a preset name or --config, not both".into()),
        (Some(n), None) => {
            let text = preset(n)
                .ok_or_else(|| format!("unknown preset `{n}`; known: {}", PRESETS.join(", ")))?;
            parse_config(text).map_err(|e| e.to_string())?
        }
        (None, Some(path)) => load(path)?,
        (None, None) => return Err("a config is required (--config PATH)".into()),
    };
    Ok(apply(cfg, common))
}

fn solve(cfg: &ExperimentConfig) -> Result<bool, String> {
    let mesh = cfg.mesh[0];
    let seed = cfg.seeds[0];
    let out = run_single(cfg, mesh, seed, cfg.damping[0]).map_err(|e| e.to_string())?;
    let summary = Summary {
        rows: vec![out.row.clone()],
        complexity: Vec::new(),
    };
    print!("{}", format_table(&summary));
    if let Some(dir) = &cfg.output {
        write_run(dir, &out)
            .and_then(|_| write_summary(dir, &summary))
            .map_err(|e| e.to_string())?;
    }
    Ok(out.row.converged)
}

fn bench(cfg: &ExperimentConfig) -> Result<bool, String> {
    let summary = run_experiment(cfg).map_err(|e| e.to_string())?;
    print!("{}", format_table(&summary));
    Ok(summary.all_converged())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(common) => resolve(common, None).and_then(|c| solve(&c)),
        Command::Bench(common) => resolve(common, None).and_then(|c| bench(&c)),
        Command::Table { list: true, .. } => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(true)
        }
        Command::Table { name, common, .. } => {
            resolve(common, name.as_deref()).and_then(|c| bench(&c))
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some runs did not converge");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
