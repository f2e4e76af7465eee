use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

use vlc_secrecy::experiment::{run_experiment, write_results, ExperimentId, ExperimentSpec};
use vlc_secrecy::prelude::StrategyKind;

/// Seeded Monte-Carlo experiments for LED selection in secure VLC rooms.
///
/// Flags override the config file; the config file overrides built-in
/// defaults.
#[derive(Debug, Parser)]
#[command(name = "vlc-secrecy", version)]
struct Cli {
    /// convergence | power_sweep | ue_count_sweep | eve_fov_sweep |
    /// ue_fov_sweep | localization_error_sweep | layout_dump
    #[arg(long)]
    experiment: Option<ExperimentId>,

    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Instances per sweep value.
    #[arg(long)]
    instances: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Comma-separated solvers: random, channel_gain, eve_aware_channel_gain,
    /// global_search, tabu_search.
    #[arg(long, value_delimiter = ',')]
    solvers: Option<Vec<StrategyKind>>,

    /// Comma-separated sweep values, replacing the default grid.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,

    /// Run exhaustive search even where it is disabled by default.
    #[arg(long)]
    force_oracle: bool,

    /// Process instances on one thread.
    #[arg(long)]
    sequential: bool,

    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

fn resolve(cli: &Cli) -> Result<ExperimentSpec> {
    let mut spec = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentSpec::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentSpec::default(),
    };
    if let Some(id) = cli.experiment {
        spec.experiment = id;
    }
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(n) = cli.instances {
        spec.num_instances = n;
    }
    if let Some(solvers) = &cli.solvers {
        spec.solvers = Some(solvers.clone());
    }
    if let Some(sweep) = &cli.sweep {
        spec.sweep = Some(sweep.clone());
    }
    spec.force_oracle |= cli.force_oracle;
    if cli.sequential {
        spec.parallel = false;
    }
    Ok(spec)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let spec = resolve(&cli)?;
    if cli.print_config {
        print!("{}", spec.to_toml()?);
        return Ok(());
    }
    spec.validate()?;

    let result = run_experiment(&spec)?;
    let files = write_results(&result, &cli.out)?;

    if result.resampled > 0 {
        eprintln!("resampled {} infeasible draws", result.resampled);
    }
    for row in &result.rows {
        println!(
            "{:<26} {:>10.3} {:<24} mean {:>8.4} ± {:.4} (n={})",
            row.experiment_id.name(),
            row.sweep_value,
            row.solver.name(),
            row.mean,
            row.stderr,
            row.n
        );
    }
    let written = [
        &files.results_csv,
        &files.trace_csv,
        &files.convergence_csv,
        &files.layout_csv,
        &files.scenario_toml,
    ];
    for path in written.into_iter().flatten().chain([&files.manifest_json]) {
        println!("wrote {}", path.display());
    }
    Ok(())
}
