//! `recsim`: simulate, sweep, and audit the latent-type recommendation
//! model, and evaluate its theoretical curves.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use recsim_cli::csvio::{render_curve_csv, render_trace_csv};
use recsim_cli::report;
use recsim_cli::runner::{self, ParamsMode, RunSettings};
use recsim_cli::spec::ExperimentSpec;
use recsim_core::algorithm::run;
use recsim_core::model::ModelConfig;

#[derive(Parser)]
#[command(name = "recsim", version, about = "Latent-type recommendation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Experiment config (flat JSON document).
    #[arg(long)]
    config: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Audit every trace against the counting constraints (on|off).
    #[arg(long, default_value = "on")]
    audit: String,
    /// Curve sampling mode: max-T (one trace, prefix sampling) or per-T
    /// (re-run per checkpoint).
    #[arg(long, default_value = "max-T")]
    params_mode: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run one model configuration and emit its regret curve table.
    Simulate {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Also dump the raw trace of trial 0 of the first strategy.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Run the full Cartesian grid of the config.
    Sweep {
        #[command(flatten)]
        common: CommonRunArgs,
    },
    /// Print the theoretical curves over a T grid.
    Theory {
        #[arg(long)]
        n_users: u64,
        #[arg(long)]
        user_types: u64,
        #[arg(long)]
        item_types: u64,
        #[arg(long)]
        t_max: u64,
        /// Number of grid points (evenly spread over [1, t_max]).
        #[arg(long, default_value_t = 64)]
        t_count: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit traces over a seed range: constraint pass/fail matrix plus
    /// the per-category dislike-rate table.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Item-knowledge threshold override (defaults to the theory value).
        #[arg(long)]
        s_i: Option<u32>,
        /// User-knowledge threshold override (defaults to the theory value).
        #[arg(long)]
        s_u: Option<u32>,
        /// Constraint matrix destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dislike-rate table destination.
        #[arg(long)]
        rates_out: Option<PathBuf>,
    },
    /// Estimate the probability that a random sign matrix is
    /// (s, eta)-column regular and compare with the analytic bound.
    Regularity {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_spec(common: &CommonRunArgs) -> Result<(ExperimentSpec, RunSettings)> {
    let text = fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let mut spec = ExperimentSpec::from_json(&text)?;
    if let Some(seed) = common.seed {
        spec.base_seed = seed;
    }
    if let Some(trials) = common.trials {
        spec.trials = trials;
    }
    let audit = match common.audit.as_str() {
        "on" => true,
        "off" => false,
        other => bail!("--audit must be on or off, got `{other}`"),
    };
    let settings = RunSettings {
        audit,
        params_mode: common.params_mode.parse::<ParamsMode>()?,
        s_i: None,
        s_u: None,
    };
    Ok((spec, settings))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { common, trace_out } => {
            let (spec, settings) = load_spec(&common)?;
            let rows = runner::simulate(&spec, &settings)?;
            emit(common.out.as_ref(), &render_curve_csv(&rows))?;
            if let Some(path) = trace_out {
                let (world_seed, alg_seed) = runner::trial_seeds(spec.base_seed, 0);
                let config = ModelConfig::new(
                    spec.n_users[0],
                    spec.n_user_types[0],
                    spec.n_item_types[0],
                    world_seed,
                );
                let strategy = spec.parsed_strategies()?[0];
                let out = run(config, spec.horizons[0], strategy, alg_seed)?;
                emit(Some(&path), &render_trace_csv(&out.trace))?;
            }
        }
        Command::Sweep { common } => {
            let (spec, settings) = load_spec(&common)?;
            let rows = runner::sweep(&spec, &settings)?;
            emit(common.out.as_ref(), &render_curve_csv(&rows))?;
        }
        Command::Theory {
            n_users,
            user_types,
            item_types,
            t_max,
            t_count,
            out,
        } => {
            let grid = report::t_grid(t_max, t_count);
            emit(
                out.as_ref(),
                &report::theory_table(n_users, user_types, item_types, &grid),
            )?;
        }
        Command::Verify {
            config,
            seed,
            trials,
            s_i,
            s_u,
            out,
            rates_out,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut spec = ExperimentSpec::from_json(&text)?;
            if let Some(seed) = seed {
                spec.base_seed = seed;
            }
            if let Some(trials) = trials {
                spec.trials = trials;
            }
            let n = spec.n_users[0] as u64;
            let s_i =
                s_i.unwrap_or_else(|| recsim_core::theory::s_item(n, spec.n_item_types[0] as u64));
            let s_u = s_u.unwrap_or_else(|| {
                recsim_core::theory::s_user(
                    n,
                    spec.n_user_types[0] as u64,
                    spec.n_item_types[0] as u64,
                )
            });
            let outcome = report::verify(&spec, s_i, s_u)?;
            emit(out.as_ref(), &outcome.matrix_csv)?;
            emit(rates_out.as_ref(), &outcome.rates_csv)?;
            if outcome.failures > 0 {
                bail!("{} constraint violations detected", outcome.failures);
            }
        }
        Command::Regularity {
            rows,
            cols,
            s,
            eta,
            trials,
            seed,
            out,
        } => {
            let table = report::regularity_row(rows, cols, s, eta, trials, seed)?;
            emit(out.as_ref(), &table)?;
        }
    }
    Ok(())
}
