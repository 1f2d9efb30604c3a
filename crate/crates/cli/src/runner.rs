//! Monte Carlo experiment orchestration: parallel seeded trials, regret
//! aggregation at checkpoints, optional per-trace auditing, and theory
//! columns.

use anyhow::{bail, Result};
use rayon::prelude::*;

use recsim_core::algorithm::{regret_of, run, StrategyTag};
use recsim_core::instrument::{audit, verify_constraints};
use recsim_core::math::log2;
use recsim_core::model::ModelConfig;
use recsim_core::rng::Stream;
use recsim_core::theory;

use crate::spec::ExperimentSpec;

/// How a curve is sampled across checkpoints.
///
/// `MaxT` runs one trace per trial at the largest horizon and reads the
/// regret prefix at each checkpoint (regret is a prefix sum, so this is
/// exact for the max-T parameterization). `PerT` re-runs each checkpoint
/// with parameters selected for that horizon, matching the fixed-horizon
/// guarantee at every point at N-fold cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamsMode {
    MaxT,
    PerT,
}

impl core::str::FromStr for ParamsMode {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-T" | "max-t" => Ok(ParamsMode::MaxT),
            "per-T" | "per-t" => Ok(ParamsMode::PerT),
            other => bail!("unknown params mode `{other}` (use max-T or per-T)"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub audit: bool,
    pub params_mode: ParamsMode,
    /// Audit threshold overrides; defaults to the theory values (which
    /// clamp to zero at desk scale).
    pub s_i: Option<u32>,
    pub s_u: Option<u32>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            audit: true,
            params_mode: ParamsMode::MaxT,
            s_i: None,
            s_u: None,
        }
    }
}

/// One CSV row: empirical regret at a checkpoint plus the theory columns.
#[derive(Debug, Clone)]
pub struct CurveRow {
    pub n_users: usize,
    pub n_user_types: usize,
    pub n_item_types: usize,
    pub strategy: StrategyTag,
    pub t: u64,
    pub regret_mean: f64,
    pub regret_stderr: f64,
    pub r_theory: Option<f64>,
    pub regime: Option<&'static str>,
    pub r_u_curve: f64,
    pub r_i_curve: f64,
    pub lower: f64,
    pub violations: String,
    pub n_trials: u64,
}

/// Deterministic per-trial seeds derived from the base seed.
pub fn trial_seeds(base_seed: u64, trial: u64) -> (u64, u64) {
    let s = Stream::new(base_seed).substream(trial);
    (s.substream_key(1), s.substream_key(2))
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Regret at each checkpoint for one trial.
fn one_trial(
    config: ModelConfig,
    alg_seed: u64,
    strategy: StrategyTag,
    horizon: u64,
    checkpoints: &[u64],
    settings: &RunSettings,
) -> Result<Vec<f64>> {
    let audit_trace = |out: &recsim_core::algorithm::RunOutput, t: u64| -> Result<()> {
        if !settings.audit {
            return Ok(());
        }
        let n = config.n_users as u64;
        let s_i = settings
            .s_i
            .unwrap_or_else(|| theory::s_item(n, config.n_item_types as u64));
        let s_u = settings.s_u.unwrap_or_else(|| {
            theory::s_user(n, config.n_user_types as u64, config.n_item_types as u64)
        });
        let stats = audit(&out.trace, &out.world, s_i, s_u)?;
        let report = verify_constraints(&stats, t, config.n_users, s_i, s_u);
        if let Some(err) = report.first_violation() {
            bail!("trace audit failed: {err}");
        }
        Ok(())
    };

    match settings.params_mode {
        ParamsMode::MaxT => {
            let out = run(config, horizon, strategy, alg_seed)?;
            audit_trace(&out, horizon)?;
            let curve = regret_of(&out.trace);
            Ok(checkpoints
                .iter()
                .map(|&c| curve[(c - 1) as usize])
                .collect())
        }
        ParamsMode::PerT => checkpoints
            .iter()
            .map(|&c| {
                let out = run(config, c, strategy, alg_seed)?;
                audit_trace(&out, c)?;
                let curve = regret_of(&out.trace);
                Ok(curve[(c - 1) as usize])
            })
            .collect(),
    }
}

fn theory_cols(row: &mut CurveRow) {
    let (n, q_u, q_i, t) = (
        row.n_users as u64,
        row.n_user_types as u64,
        row.n_item_types as u64,
        row.t,
    );
    match theory::regret_curve_r(n, q_u, q_i, t) {
        Ok((r, regime)) => {
            row.r_theory = Some(r);
            row.regime = Some(regime.name());
        }
        Err(_) => {
            row.r_theory = None;
            row.regime = None;
        }
    }
    let (r_u_curve, r_i_curve) = theory::upper_curves(n, q_u, q_i, t);
    row.r_u_curve = r_u_curve;
    row.r_i_curve = r_i_curve;
    row.lower = theory::lower_bound(n, q_u, q_i, t);
    row.violations = theory::check_assumptions(n, q_u, q_i)
        .iter()
        .map(|a| a.name())
        .collect::<Vec<_>>()
        .join(";");
}

/// Run one (config, strategy, horizon) cell: `trials` seeded runs in
/// parallel, reduced in trial order.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_cell(
    n_users: usize,
    n_user_types: usize,
    n_item_types: usize,
    strategy: StrategyTag,
    horizon: u64,
    checkpoints: &[u64],
    trials: u64,
    base_seed: u64,
    settings: &RunSettings,
) -> Result<Vec<CurveRow>> {
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (world_seed, alg_seed) = trial_seeds(base_seed, trial);
            let config = ModelConfig::new(n_users, n_user_types, n_item_types, world_seed);
            one_trial(config, alg_seed, strategy, horizon, checkpoints, settings)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(checkpoints.len());
    for (k, &t) in checkpoints.iter().enumerate() {
        let samples: Vec<f64> = per_trial.iter().map(|c| c[k]).collect();
        let (regret_mean, regret_stderr) = mean_stderr(&samples);
        let mut row = CurveRow {
            n_users,
            n_user_types,
            n_item_types,
            strategy,
            t,
            regret_mean,
            regret_stderr,
            r_theory: None,
            regime: None,
            r_u_curve: 0.0,
            r_i_curve: 0.0,
            lower: 0.0,
            violations: String::new(),
            n_trials: trials,
        };
        theory_cols(&mut row);
        rows.push(row);
    }
    Ok(rows)
}

/// Cartesian product of the spec's parameter lists, strategies, and
/// horizons; rows in deterministic grid order.
pub fn sweep(spec: &ExperimentSpec, settings: &RunSettings) -> Result<Vec<CurveRow>> {
    let strategies = spec.parsed_strategies()?;
    let mut rows = Vec::new();
    for &n in &spec.n_users {
        for &q_u in &spec.n_user_types {
            for &q_i in &spec.n_item_types {
                for &strategy in &strategies {
                    for &horizon in &spec.horizons {
                        let cps = spec.checkpoints_for(horizon);
                        rows.extend(monte_carlo_cell(
                            n,
                            q_u,
                            q_i,
                            strategy,
                            horizon,
                            &cps,
                            spec.trials,
                            spec.base_seed,
                            settings,
                        )?);
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// `simulate` is a sweep restricted to a single model configuration.
pub fn simulate(spec: &ExperimentSpec, settings: &RunSettings) -> Result<Vec<CurveRow>> {
    for (name, len) in [
        ("n_users", spec.n_users.len()),
        ("n_user_types", spec.n_user_types.len()),
        ("n_item_types", spec.n_item_types.len()),
        ("horizons", spec.horizons.len()),
    ] {
        if len != 1 {
            bail!("simulate needs exactly one value for {name}; use sweep for grids");
        }
    }
    sweep(spec, settings)
}

/// First horizon at which the regret slope drops below
/// `gamma / log2(N*T)`. The curve must be a contiguous integer prefix
/// `T = 1, 2, ...`.
pub fn estimate_coldstart(curve: &[f64], gamma: f64, n_users: usize) -> Option<u64> {
    for (idx, &mean) in curve.iter().enumerate() {
        let t = (idx + 1) as u64;
        let threshold = gamma / log2((n_users as u64 * t) as f64);
        if mean / t as f64 <= threshold {
            return Some(t);
        }
    }
    None
}
