//! Experiment harness for the latent-type recommendation simulator: config
//! parsing, Monte Carlo orchestration, CSV emission, and the bodies of the
//! CLI subcommands.

pub mod csvio;
pub mod report;
pub mod runner;
pub mod spec;
