//! Experiment specification files.
//!
//! A spec is a TOML document with three tables: `[system]` holds the base
//! configuration, `[sweep]` the varied field and its grid, and `[run]` the
//! execution plan. Unknown keys are hard errors so a typo cannot silently
//! fall back to a default, and a parsed spec serializes back to an
//! equivalent document.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crnoma::{Strategy, SweepVariable, SystemConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub system: SystemSection,
    pub sweep: SweepSection,
    pub run: RunSection,
}

/// Base configuration; the swept field's value here is the placeholder the
/// grid overwrites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub antennas: usize,
    pub users: usize,
    pub omega0: f64,
    pub omega_m: f64,
    pub primary_rate_bpcu: f64,
    pub secondary_rate_bpcu: f64,
    pub snr_db: f64,
    pub sigma_e_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of `snr_db`, `omega0`, `sigma_e_sq`, `users`, `antennas`.
    pub variable: String,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Strategy names as printed in the CSV `strategy` column.
    pub strategies: Vec<String>,
    pub trials: u64,
    pub seed: u64,
    pub output: PathBuf,
    /// Share one realization per trial across all strategies at a grid
    /// point, so per-point differences are not masked by sampling noise.
    #[serde(default)]
    pub common_random: bool,
    /// Fill the analytic column where a closed form exists.
    #[serde(default = "default_true")]
    pub include_analytic: bool,
    /// Append the clairvoyant feasibility oracle to the strategy list.
    #[serde(default)]
    pub include_oracle: bool,
}

fn default_true() -> bool {
    true
}

/// A spec with every field parsed and validated, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedSpec {
    pub base: SystemConfig,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub trials: u64,
    pub seed: u64,
    pub output: PathBuf,
    pub common_random: bool,
    pub include_analytic: bool,
}

impl ExperimentSpec {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read spec file {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("malformed spec file {}", path.display()))
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("spec structs serialize infallibly")
    }

    /// Validates every field and resolves names into library types. The
    /// oracle flag appends the exhaustive strategy unless already listed.
    pub fn resolve(&self) -> anyhow::Result<ResolvedSpec> {
        let s = &self.system;
        let base = SystemConfig::new(
            s.antennas,
            s.users,
            s.omega0,
            s.omega_m,
            s.primary_rate_bpcu,
            s.secondary_rate_bpcu,
            s.snr_db,
            s.sigma_e_sq,
        )
        .context("invalid [system] table")?;
        let variable: SweepVariable = self
            .sweep
            .variable
            .parse()
            .context("invalid [sweep] table")?;
        anyhow::ensure!(
            !self.run.strategies.is_empty(),
            "[run] strategies must list at least one strategy"
        );
        let mut strategies = self
            .run
            .strategies
            .iter()
            .map(|name| name.parse::<Strategy>())
            .collect::<Result<Vec<_>, _>>()
            .context("invalid [run] strategies entry")?;
        if self.run.include_oracle && !strategies.contains(&Strategy::Exhaustive) {
            strategies.push(Strategy::Exhaustive);
        }
        Ok(ResolvedSpec {
            base,
            variable,
            grid: self.sweep.grid.clone(),
            strategies,
            trials: self.run.trials,
            seed: self.run.seed,
            output: self.run.output.clone(),
            common_random: self.run.common_random,
            include_analytic: self.run.include_analytic,
        })
    }
}
