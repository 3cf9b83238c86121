//! Command-line front end for the outage laboratory.
//!
//! Subcommands: `run` executes a TOML experiment spec, `preset` expands a
//! named figure preset into one or more runs, `analytic` evaluates the
//! closed forms alone, and `list-presets` prints every preset's resolved
//! parameters for audit. `CRNOMA_THREADS` caps the worker pool; results
//! never depend on it.

mod experiment;
mod presets;
mod report;

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use crnoma::montecarlo::sweep;

use crate::experiment::{ExperimentSpec, ResolvedSpec};

#[derive(Parser)]
#[command(name = "crnoma", version, about = "CR-NOMA outage laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a spec file and write its CSV.
    Run { spec: PathBuf },
    /// Expand a named preset (fig2..fig6) and run every variant.
    Preset {
        name: String,
        /// Override each variant's trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Override each variant's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Base output path; the variant suffix is inserted before the
        /// extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate closed forms over the spec's grid, no simulation.
    Analytic { spec: PathBuf },
    /// Print every preset's resolved parameters.
    ListPresets,
}

fn main() -> anyhow::Result<()> {
    init_worker_pool()?;
    match Cli::parse().command {
        Command::Run { spec } => {
            let resolved = ExperimentSpec::from_path(&spec)?.resolve()?;
            execute(&resolved)
        }
        Command::Preset {
            name,
            trials,
            seed,
            out,
        } => run_preset(&name, trials, seed, out.as_deref()),
        Command::Analytic { spec } => {
            let resolved = ExperimentSpec::from_path(&spec)?.resolve()?;
            let csv = report::analytic_csv(&resolved)?;
            write_output(&resolved.output, &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", resolved.output.display());
            Ok(())
        }
        Command::ListPresets => {
            print!("{}", list_presets());
            Ok(())
        }
    }
}

/// Applies `CRNOMA_THREADS` to the global worker pool. Unset means rayon's
/// default (all cores).
fn init_worker_pool() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CRNOMA_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .context("CRNOMA_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("worker pool configured twice")?;
    }
    Ok(())
}

/// Runs one resolved spec: simulate, write the CSV in a single step, then
/// print the summary. Nothing is written until the whole sweep succeeds.
fn execute(resolved: &ResolvedSpec) -> anyhow::Result<()> {
    let mut result = sweep(
        &resolved.strategies,
        &resolved.base,
        resolved.variable,
        &resolved.grid,
        resolved.trials,
        resolved.seed,
        resolved.common_random,
    )?;
    if !resolved.include_analytic {
        for point in result.points.iter_mut().flatten() {
            point.analytic = None;
        }
    }
    write_output(&resolved.output, &report::sweep_csv(&result))?;
    print!("{}", report::summary_table(&result, &resolved.base));
    eprintln!("wrote {}", resolved.output.display());
    Ok(())
}

fn write_output(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        }
    }
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write output file {}", path.display()))
}

fn run_preset(
    name: &str,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let preset = presets::find(name)
        .with_context(|| format!("unknown preset {name:?}; see list-presets"))?
        .with_overrides(trials, seed, out);
    // Resolve everything first so a bad variant cannot leave partial output.
    let resolved: Vec<ResolvedSpec> = preset
        .variants
        .iter()
        .map(|v| v.spec.resolve())
        .collect::<anyhow::Result<_>>()?;
    if let Some(note) = preset.note {
        eprintln!("note: {note}");
    }
    for spec in &resolved {
        execute(spec)?;
    }
    Ok(())
}

fn list_presets() -> String {
    let mut out = String::new();
    for name in presets::NAMES {
        let preset = presets::find(name).expect("every listed preset exists");
        out.push_str(&format!("{}: {}\n", preset.name, preset.summary));
        if let Some(note) = preset.note {
            out.push_str(&format!("  note: {note}\n"));
        }
        for v in &preset.variants {
            let s = &v.spec.system;
            out.push_str(&format!(
                "  {}_{}: K={} M={} omega0={} omega_m={} rates {}/{} BPCU sigma_e_sq={} \
                 sweep {} over {:?} strategies [{}] trials={} seed={} -> {}\n",
                preset.name,
                v.suffix,
                s.antennas,
                s.users,
                s.omega0,
                s.omega_m,
                s.primary_rate_bpcu,
                s.secondary_rate_bpcu,
                s.sigma_e_sq,
                v.spec.sweep.variable,
                v.spec.sweep.grid,
                v.spec.run.strategies.join(", "),
                v.spec.run.trials,
                v.spec.run.seed,
                v.spec.run.output.display(),
            ));
        }
    }
    out
}
