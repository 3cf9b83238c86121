//! Named experiment presets.
//!
//! Each preset reproduces one published figure: a family of outage curves
//! at the reference rates of 0.2 and 1 BPCU over unit-power channels unless
//! the figure fixes something else. A preset expands into one spec per
//! curve family member, each writing its own suffixed CSV.

use std::path::PathBuf;

use crate::experiment::{ExperimentSpec, RunSection, SweepSection, SystemSection};

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone)]
pub struct Variant {
    /// Output-name suffix identifying the curve family member.
    pub suffix: &'static str,
    pub spec: ExperimentSpec,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    /// Audit note recording a source discrepancy, printed by `list-presets`.
    pub note: Option<&'static str>,
    pub variants: Vec<Variant>,
}

pub const NAMES: [&str; 5] = ["fig2", "fig3", "fig4", "fig5", "fig6"];

fn snr_grid() -> Vec<f64> {
    (0..=8).map(|i| f64::from(i * 5)).collect()
}

fn spec(
    suffix: &'static str,
    antennas: usize,
    users: usize,
    omega0: f64,
    sigma_e_sq: f64,
    variable: &str,
    grid: Vec<f64>,
    strategies: &[&str],
) -> Variant {
    Variant {
        suffix,
        spec: ExperimentSpec {
            system: SystemSection {
                antennas,
                users,
                omega0,
                omega_m: 1.0,
                primary_rate_bpcu: 0.2,
                secondary_rate_bpcu: 1.0,
                snr_db: if variable == "snr_db" { grid[0] } else { 10.0 },
                sigma_e_sq,
            },
            sweep: SweepSection {
                variable: variable.into(),
                grid,
            },
            run: RunSection {
                strategies: strategies.iter().map(|&s| s.into()).collect(),
                trials: DEFAULT_TRIALS,
                seed: DEFAULT_SEED,
                output: PathBuf::new(),
                common_random: false,
                include_analytic: true,
                include_oracle: false,
            },
        },
    }
}

pub fn find(name: &str) -> Option<Preset> {
    let qos = ["csi-baseline", "min-gain-qos", "suboptimal", "optimal"];
    let joint = ["suboptimal", "optimal"];
    let mut preset = match name {
        "fig2" => Preset {
            name: "fig2",
            summary: "single antenna, all strategies vs SNR, M in {1, 5}",
            note: None,
            variants: vec![
                spec("m1", 1, 1, 1.0, 0.0, "snr_db", snr_grid(), &qos),
                spec("m5", 1, 5, 1.0, 0.0, "snr_db", snr_grid(), &qos),
            ],
        },
        "fig3" => Preset {
            name: "fig3",
            summary: "six users, joint strategies vs SNR, K in {2, 4, 7}",
            note: None,
            variants: vec![
                spec("k2", 2, 6, 1.0, 0.0, "snr_db", snr_grid(), &joint),
                spec("k4", 4, 6, 1.0, 0.0, "snr_db", snr_grid(), &joint),
                spec("k7", 7, 6, 1.0, 0.0, "snr_db", snr_grid(), &joint),
            ],
        },
        "fig4" => Preset {
            name: "fig4",
            summary: "six antennas, joint strategies vs SNR, M in {1, 4, 6}",
            note: None,
            variants: vec![
                spec("m1", 6, 1, 1.0, 0.0, "snr_db", snr_grid(), &joint),
                spec("m4", 6, 4, 1.0, 0.0, "snr_db", snr_grid(), &joint),
                spec("m6", 6, 6, 1.0, 0.0, "snr_db", snr_grid(), &joint),
            ],
        },
        "fig5" => Preset {
            name: "fig5",
            summary: "estimation-error sensitivity vs SNR, sigma_e_sq in {0, 0.01, 0.1}",
            note: Some(
                "the reproduced figure's caption fixes K = M = 4 while its running text \
                 says 5; this preset follows the caption",
            ),
            variants: vec![
                spec("e0", 4, 4, 1.0, 0.0, "snr_db", snr_grid(), &["optimal"]),
                spec("e0p01", 4, 4, 1.0, 0.01, "snr_db", snr_grid(), &["optimal"]),
                spec("e0p1", 4, 4, 1.0, 0.1, "snr_db", snr_grid(), &["optimal"]),
            ],
        },
        "fig6" => Preset {
            name: "fig6",
            summary: "crossover vs primary channel power at 10 dB, M = 5, K in {3, 5}",
            note: None,
            variants: vec![
                spec(
                    "k3",
                    3,
                    5,
                    0.1,
                    0.0,
                    "omega0",
                    (1..=10).map(|i| f64::from(i) / 10.0).collect(),
                    &["optimal", "csi-baseline"],
                ),
                spec(
                    "k5",
                    5,
                    5,
                    0.1,
                    0.0,
                    "omega0",
                    (1..=10).map(|i| f64::from(i) / 10.0).collect(),
                    &["optimal", "csi-baseline"],
                ),
            ],
        },
        _ => return None,
    };
    for variant in &mut preset.variants {
        variant.spec.run.output = PathBuf::from(format!("{}_{}.csv", preset.name, variant.suffix));
    }
    Some(preset)
}

impl Preset {
    /// Applies command-line overrides. A custom output path keeps its
    /// extension, with the variant suffix inserted before it.
    pub fn with_overrides(
        mut self,
        trials: Option<u64>,
        seed: Option<u64>,
        out: Option<&std::path::Path>,
    ) -> Self {
        for variant in &mut self.variants {
            let run = &mut variant.spec.run;
            if let Some(t) = trials {
                run.trials = t;
            }
            if let Some(s) = seed {
                run.seed = s;
            }
            if let Some(base) = out {
                let stem = base
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let ext = base
                    .extension()
                    .map(|e| e.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "csv".into());
                let name = format!("{stem}_{}.{ext}", variant.suffix);
                run.output = base.with_file_name(name);
            }
        }
        self
    }
}
