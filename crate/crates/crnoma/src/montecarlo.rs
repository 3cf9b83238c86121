//! Reproducible parallel Monte Carlo outage estimation and sweeps.
//!
//! Each trial owns an independent, deterministically derived random stream,
//! and aggregation is exact integer counting, so a result depends only on
//! `(seed, trials)` and never on the worker count or scheduling order.
//! Strategy and configuration incompatibilities are probed on the first
//! trial before the parallel region, so the hot loop is infallible.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{self, ScaledParams};
use crate::channel::{sample_imperfect, trial_rng, ChannelError};
use crate::model::{ConfigError, OutageCause, SystemConfig};
use crate::selection::{evaluate, SelectionError, Strategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("a paired estimate needs at least one strategy")]
    NoStrategies,
    #[error("sweep grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("sweep over {0} requires positive integer grid values, got {1}")]
    NonIntegerGrid(&'static str, f64),
    #[error("unknown sweep variable {0:?}")]
    UnknownVariable(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

/// Outage counts broken down by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CauseHistogram {
    pub no_eligible_secondary: u64,
    pub sic_decode_failure: u64,
    pub secondary_rate_failure: u64,
    pub primary_rate_failure: u64,
}

impl CauseHistogram {
    fn record(&mut self, cause: OutageCause) {
        match cause {
            OutageCause::NoEligibleSecondary => self.no_eligible_secondary += 1,
            OutageCause::SicDecodeFailure => self.sic_decode_failure += 1,
            OutageCause::SecondaryRateFailure => self.secondary_rate_failure += 1,
            OutageCause::PrimaryRateFailure => self.primary_rate_failure += 1,
        }
    }

    fn merge(mut self, other: CauseHistogram) -> CauseHistogram {
        self.no_eligible_secondary += other.no_eligible_secondary;
        self.sic_decode_failure += other.sic_decode_failure;
        self.secondary_rate_failure += other.secondary_rate_failure;
        self.primary_rate_failure += other.primary_rate_failure;
        self
    }

    pub fn total(&self) -> u64 {
        self.no_eligible_secondary
            + self.sic_decode_failure
            + self.secondary_rate_failure
            + self.primary_rate_failure
    }
}

/// Outage-frequency estimate for one strategy at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageEstimate {
    pub strategy: Strategy,
    pub p_hat: f64,
    pub trials: u64,
    pub outage_count: u64,
    /// Binomial plug-in standard error; the conservative bound `3/trials`
    /// when the count is degenerate (0 or all), so confidence bands never
    /// collapse to zero width.
    pub std_err: f64,
    pub seed: u64,
    pub causes: CauseHistogram,
}

fn binomial_std_err(count: u64, trials: u64) -> f64 {
    if count == 0 || count == trials {
        return 3.0 / trials as f64;
    }
    let n = trials as f64;
    let p = count as f64 / n;
    (p * (1.0 - p) / n).sqrt()
}

/// Estimates the outage probability of one strategy over independent
/// realizations. Trial `t` draws from the stream `(seed, t)`, making the
/// result worker-count invariant and any trial subset reproducible.
pub fn estimate(
    strategy: Strategy,
    cfg: &SystemConfig,
    trials: u64,
    seed: u64,
) -> Result<OutageEstimate, MonteCarloError> {
    cfg.validate()?;
    if trials == 0 {
        return Err(MonteCarloError::NoTrials);
    }
    probe(&[strategy], cfg, seed)?;
    let (outage_count, causes) = (0..trials)
        .into_par_iter()
        .fold(
            || (0u64, CauseHistogram::default()),
            |(mut count, mut causes), t| {
                let mut rng = trial_rng(seed, t);
                let ch = sample_imperfect(cfg, &mut rng).expect("probed before the parallel loop");
                let out = evaluate(strategy, cfg, &ch).expect("probed before the parallel loop");
                if let Some(cause) = out.verdict.cause() {
                    count += 1;
                    causes.record(cause);
                }
                (count, causes)
            },
        )
        .reduce(
            || (0u64, CauseHistogram::default()),
            |a, b| (a.0 + b.0, a.1.merge(b.1)),
        );
    Ok(OutageEstimate {
        strategy,
        p_hat: outage_count as f64 / trials as f64,
        trials,
        outage_count,
        std_err: binomial_std_err(outage_count, trials),
        seed,
        causes,
    })
}

/// Estimates all strategies on common random numbers: every trial draws one
/// realization shared by all strategies, and the violation matrix counts
/// per-trial dominance breaks.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedEstimates {
    pub estimates: Vec<OutageEstimate>,
    /// `violations[i][j]`: trials where strategy `i` was in outage and
    /// strategy `j` was not.
    pub violations: Vec<Vec<u64>>,
}

#[derive(Clone)]
struct PairedAccumulator {
    outages: Vec<u64>,
    causes: Vec<CauseHistogram>,
    violations: Vec<u64>,
}

impl PairedAccumulator {
    fn zero(n: usize) -> Self {
        Self {
            outages: vec![0; n],
            causes: vec![CauseHistogram::default(); n],
            violations: vec![0; n * n],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.outages.iter_mut().zip(other.outages) {
            *a += b;
        }
        for (a, b) in self.causes.iter_mut().zip(other.causes) {
            *a = a.merge(b);
        }
        for (a, b) in self.violations.iter_mut().zip(other.violations) {
            *a += b;
        }
        self
    }
}

/// Paired estimation over common random numbers. The realizations of trial
/// `t` are identical to those [`estimate`] would draw for `(seed, t)`, so a
/// paired run is exactly comparable to solo runs with the same seed.
pub fn estimate_paired(
    strategies: &[Strategy],
    cfg: &SystemConfig,
    trials: u64,
    seed: u64,
) -> Result<PairedEstimates, MonteCarloError> {
    cfg.validate()?;
    if trials == 0 {
        return Err(MonteCarloError::NoTrials);
    }
    if strategies.is_empty() {
        return Err(MonteCarloError::NoStrategies);
    }
    probe(strategies, cfg, seed)?;
    let n = strategies.len();
    let acc = (0..trials)
        .into_par_iter()
        .fold(
            || PairedAccumulator::zero(n),
            |mut acc, t| {
                let mut rng = trial_rng(seed, t);
                let ch = sample_imperfect(cfg, &mut rng).expect("probed before the parallel loop");
                let mut outage = vec![false; n];
                for (i, &strategy) in strategies.iter().enumerate() {
                    let out =
                        evaluate(strategy, cfg, &ch).expect("probed before the parallel loop");
                    if let Some(cause) = out.verdict.cause() {
                        outage[i] = true;
                        acc.outages[i] += 1;
                        acc.causes[i].record(cause);
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        if outage[i] && !outage[j] {
                            acc.violations[i * n + j] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| PairedAccumulator::zero(n), PairedAccumulator::merge);
    let estimates = strategies
        .iter()
        .zip(acc.outages.iter().zip(acc.causes.iter()))
        .map(|(&strategy, (&outage_count, &causes))| OutageEstimate {
            strategy,
            p_hat: outage_count as f64 / trials as f64,
            trials,
            outage_count,
            std_err: binomial_std_err(outage_count, trials),
            seed,
            causes,
        })
        .collect();
    let violations = (0..n)
        .map(|i| acc.violations[i * n..(i + 1) * n].to_vec())
        .collect();
    Ok(PairedEstimates {
        estimates,
        violations,
    })
}

/// Fails fast, outside the parallel region, on every error class the hot
/// loop could otherwise hit: these depend only on the configuration, never
/// on the drawn gains.
fn probe(strategies: &[Strategy], cfg: &SystemConfig, seed: u64) -> Result<(), MonteCarloError> {
    let ch = sample_imperfect(cfg, &mut trial_rng(seed, 0))?;
    for &strategy in strategies {
        evaluate(strategy, cfg, &ch)?;
    }
    Ok(())
}

/// Estimates the mean of an arbitrary per-stream indicator with the same
/// trial partitioning and reduction as [`estimate`]. Returns
/// `(count, p_hat, std_err)`.
pub fn estimate_indicator(
    trials: u64,
    seed: u64,
    indicator: impl Fn(&mut ChaCha8Rng) -> bool + Sync,
) -> (u64, f64, f64) {
    let count = (0..trials)
        .into_par_iter()
        .filter(|&t| indicator(&mut trial_rng(seed, t)))
        .count() as u64;
    (
        count,
        count as f64 / trials as f64,
        binomial_std_err(count, trials),
    )
}

/// Which configuration field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    SnrDb,
    Omega0,
    SigmaESq,
    Users,
    Antennas,
}

impl SweepVariable {
    /// Stable machine-readable name, used in CSV output and configuration
    /// files.
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::Omega0 => "omega0",
            SweepVariable::SigmaESq => "sigma_e_sq",
            SweepVariable::Users => "users",
            SweepVariable::Antennas => "antennas",
        }
    }

    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::SnrDb,
        SweepVariable::Omega0,
        SweepVariable::SigmaESq,
        SweepVariable::Users,
        SweepVariable::Antennas,
    ];

    /// Substitutes one grid value into a copy of the base configuration and
    /// re-validates it.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig, MonteCarloError> {
        let mut cfg = base.clone();
        match self {
            SweepVariable::SnrDb => cfg.snr_db = value,
            SweepVariable::Omega0 => cfg.omega0 = value,
            SweepVariable::SigmaESq => cfg.sigma_e_sq = value,
            SweepVariable::Users | SweepVariable::Antennas => {
                if !(value.fract() == 0.0 && value >= 1.0 && value <= u32::MAX as f64) {
                    return Err(MonteCarloError::NonIntegerGrid(self.name(), value));
                }
                if self == SweepVariable::Users {
                    cfg.users = value as usize;
                } else {
                    cfg.antennas = value as usize;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = MonteCarloError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| MonteCarloError::UnknownVariable(s.to_owned()))
    }
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One grid point of one strategy: the estimate plus the closed-form value
/// where one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub variable_value: f64,
    pub estimate: OutageEstimate,
    pub analytic: Option<f64>,
}

/// Sweep output: `points[g][s]` is grid value `g` under `strategies[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub strategies: Vec<Strategy>,
    pub points: Vec<Vec<SweepPoint>>,
}

/// Closed-form outage value for strategies that have one: the greedy joint
/// strategy at any antenna count and the single-antenna min-gain baseline,
/// both only under perfect CSI. `None` otherwise.
pub fn analytic_value(strategy: Strategy, cfg: &SystemConfig) -> Option<f64> {
    let p = ScaledParams::from_config(cfg).ok()?;
    match strategy {
        Strategy::SuboptimalJoint => analytic::outage_suboptimal_closed(&p).ok(),
        Strategy::MinGainQos if cfg.antennas == 1 => analytic::outage_min_gain_closed(&p).ok(),
        _ => None,
    }
}

/// splitmix64 finalizer over a salted master seed; decorrelates the streams
/// of different grid points and strategies while keeping every stream a
/// pure function of the master seed.
fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs every strategy across a strictly increasing grid of one variable.
///
/// Every grid point gets its own derived seed. With `common_random` set,
/// all strategies at one point share realizations (paired comparison);
/// otherwise each (point, strategy) cell draws an independent stream.
pub fn sweep(
    strategies: &[Strategy],
    base: &SystemConfig,
    variable: SweepVariable,
    grid: &[f64],
    trials: u64,
    seed: u64,
    common_random: bool,
) -> Result<SweepResult, MonteCarloError> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MonteCarloError::BadGrid);
    }
    if strategies.is_empty() {
        return Err(MonteCarloError::NoStrategies);
    }
    let mut points = Vec::with_capacity(grid.len());
    for (g, &value) in grid.iter().enumerate() {
        let cfg = variable.apply(base, value)?;
        let point_seed = mix_seed(seed, g as u64 + 1);
        let estimates: Vec<OutageEstimate> = if common_random {
            estimate_paired(strategies, &cfg, trials, point_seed)?.estimates
        } else {
            strategies
                .iter()
                .enumerate()
                .map(|(s, &strategy)| {
                    estimate(strategy, &cfg, trials, mix_seed(point_seed, s as u64 + 1))
                })
                .collect::<Result<_, _>>()?
        };
        points.push(
            estimates
                .into_iter()
                .map(|estimate| SweepPoint {
                    variable_value: value,
                    analytic: analytic_value(estimate.strategy, &cfg),
                    estimate,
                })
                .collect(),
        );
    }
    Ok(SweepResult {
        variable,
        strategies: strategies.to_vec(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cfg(antennas: usize, users: usize, snr_db: f64) -> SystemConfig {
        SystemConfig::new(antennas, users, 1.0, 1.0, 0.2, 1.0, snr_db, 0.0).unwrap()
    }

    #[test]
    fn sweep_variable_names_round_trip() {
        for v in SweepVariable::ALL {
            assert_eq!(v.name().parse::<SweepVariable>().unwrap(), v);
        }
        assert!(matches!(
            "bogus".parse::<SweepVariable>(),
            Err(MonteCarloError::UnknownVariable(_))
        ));
    }

    #[test]
    fn degenerate_counts_use_conservative_std_err() {
        assert_eq!(binomial_std_err(0, 100), 0.03);
        assert_eq!(binomial_std_err(100, 100), 0.03);
        let se = binomial_std_err(30, 100);
        assert!((se - (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_snr_extreme_is_certain_outage() {
        let cfg = cfg(2, 2, -40.0);
        let est = estimate(Strategy::SuboptimalJoint, &cfg, 100_000, 7).unwrap();
        assert!(est.p_hat > 0.9999, "p_hat {}", est.p_hat);
    }

    #[test]
    fn estimate_matches_closed_form_smoke() {
        let cfg = cfg(1, 5, 10.0);
        let est = estimate(Strategy::SuboptimalJoint, &cfg, 200_000, 11).unwrap();
        let closed = analytic_value(Strategy::SuboptimalJoint, &cfg).unwrap();
        assert!(
            (est.p_hat - closed).abs() < 4.0 * est.std_err,
            "mc {} vs closed {closed} (se {})",
            est.p_hat,
            est.std_err
        );
        assert_eq!(est.causes.total(), est.outage_count);
        assert_eq!(est.outage_count as f64, est.p_hat * est.trials as f64);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = cfg(2, 3, 5.0);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate(Strategy::OptimalJoint, &cfg, 50_000, 42).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn paired_run_equals_solo_runs() {
        let cfg = cfg(2, 2, 10.0);
        let strategies = [Strategy::SuboptimalJoint, Strategy::Exhaustive];
        let paired = estimate_paired(&strategies, &cfg, 30_000, 5).unwrap();
        for (i, &s) in strategies.iter().enumerate() {
            let solo = estimate(s, &cfg, 30_000, 5).unwrap();
            assert_eq!(paired.estimates[i], solo);
        }
    }

    #[test]
    fn clairvoyant_oracle_never_loses_paired_comparisons() {
        let cfg = cfg(3, 3, 10.0);
        let strategies = [
            Strategy::Exhaustive,
            Strategy::OptimalJoint,
            Strategy::SuboptimalJoint,
        ];
        let paired = estimate_paired(&strategies, &cfg, 100_000, 17).unwrap();
        // oracle outage while another strategy clear: impossible
        assert_eq!(paired.violations[0][1], 0);
        assert_eq!(paired.violations[0][2], 0);
        assert!(
            paired.estimates[0].outage_count <= paired.estimates[1].outage_count
                && paired.estimates[1].outage_count <= paired.estimates[2].outage_count
        );
    }

    #[test]
    fn synthetic_bernoulli_estimator_sanity() {
        let (_, p_hat, std_err) = estimate_indicator(1_000_000, 23, |rng| rng.gen::<f64>() < 0.3);
        assert!((p_hat - 0.3).abs() < 4.0 * std_err, "p_hat {p_hat}");
    }

    #[test]
    fn incompatible_strategy_errors_cleanly() {
        let cfg = cfg(2, 3, 10.0);
        let err = estimate(Strategy::MinGainQos, &cfg, 10, 0).unwrap_err();
        assert!(matches!(
            err,
            MonteCarloError::Selection(SelectionError::SingleAntennaOnly(2))
        ));
        let bad_csi = SystemConfig::new(1, 1, 0.5, 1.0, 0.2, 1.0, 10.0, 0.1).unwrap();
        let err = estimate(Strategy::SuboptimalJoint, &bad_csi, 10, 0).unwrap_err();
        assert!(matches!(err, MonteCarloError::Channel(_)));
    }

    #[test]
    fn sweep_validates_grid_and_fills_analytic_columns() {
        let base = cfg(1, 2, 0.0);
        let strategies = [
            Strategy::SuboptimalJoint,
            Strategy::OptimalJoint,
            Strategy::MinGainQos,
        ];
        assert!(matches!(
            sweep(&strategies, &base, SweepVariable::SnrDb, &[], 10, 0, false),
            Err(MonteCarloError::BadGrid)
        ));
        assert!(matches!(
            sweep(
                &strategies,
                &base,
                SweepVariable::SnrDb,
                &[0.0, 0.0],
                10,
                0,
                false
            ),
            Err(MonteCarloError::BadGrid)
        ));
        assert!(matches!(
            sweep(
                &strategies,
                &base,
                SweepVariable::Users,
                &[1.0, 2.5],
                10,
                0,
                false
            ),
            Err(MonteCarloError::NonIntegerGrid("users", _))
        ));

        let res = sweep(
            &strategies,
            &base,
            SweepVariable::SnrDb,
            &[0.0, 10.0],
            5_000,
            3,
            false,
        )
        .unwrap();
        assert_eq!(res.points.len(), 2);
        for row in &res.points {
            assert!(row[0].analytic.is_some());
            assert!(row[1].analytic.is_none());
            assert!(row[2].analytic.is_some());
        }

        // Under an estimation-error sweep the closed forms only apply at
        // zero error variance.
        let res = sweep(
            &[Strategy::SuboptimalJoint],
            &cfg(2, 2, 10.0),
            SweepVariable::SigmaESq,
            &[0.0, 0.1],
            2_000,
            3,
            false,
        )
        .unwrap();
        assert!(res.points[0][0].analytic.is_some());
        assert!(res.points[1][0].analytic.is_none());
    }

    #[test]
    fn sweep_snr_curve_is_monotone_within_noise() {
        let base = cfg(2, 3, 0.0);
        let grid: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
        let res = sweep(
            &[Strategy::SuboptimalJoint],
            &base,
            SweepVariable::SnrDb,
            &grid,
            100_000,
            29,
            false,
        )
        .unwrap();
        for w in res.points.windows(2) {
            let (a, b) = (&w[0][0], &w[1][0]);
            let slack = 3.0 * (a.estimate.std_err + b.estimate.std_err);
            assert!(
                b.estimate.p_hat <= a.estimate.p_hat + slack,
                "{} -> {}",
                a.estimate.p_hat,
                b.estimate.p_hat
            );
            // closed form agrees along the way
            assert!(
                (a.estimate.p_hat - a.analytic.unwrap()).abs()
                    <= 3.0 * a.estimate.std_err.max(3.0 / 100_000.0)
            );
        }
    }
}
