//! Antenna and user selection strategies and their outage verdicts.
//!
//! All strategies share the same contract: argmax/argmin decisions and
//! eligibility tests run on the gains the receiver can see (estimates under
//! imperfect CSI, true gains otherwise), while achieved rates and the outage
//! verdict are evaluated on the true gains, because outage is a physical
//! event. The exhaustive oracle is the exception: it is a clairvoyant
//! feasibility bound and reads true gains everywhere. Ties in every
//! argmax/argmin go to the lowest index; continuous fading makes ties
//! measure-zero, but tests need determinism.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::model::{qos_outage, sinr_rate, OutageCause, OutageVerdict, SystemConfig, Thresholds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("gain matrix must be non-empty")]
    EmptyGainMatrix,
    #[error("min-gain baseline applies to single-antenna systems, got {0} antennas")]
    SingleAntennaOnly(usize),
    #[error(
        "unknown strategy {0:?}, expected one of suboptimal, optimal, csi-baseline, \
         min-gain-qos, exhaustive"
    )]
    UnknownStrategy(String),
}

/// The scheduling strategies the laboratory compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Greedy two-stage selection: fix the strongest primary antenna, admit
    /// the weakest eligible secondary there, fall back to a joint search
    /// over the remaining antennas when none is eligible.
    SuboptimalJoint,
    /// Joint selection that records, per antenna, the weakest eligible
    /// secondary and picks the antenna maximizing the primary-to-secondary
    /// gain ratio.
    OptimalJoint,
    /// CSI-ordered baseline: weakest primary antenna, strongest secondary
    /// user, secondary decoded first; scored on the secondary's decode
    /// stage.
    CsiBaseline,
    /// Single-antenna baseline scheduling the weakest secondary user with no
    /// eligibility filter.
    MinGainQos,
    /// Clairvoyant feasibility oracle: no outage exactly when some pair
    /// passes both the admission and the SIC test on true gains.
    Exhaustive,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::SuboptimalJoint,
        Strategy::OptimalJoint,
        Strategy::CsiBaseline,
        Strategy::MinGainQos,
        Strategy::Exhaustive,
    ];

    /// Stable machine-readable name, used in CSV output and CLI arguments.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::SuboptimalJoint => "suboptimal",
            Strategy::OptimalJoint => "optimal",
            Strategy::CsiBaseline => "csi-baseline",
            Strategy::MinGainQos => "min-gain-qos",
            Strategy::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| SelectionError::UnknownStrategy(s.to_string()))
    }
}

/// Which path a scheduling round took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionBranch {
    /// No eligible secondary anywhere; nothing was scheduled.
    PreSicOutage,
    /// The greedy strategy admitted a user at the strongest primary antenna.
    SelectedAtBestAntenna,
    /// The greedy strategy fell back to the joint search off the preferred
    /// antenna.
    FallbackJointSearch,
    /// Single-step strategies that always produce a pair directly.
    Direct,
}

/// Result of one scheduling round.
///
/// Indices are zero-based and absent exactly when `branch` is
/// [`SelectionBranch::PreSicOutage`]; rates are the achieved rates of the
/// scheduled pair on true gains and zero when nothing was scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub strategy: Strategy,
    pub antenna: Option<usize>,
    pub user: Option<usize>,
    pub primary_rate: f64,
    pub secondary_rate: f64,
    pub verdict: OutageVerdict,
    pub branch: SelectionBranch,
}

/// Largest achievable secondary rate over a set of channel gains,
/// `max log2(1 + snr*g)`. The maximum rate sits at the maximum gain, so one
/// logarithm suffices.
pub fn max_secondary_rate(gains: &[f64], snr_linear: f64) -> Result<f64, SelectionError> {
    let best = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if gains.is_empty() {
        return Err(SelectionError::EmptyGainMatrix);
    }
    Ok(sinr_rate(best, 0.0, snr_linear))
}

/// Evaluates one scheduling round under the given strategy.
pub fn evaluate(
    strategy: Strategy,
    cfg: &SystemConfig,
    ch: &ChannelRealization,
) -> Result<SelectionOutcome, SelectionError> {
    Ok(match strategy {
        Strategy::SuboptimalJoint => select_suboptimal(cfg, ch),
        Strategy::OptimalJoint => select_optimal(cfg, ch),
        Strategy::CsiBaseline => select_csi_baseline(cfg, ch),
        Strategy::MinGainQos => select_min_gain_qos(cfg, ch)?,
        Strategy::Exhaustive => select_exhaustive(cfg, ch),
    })
}

fn argmax_by(n: usize, f: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_v = f(0);
    for i in 1..n {
        let v = f(i);
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

fn argmin_by(n: usize, f: impl Fn(usize) -> f64) -> usize {
    argmax_by(n, |i| -f(i))
}

fn no_pair_outcome(strategy: Strategy) -> SelectionOutcome {
    SelectionOutcome {
        strategy,
        antenna: None,
        user: None,
        primary_rate: 0.0,
        secondary_rate: 0.0,
        verdict: OutageVerdict::Outage(OutageCause::NoEligibleSecondary),
        branch: SelectionBranch::PreSicOutage,
    }
}

/// Verdict for strategies that admit only pre-screened users: once a pair
/// is scheduled, outage means exactly that the primary's SIC decoding under
/// the secondary's interference misses its threshold.
fn sic_only_verdict(
    primary_gain: f64,
    secondary_gain: f64,
    snr_linear: f64,
    th: &Thresholds,
) -> OutageVerdict {
    let p = snr_linear * primary_gain;
    let s = snr_linear * secondary_gain;
    if p / (1.0 + s) < th.gamma0 {
        OutageVerdict::Outage(OutageCause::SicDecodeFailure)
    } else {
        OutageVerdict::Clear
    }
}

/// Builds the outcome of a scheduled pair decoded in QoS order: primary
/// first under interference, then the secondary interference-free. Rates
/// come from true gains.
fn qos_pair_outcome(
    strategy: Strategy,
    branch: SelectionBranch,
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    k: usize,
    m: usize,
    verdict: OutageVerdict,
) -> SelectionOutcome {
    let snr = cfg.snr_linear();
    let x = ch.primary_gain(k);
    let y = ch.secondary_gain(m, k);
    SelectionOutcome {
        strategy,
        antenna: Some(k),
        user: Some(m),
        primary_rate: sinr_rate(x, y, snr),
        secondary_rate: sinr_rate(y, 0.0, snr),
        verdict,
        branch,
    }
}

/// Greedy two-stage selection.
///
/// Stages, all on decision gains: (a) if no secondary anywhere is eligible,
/// declare a pre-SIC outage; (b) pick the strongest primary antenna; (c) if
/// it hosts eligible secondaries, admit the weakest of them; (d) otherwise
/// admit the weakest eligible secondary among the other antennas. The
/// verdict then checks the primary's SIC decoding on true gains of the
/// chosen pair.
pub fn select_suboptimal(cfg: &SystemConfig, ch: &ChannelRealization) -> SelectionOutcome {
    let snr = cfg.snr_linear();
    let th = cfg.thresholds();
    let eligible = |m: usize, k: usize| snr * ch.decision_secondary_gain(m, k) >= th.gamma_s;
    let any_eligible = (0..cfg.users).any(|m| (0..cfg.antennas).any(|k| eligible(m, k)));
    if !any_eligible {
        return no_pair_outcome(Strategy::SuboptimalJoint);
    }

    let k_star = argmax_by(cfg.antennas, |k| ch.decision_primary_gain(k));
    let mut at_best: Option<(usize, f64)> = None;
    for m in 0..cfg.users {
        if eligible(m, k_star) {
            let y = ch.decision_secondary_gain(m, k_star);
            if at_best.map_or(true, |(_, best)| y < best) {
                at_best = Some((m, y));
            }
        }
    }
    if let Some((m_star, _)) = at_best {
        let verdict = sic_only_verdict(
            ch.primary_gain(k_star),
            ch.secondary_gain(m_star, k_star),
            snr,
            &th,
        );
        return qos_pair_outcome(
            Strategy::SuboptimalJoint,
            SelectionBranch::SelectedAtBestAntenna,
            cfg,
            ch,
            k_star,
            m_star,
            verdict,
        );
    }

    // Joint search over every antenna except the preferred one for the
    // weakest eligible secondary; non-empty because an eligible pair exists
    // somewhere and not at k_star.
    let mut fallback: Option<(usize, usize, f64)> = None;
    for k in 0..cfg.antennas {
        if k == k_star {
            continue;
        }
        for m in 0..cfg.users {
            if eligible(m, k) {
                let y = ch.decision_secondary_gain(m, k);
                if fallback.map_or(true, |(_, _, best)| y < best) {
                    fallback = Some((k, m, y));
                }
            }
        }
    }
    let (k_plus, m_plus, _) = fallback.expect("an eligible pair exists off the preferred antenna");
    let verdict = sic_only_verdict(
        ch.primary_gain(k_plus),
        ch.secondary_gain(m_plus, k_plus),
        snr,
        &th,
    );
    qos_pair_outcome(
        Strategy::SuboptimalJoint,
        SelectionBranch::FallbackJointSearch,
        cfg,
        ch,
        k_plus,
        m_plus,
        verdict,
    )
}

/// Joint selection by per-antenna gain ratio.
///
/// For each antenna with eligible secondaries, the weakest eligible one is
/// its candidate; the antenna maximizing the primary-to-candidate gain
/// ratio wins. The ratio argmax is not always the SIC-SINR argmax at finite
/// SNR, so this strategy can occasionally declare outage where the
/// exhaustive oracle does not; the gap is measured, not assumed away.
pub fn select_optimal(cfg: &SystemConfig, ch: &ChannelRealization) -> SelectionOutcome {
    let snr = cfg.snr_linear();
    let th = cfg.thresholds();
    let mut best: Option<(usize, usize, f64)> = None;
    for k in 0..cfg.antennas {
        let mut candidate: Option<(usize, f64)> = None;
        for m in 0..cfg.users {
            let y = ch.decision_secondary_gain(m, k);
            if snr * y >= th.gamma_s && candidate.map_or(true, |(_, best_y)| y < best_y) {
                candidate = Some((m, y));
            }
        }
        if let Some((m, y)) = candidate {
            let ratio = ch.decision_primary_gain(k) / y;
            if best.map_or(true, |(_, _, best_r)| ratio > best_r) {
                best = Some((k, m, ratio));
            }
        }
    }
    let Some((k_opt, m_opt, _)) = best else {
        return no_pair_outcome(Strategy::OptimalJoint);
    };
    let verdict = sic_only_verdict(
        ch.primary_gain(k_opt),
        ch.secondary_gain(m_opt, k_opt),
        snr,
        &th,
    );
    qos_pair_outcome(
        Strategy::OptimalJoint,
        SelectionBranch::Direct,
        cfg,
        ch,
        k_opt,
        m_opt,
        verdict,
    )
}

/// CSI-ordered baseline: the antenna where the primary is weakest, the
/// secondary user strongest there, the secondary decoded first under
/// primary interference and the primary after cancellation.
///
/// The verdict records only the first decode stage, whether the scheduled
/// secondary reaches its target rate through the primary's interference.
/// That is the quantity this scheduling rule trades the primary away for:
/// deliberately picking the primary's weakest antenna floors the primary's
/// own post-cancellation rate, so folding that stage into the verdict would
/// score the rule on a goal it never pursues and the resulting curve would
/// track the sabotaged primary instead of the secondary throughput the
/// comparison is about. Callers that want the full two-stage event can
/// compose it from [`csi_outage`](crate::model::csi_outage) on the same
/// gains.
pub fn select_csi_baseline(cfg: &SystemConfig, ch: &ChannelRealization) -> SelectionOutcome {
    let snr = cfg.snr_linear();
    let th = cfg.thresholds();
    let k = argmin_by(cfg.antennas, |k| ch.decision_primary_gain(k));
    let m = argmax_by(cfg.users, |m| ch.decision_secondary_gain(m, k));
    let x = ch.primary_gain(k);
    let y = ch.secondary_gain(m, k);
    let verdict = if snr * y / (1.0 + snr * x) < th.gamma_s {
        OutageVerdict::Outage(OutageCause::SicDecodeFailure)
    } else {
        OutageVerdict::Clear
    };
    SelectionOutcome {
        strategy: Strategy::CsiBaseline,
        antenna: Some(k),
        user: Some(m),
        primary_rate: sinr_rate(x, 0.0, snr),
        secondary_rate: sinr_rate(y, x, snr),
        verdict,
        branch: SelectionBranch::Direct,
    }
}

/// Single-antenna baseline scheduling the weakest secondary user with no
/// eligibility filter, decoded in QoS order; the verdict carries both
/// possible causes.
pub fn select_min_gain_qos(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
) -> Result<SelectionOutcome, SelectionError> {
    if cfg.antennas != 1 {
        return Err(SelectionError::SingleAntennaOnly(cfg.antennas));
    }
    let snr = cfg.snr_linear();
    let th = cfg.thresholds();
    let m = argmin_by(cfg.users, |m| ch.decision_secondary_gain(m, 0));
    let verdict = qos_outage(ch.primary_gain(0), ch.secondary_gain(m, 0), snr, &th);
    Ok(qos_pair_outcome(
        Strategy::MinGainQos,
        SelectionBranch::Direct,
        cfg,
        ch,
        0,
        m,
        verdict,
    ))
}

/// Clairvoyant feasibility verdict on true gains: clear exactly when some
/// pair passes both the admission test and the primary SIC test. The cause
/// distinguishes whether admission or SIC decoding was the binding failure.
pub fn exhaustive_feasible(cfg: &SystemConfig, ch: &ChannelRealization) -> OutageVerdict {
    let snr = cfg.snr_linear();
    let th = cfg.thresholds();
    let mut any_eligible = false;
    for k in 0..cfg.antennas {
        let p = snr * ch.primary_gain(k);
        for m in 0..cfg.users {
            let s = snr * ch.secondary_gain(m, k);
            if s >= th.gamma_s {
                any_eligible = true;
                if p / (1.0 + s) >= th.gamma0 {
                    return OutageVerdict::Clear;
                }
            }
        }
    }
    if any_eligible {
        OutageVerdict::Outage(OutageCause::SicDecodeFailure)
    } else {
        OutageVerdict::Outage(OutageCause::NoEligibleSecondary)
    }
}

/// Exhaustive oracle as a full outcome: reports the eligible pair with the
/// best SIC metric, whose verdict matches [`exhaustive_feasible`].
pub fn select_exhaustive(cfg: &SystemConfig, ch: &ChannelRealization) -> SelectionOutcome {
    let snr = cfg.snr_linear();
    let th = cfg.thresholds();
    let mut best: Option<(usize, usize, f64)> = None;
    for k in 0..cfg.antennas {
        let p = snr * ch.primary_gain(k);
        for m in 0..cfg.users {
            let s = snr * ch.secondary_gain(m, k);
            if s >= th.gamma_s {
                let metric = p / (1.0 + s);
                if best.map_or(true, |(_, _, best_m)| metric > best_m) {
                    best = Some((k, m, metric));
                }
            }
        }
    }
    let Some((k, m, _)) = best else {
        return no_pair_outcome(Strategy::Exhaustive);
    };
    let verdict = sic_only_verdict(ch.primary_gain(k), ch.secondary_gain(m, k), snr, &th);
    qos_pair_outcome(
        Strategy::Exhaustive,
        SelectionBranch::Direct,
        cfg,
        ch,
        k,
        m,
        verdict,
    )
}
