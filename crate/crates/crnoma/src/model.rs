//! System model: configuration, SINR thresholds and outage verdicts.
//!
//! Every selection strategy shares the rate and outage arithmetic defined
//! here. Outage checks compare gains in the SINR domain instead of taking
//! logarithms, which keeps the Monte Carlo hot path cheap; [`sinr_rate`] is
//! used only where an achieved rate is actually reported. Meeting a
//! threshold exactly counts as success throughout.

use std::f64::consts::LN_2;
use thiserror::Error;

/// Invalid system parameters, rejected at construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("antenna count must be at least 1")]
    NoAntennas,
    #[error("secondary user count must be at least 1")]
    NoUsers,
    #[error("mean channel power must be positive and finite, got {0}")]
    BadOmega(f64),
    #[error("target rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("primary target rate {0} must be below secondary target rate {1}")]
    RateOrder(f64, f64),
    #[error("SNR must be finite, got {0} dB")]
    BadSnr(f64),
    #[error("estimation error variance must be non-negative and finite, got {0}")]
    BadSigmaE(f64),
}

/// Parameters of the uplink system: a base station with `antennas` receive
/// antennas, one primary user and `users` secondary users, all links under
/// independent Rayleigh fading.
///
/// Both users transmit at the same power, so a single transmit SNR applies.
/// `sigma_e_sq` is the variance of the additive channel estimation error;
/// zero means the base station has perfect CSI.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub antennas: usize,
    pub users: usize,
    /// Mean channel power of the primary link.
    pub omega0: f64,
    /// Mean channel power of every secondary link.
    pub omega_m: f64,
    /// Primary user's target rate, bits per channel use.
    pub primary_rate_bpcu: f64,
    /// Secondary admission target rate, bits per channel use.
    pub secondary_rate_bpcu: f64,
    /// Transmit SNR in dB.
    pub snr_db: f64,
    /// Channel estimation error variance, 0 for perfect CSI.
    pub sigma_e_sq: f64,
}

impl SystemConfig {
    /// Builds a validated configuration. The secondary target rate must
    /// exceed the primary target rate: admission control only makes sense
    /// when the opportunistic service is the more demanding one.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        antennas: usize,
        users: usize,
        omega0: f64,
        omega_m: f64,
        primary_rate_bpcu: f64,
        secondary_rate_bpcu: f64,
        snr_db: f64,
        sigma_e_sq: f64,
    ) -> Result<Self, ConfigError> {
        let cfg = Self {
            antennas,
            users,
            omega0,
            omega_m,
            primary_rate_bpcu,
            secondary_rate_bpcu,
            snr_db,
            sigma_e_sq,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-checks every construction invariant, for configurations whose
    /// fields were modified after `new` (sweeps substitute one field per
    /// grid point).
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.antennas == 0 {
            return Err(ConfigError::NoAntennas);
        }
        if self.users == 0 {
            return Err(ConfigError::NoUsers);
        }
        for omega in [self.omega0, self.omega_m] {
            if !(omega > 0.0 && omega.is_finite()) {
                return Err(ConfigError::BadOmega(omega));
            }
        }
        for rate in [self.primary_rate_bpcu, self.secondary_rate_bpcu] {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(ConfigError::BadRate(rate));
            }
        }
        if self.primary_rate_bpcu >= self.secondary_rate_bpcu {
            return Err(ConfigError::RateOrder(
                self.primary_rate_bpcu,
                self.secondary_rate_bpcu,
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(ConfigError::BadSnr(self.snr_db));
        }
        if !(self.sigma_e_sq >= 0.0 && self.sigma_e_sq.is_finite()) {
            return Err(ConfigError::BadSigmaE(self.sigma_e_sq));
        }
        Ok(())
    }

    /// Transmit SNR on a linear scale.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// SINR thresholds corresponding to the two target rates.
    pub fn thresholds(&self) -> Thresholds {
        // Rates were validated at construction, so this cannot fail.
        Thresholds::from_rates(self.primary_rate_bpcu, self.secondary_rate_bpcu)
            .expect("validated config has valid rates")
    }
}

/// SINR thresholds derived from the target rates: a rate R is achievable
/// exactly when the SINR reaches `2^R - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Primary decoding threshold.
    pub gamma0: f64,
    /// Secondary admission threshold.
    pub gamma_s: f64,
}

impl Thresholds {
    pub fn from_rates(
        primary_rate_bpcu: f64,
        secondary_rate_bpcu: f64,
    ) -> Result<Self, ConfigError> {
        if primary_rate_bpcu >= secondary_rate_bpcu {
            return Err(ConfigError::RateOrder(
                primary_rate_bpcu,
                secondary_rate_bpcu,
            ));
        }
        Ok(Self {
            gamma0: threshold_snr(primary_rate_bpcu)?,
            gamma_s: threshold_snr(secondary_rate_bpcu)?,
        })
    }
}

/// Minimum SINR at which a target rate of `rate_bpcu` is achievable,
/// `2^rate - 1`, evaluated in expm1 form so small rates keep full
/// precision.
pub fn threshold_snr(rate_bpcu: f64) -> Result<f64, ConfigError> {
    if !(rate_bpcu > 0.0 && rate_bpcu.is_finite()) {
        return Err(ConfigError::BadRate(rate_bpcu));
    }
    Ok((rate_bpcu * LN_2).exp_m1())
}

/// Achievable rate `log2(1 + snr*gain / (1 + snr*interference))` in bits
/// per channel use, in log1p form.
pub fn sinr_rate(gain: f64, interference_gain: f64, snr_linear: f64) -> f64 {
    debug_assert!(gain >= 0.0 && interference_gain >= 0.0 && snr_linear > 0.0);
    (snr_linear * gain / (1.0 + snr_linear * interference_gain)).ln_1p() / LN_2
}

/// Why a scheduling round ended in outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutageCause {
    /// No secondary user at any antenna meets the admission threshold.
    NoEligibleSecondary,
    /// The signal decoded first could not be recovered under interference
    /// from the signal decoded second.
    SicDecodeFailure,
    /// The admitted secondary user's rate fell below its target after the
    /// primary signal was removed (QoS decoding order).
    SecondaryRateFailure,
    /// The primary user's rate fell below its target after the secondary
    /// signal was removed (CSI decoding order).
    PrimaryRateFailure,
}

/// Outcome of one scheduling round. A verdict is either clear or carries
/// exactly one cause, so "no cause" and "no outage" cannot disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutageVerdict {
    Clear,
    Outage(OutageCause),
}

impl OutageVerdict {
    pub fn is_outage(self) -> bool {
        matches!(self, OutageVerdict::Outage(_))
    }

    pub fn cause(self) -> Option<OutageCause> {
        match self {
            OutageVerdict::Clear => None,
            OutageVerdict::Outage(cause) => Some(cause),
        }
    }
}

/// Outage verdict for the QoS decoding order on one primary/secondary gain
/// pair: the primary signal is decoded first under secondary interference,
/// then the secondary signal interference-free.
///
/// Comparisons happen in the SINR domain: the primary fails when
/// `snr*x / (1 + snr*y) < gamma0`, the secondary when `snr*y < gamma_s`.
pub fn qos_outage(
    primary_gain: f64,
    secondary_gain: f64,
    snr_linear: f64,
    th: &Thresholds,
) -> OutageVerdict {
    let p = snr_linear * primary_gain;
    let s = snr_linear * secondary_gain;
    if p / (1.0 + s) < th.gamma0 {
        OutageVerdict::Outage(OutageCause::SicDecodeFailure)
    } else if s < th.gamma_s {
        OutageVerdict::Outage(OutageCause::SecondaryRateFailure)
    } else {
        OutageVerdict::Clear
    }
}

/// Outage verdict for the CSI decoding order, the mirror image of
/// [`qos_outage`]: the stronger secondary signal is decoded first under
/// primary interference, then the primary signal interference-free.
pub fn csi_outage(
    primary_gain: f64,
    secondary_gain: f64,
    snr_linear: f64,
    th: &Thresholds,
) -> OutageVerdict {
    let p = snr_linear * primary_gain;
    let s = snr_linear * secondary_gain;
    if s / (1.0 + p) < th.gamma_s {
        OutageVerdict::Outage(OutageCause::SicDecodeFailure)
    } else if p < th.gamma0 {
        OutageVerdict::Outage(OutageCause::PrimaryRateFailure)
    } else {
        OutageVerdict::Clear
    }
}
