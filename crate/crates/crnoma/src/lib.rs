//! Outage laboratory for an uplink cognitive-radio NOMA system: a multi
//! antenna base station serving one primary user while opportunistically
//! admitting one of several secondary users per slot.
//!
//! The crate pairs closed-form outage expressions with reproducible Monte
//! Carlo estimation so each can check the other: [`analytic`] evaluates the
//! exact finite-sum forms plus independent quadrature oracles, [`channel`]
//! draws Rayleigh block-fading realizations with optional estimation error,
//! [`selection`] implements the scheduling strategies under comparison, and
//! [`montecarlo`] runs worker-count-invariant parallel estimation and
//! sweeps. Given one seed, every estimate is reproducible bit for bit at
//! any parallelism level.

pub mod analytic;
pub mod channel;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod selection;

pub use channel::{ChannelError, ChannelRealization};
pub use model::{ConfigError, OutageCause, OutageVerdict, SystemConfig, Thresholds};
pub use montecarlo::{
    CauseHistogram, MonteCarloError, OutageEstimate, PairedEstimates, SweepPoint, SweepResult,
    SweepVariable,
};
pub use selection::{SelectionBranch, SelectionError, SelectionOutcome, Strategy};
