//! Rayleigh block-fading channel sampling with optional estimation error.
//!
//! One realization holds the primary user's K antenna coefficients and the
//! M x K secondary coefficient matrix. Coefficients are circularly symmetric
//! complex Gaussians, so squared magnitudes are exponential with the
//! configured mean powers. Under imperfect CSI the receiver works from
//! estimated coefficients while outage verdicts are judged on the true ones;
//! the estimate is drawn first and the true channel is built around it, so
//! the true channel keeps unit variance for every error level and the
//! perfect-CSI draw sequence is reproduced bit for bit when the error
//! variance is zero.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::model::SystemConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("imperfect CSI sampling is calibrated for unit mean powers, got omega0 = {omega0}, omega_m = {omega_m}")]
    UnitPowersRequired { omega0: f64, omega_m: f64 },
}

/// One block-fading draw: true coefficients plus, under imperfect CSI, the
/// estimates the receiver acts on.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    antennas: usize,
    users: usize,
    /// Primary coefficients, one per antenna.
    primary: Vec<Complex64>,
    /// Secondary coefficients in row-major user-by-antenna order.
    secondary: Vec<Complex64>,
    /// Estimated coefficients in the same layout; `None` under perfect CSI.
    estimated: Option<(Vec<Complex64>, Vec<Complex64>)>,
}

impl ChannelRealization {
    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// True squared magnitude of the primary channel at antenna `k`.
    pub fn primary_gain(&self, k: usize) -> f64 {
        self.primary[k].norm_sqr()
    }

    /// True squared magnitude of user `m`'s channel at antenna `k`.
    pub fn secondary_gain(&self, m: usize, k: usize) -> f64 {
        self.secondary[m * self.antennas + k].norm_sqr()
    }

    /// Primary gain as the receiver sees it: the estimate under imperfect
    /// CSI, the true value otherwise.
    pub fn decision_primary_gain(&self, k: usize) -> f64 {
        match &self.estimated {
            Some((primary, _)) => primary[k].norm_sqr(),
            None => self.primary_gain(k),
        }
    }

    /// Secondary gain as the receiver sees it.
    pub fn decision_secondary_gain(&self, m: usize, k: usize) -> f64 {
        match &self.estimated {
            Some((_, secondary)) => secondary[m * self.antennas + k].norm_sqr(),
            None => self.secondary_gain(m, k),
        }
    }

    pub fn has_estimates(&self) -> bool {
        self.estimated.is_some()
    }
}

#[cfg(test)]
impl ChannelRealization {
    /// Test scaffolding: builds a realization with prescribed squared
    /// magnitudes (real coefficients, zero phase). `secondary` is row-major
    /// user-by-antenna; `estimates` mirrors the two layouts.
    pub(crate) fn from_gains(
        primary: &[f64],
        secondary: &[f64],
        estimates: Option<(&[f64], &[f64])>,
    ) -> ChannelRealization {
        assert!(!primary.is_empty() && secondary.len() % primary.len() == 0);
        let lift = |g: &[f64]| {
            g.iter()
                .map(|&v| Complex64::new(v.sqrt(), 0.0))
                .collect::<Vec<_>>()
        };
        ChannelRealization {
            antennas: primary.len(),
            users: secondary.len() / primary.len(),
            primary: lift(primary),
            secondary: lift(secondary),
            estimated: estimates.map(|(p, s)| {
                assert_eq!(p.len(), primary.len());
                assert_eq!(s.len(), secondary.len());
                (lift(p), lift(s))
            }),
        }
    }
}

fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Draws one realization with exact receiver knowledge. Mean powers follow
/// the configuration; the estimation error variance is ignored here.
pub fn sample_perfect<R: Rng>(cfg: &SystemConfig, rng: &mut R) -> ChannelRealization {
    let primary = (0..cfg.antennas)
        .map(|_| complex_gaussian(rng, cfg.omega0))
        .collect();
    let secondary = (0..cfg.users * cfg.antennas)
        .map(|_| complex_gaussian(rng, cfg.omega_m))
        .collect();
    ChannelRealization {
        antennas: cfg.antennas,
        users: cfg.users,
        primary,
        secondary,
        estimated: None,
    }
}

/// Draws one realization where the receiver sees MMSE-style estimates with
/// error variance `sigma_e_sq`. The estimate `h_hat` is drawn with variance
/// `1 + sigma_e_sq`, and the true coefficient is
/// `h = h_hat / (1 + sigma_e_sq) + tilde` with `tilde` of variance
/// `sigma_e_sq / (1 + sigma_e_sq)`, which keeps `Var(h) = 1` and
/// `corr(h, h_hat) = 1 / sqrt(1 + sigma_e_sq)`. The calibration assumes unit
/// mean powers, so other configurations are rejected. With
/// `sigma_e_sq = 0` this delegates to [`sample_perfect`] and consumes the
/// identical random stream.
pub fn sample_imperfect<R: Rng>(
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    if cfg.sigma_e_sq == 0.0 {
        return Ok(sample_perfect(cfg, rng));
    }
    if cfg.omega0 != 1.0 || cfg.omega_m != 1.0 {
        return Err(ChannelError::UnitPowersRequired {
            omega0: cfg.omega0,
            omega_m: cfg.omega_m,
        });
    }
    let est_var = 1.0 + cfg.sigma_e_sq;
    let err_var = cfg.sigma_e_sq / est_var;
    let gain = 1.0 / est_var;
    let draw_pair = |rng: &mut R| {
        let est = complex_gaussian(rng, est_var);
        let tilde = complex_gaussian(rng, err_var);
        (gain * est + tilde, est)
    };
    let mut primary = Vec::with_capacity(cfg.antennas);
    let mut primary_est = Vec::with_capacity(cfg.antennas);
    for _ in 0..cfg.antennas {
        let (h, est) = draw_pair(rng);
        primary.push(h);
        primary_est.push(est);
    }
    let mut secondary = Vec::with_capacity(cfg.users * cfg.antennas);
    let mut secondary_est = Vec::with_capacity(cfg.users * cfg.antennas);
    for _ in 0..cfg.users * cfg.antennas {
        let (h, est) = draw_pair(rng);
        secondary.push(h);
        secondary_est.push(est);
    }
    Ok(ChannelRealization {
        antennas: cfg.antennas,
        users: cfg.users,
        primary,
        secondary,
        estimated: Some((primary_est, secondary_est)),
    })
}

/// RNG for one Monte Carlo trial: the master seed fixes the generator and
/// the trial index selects an independent stream, so any subset of trials
/// can be reproduced in any order on any number of workers.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
