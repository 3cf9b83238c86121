//! Closed-form outage expressions and their quadrature cross-checks.
//!
//! Conventions: X is a scaled primary gain `snr * |h0|^2`, exponential with
//! mean `omega0_scaled`; Y is a scaled secondary gain with mean
//! `omega_m_scaled`; a secondary gain is *admissible* when it reaches
//! `gamma_s`. Every expression here is the exact probability of a selection
//! event under perfect CSI, written as a finite sum of exponentials; each
//! integral-derived term has a twin in [`quadrature_oracle`] that evaluates
//! the same event by adaptive quadrature over first-principles densities, so
//! the two independent routes can be compared to tight tolerances.
//!
//! Alternating binomial sums are assembled in log space and accumulated with
//! compensated summation. They are validated for user/antenna products up to
//! [`MAX_POOL`]; larger systems are rejected rather than returning quietly
//! degraded results.

use crate::model::SystemConfig;
use crate::quadrature::{self, QuadratureError};
use thiserror::Error;

/// Largest `antennas * users` product the alternating sums are validated
/// for. Beyond this the binomial terms grow enough that cancellation can eat
/// into the guaranteed digits.
pub const MAX_POOL: usize = 64;

/// Default absolute tolerance of the quadrature oracle.
pub const ORACLE_ABS_TOL: f64 = 1e-12;

// Results may stray outside [0,1] by accumulated rounding of this size;
// anything worse is a defect and is surfaced, never clamped away.
const UNIT_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("antenna and user counts must be at least 1")]
    EmptySystem,
    #[error("closed forms are validated for antennas*users <= 64, got {0}")]
    PoolTooLarge(usize),
    #[error("scaled mean channel power must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("SINR threshold must be positive and finite, got {0}")]
    BadThreshold(f64),
    #[error("closed forms assume perfect CSI, configuration has sigma_e_sq = {0}")]
    PerfectCsiOnly(f64),
    #[error("expression applies to single-antenna systems, got {0} antennas")]
    SingleAntennaOnly(usize),
    #[error("result {0} fell outside [0, 1] beyond the numerical guard")]
    OutOfRange(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// System parameters reduced to what the closed forms depend on: the
/// SNR-scaled mean channel powers and the two SINR thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledParams {
    pub antennas: usize,
    pub users: usize,
    /// Mean of a scaled primary gain, `snr * omega0`.
    pub omega0_scaled: f64,
    /// Mean of a scaled secondary gain, `snr * omega_m`.
    pub omega_m_scaled: f64,
    pub gamma0: f64,
    pub gamma_s: f64,
}

impl ScaledParams {
    pub fn new(
        antennas: usize,
        users: usize,
        omega0_scaled: f64,
        omega_m_scaled: f64,
        gamma0: f64,
        gamma_s: f64,
    ) -> Result<Self, AnalyticError> {
        if antennas == 0 || users == 0 {
            return Err(AnalyticError::EmptySystem);
        }
        if antennas * users > MAX_POOL {
            return Err(AnalyticError::PoolTooLarge(antennas * users));
        }
        for scale in [omega0_scaled, omega_m_scaled] {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(AnalyticError::BadScale(scale));
            }
        }
        for th in [gamma0, gamma_s] {
            if !(th > 0.0 && th.is_finite()) {
                return Err(AnalyticError::BadThreshold(th));
            }
        }
        Ok(Self {
            antennas,
            users,
            omega0_scaled,
            omega_m_scaled,
            gamma0,
            gamma_s,
        })
    }

    /// The closed forms model perfect CSI, so configurations with a nonzero
    /// estimation error variance are rejected here.
    pub fn from_config(cfg: &SystemConfig) -> Result<Self, AnalyticError> {
        if cfg.sigma_e_sq != 0.0 {
            return Err(AnalyticError::PerfectCsiOnly(cfg.sigma_e_sq));
        }
        let snr = cfg.snr_linear();
        let th = cfg.thresholds();
        Self::new(
            cfg.antennas,
            cfg.users,
            snr * cfg.omega0,
            snr * cfg.omega_m,
            th.gamma0,
            th.gamma_s,
        )
    }

    /// Probability that a single secondary gain misses the admission
    /// threshold, `1 - exp(-gamma_s / omega_m_scaled)`.
    pub fn ineligibility(&self) -> f64 {
        -(-self.gamma_s / self.omega_m_scaled).exp_m1()
    }
}

// ---------------------------------------------------------------------
// numeric helpers
// ---------------------------------------------------------------------

/// Neumaier's compensated accumulator, so alternating binomial terms cancel
/// without picking up summation-order error on top of the intrinsic loss.
#[derive(Debug, Default, Clone)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 0.0;
    for i in 1..=k {
        acc += ((n - k + i) as f64).ln() - (i as f64).ln();
    }
    acc
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut v = 1.0;
    for i in 1..=k {
        v = v * (n - k + i) as f64 / i as f64;
    }
    v
}

fn guard_unit(v: f64) -> Result<f64, AnalyticError> {
    if !(v >= -UNIT_GUARD && v <= 1.0 + UNIT_GUARD) {
        return Err(AnalyticError::OutOfRange(v));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Coefficients of `(1 - e^{-t})^k` as a mix of `e^{-a t}` terms:
/// `(-1)^a C(k, a)` for `a = 0..=k`.
fn cdf_power_weights(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|a| {
            let c = binomial_f64(k, a);
            if a % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

/// Integral over `[gamma_s, inf)` of `sum_a weights[a] *
/// exp(-a*gamma0*(1+y)/omega0_scaled)` against the defective density of the
/// minimum admissible gain among `pool` iid secondary gains. That density is
/// `(pool/om) e^{-y/om} (A + e^{-y/om})^{pool-1}` with `A` the per-gain
/// ineligibility, total mass `1 - A^pool`; each term collapses to an
/// elementary exponential integral. Terms are built in log space.
fn min_eligible_mix_integral(p: &ScaledParams, pool: usize, weights: &[f64]) -> f64 {
    if pool == 0 {
        return 0.0;
    }
    let miss = p.ineligibility();
    let ln_miss = miss.ln();
    let c0 = p.gamma0 / p.omega0_scaled;
    let ln_rate = (pool as f64 / p.omega_m_scaled).ln();
    let mut acc = Neumaier::default();
    for (a, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let ln_w = w.abs().ln();
        let sign = w.signum();
        for d in 0..pool {
            let excess = (pool - 1 - d) as f64;
            if excess > 0.0 && miss == 0.0 {
                continue;
            }
            let s = a as f64 * c0 + (d as f64 + 1.0) / p.omega_m_scaled;
            let ln_mag = ln_w + ln_rate + ln_binomial(pool - 1, d) + excess * ln_miss
                - a as f64 * c0
                - p.gamma_s * s
                - s.ln();
            acc.add(sign * ln_mag.exp());
        }
    }
    acc.value()
}

// ---------------------------------------------------------------------
// admission-stage probabilities
// ---------------------------------------------------------------------

/// Probability that no secondary user at any antenna meets the admission
/// threshold, `A^(M*K)`: the pre-selection outage event shared by both
/// joint selection strategies.
pub fn prob_no_eligible_pair(p: &ScaledParams) -> f64 {
    p.ineligibility().powi((p.users * p.antennas) as i32)
}

/// Probability that no secondary user at one fixed antenna meets the
/// admission threshold, `A^M`. Because secondary gains are independent of
/// the primary gains that pick the strongest antenna, this is also the
/// probability that the suboptimal strategy must leave its preferred
/// antenna.
pub fn prob_no_eligible_at_antenna(p: &ScaledParams) -> f64 {
    p.ineligibility().powi(p.users as i32)
}

// ---------------------------------------------------------------------
// suboptimal joint selection
// ---------------------------------------------------------------------

fn sic_fail_at_best_antenna_raw(p: &ScaledParams) -> f64 {
    min_eligible_mix_integral(p, p.users, &cdf_power_weights(p.antennas))
}

fn sic_fail_pooled_min_raw(p: &ScaledParams) -> f64 {
    min_eligible_mix_integral(p, p.users * p.antennas, &[1.0, -1.0])
}

fn sic_fail_fallback_raw(p: &ScaledParams) -> f64 {
    let k = p.antennas;
    if k == 1 {
        // With one antenna an admissible user anywhere is an admissible user
        // at the preferred antenna, so the fallback stage is unreachable.
        return 0.0;
    }
    let pool = p.users * (k - 1);
    // CDF of a primary gain conditioned on not being the argmax of K iid
    // gains: [K F(t) - F(t)^K]/(K-1), a mix with weight 1 at a = 0, weight 0
    // at a = 1 and -(-1)^a C(K,a)/(K-1) for a >= 2.
    let mut weights = vec![0.0; k + 1];
    weights[0] = 1.0;
    for (a, w) in weights.iter_mut().enumerate().skip(2) {
        let c = binomial_f64(k, a) / (k as f64 - 1.0);
        *w = if a % 2 == 0 { -c } else { c };
    }
    prob_no_eligible_at_antenna(p) * min_eligible_mix_integral(p, pool, &weights)
}

/// Joint probability that at least one secondary user is admissible at the
/// strongest primary antenna and the primary's SIC decoding fails there:
/// `int_{gamma_s}^inf F(gamma0(1+y))^K f_min,M(y) dy`, with `F` the primary
/// gain CDF and `f_min,M` the defective minimum-admissible-gain density of
/// the antenna's M users.
pub fn prob_sic_fail_at_best_antenna(p: &ScaledParams) -> Result<f64, AnalyticError> {
    guard_unit(sic_fail_at_best_antenna_raw(p))
}

/// Simplified fallback-stage model: the interferer is taken as the minimum
/// admissible gain pooled over all `M*K` channels and the primary gain at
/// the fallback antenna as a fresh exponential,
/// `int_{gamma_s}^inf F(gamma0(1+y)) f_min,MK(y) dy`. This is a component of
/// [`outage_suboptimal_approx`], not of the exact composition; see
/// [`prob_sic_fail_fallback`] for the event it approximates.
pub fn prob_sic_fail_pooled_min(p: &ScaledParams) -> Result<f64, AnalyticError> {
    guard_unit(sic_fail_pooled_min_raw(p))
}

/// Exact fallback-stage outage probability: no admissible user at the
/// strongest antenna, at least one admissible user elsewhere, and SIC fails
/// at the pair the fallback search picks. Conditioned on not carrying the
/// maximum of K iid primary gains, the fallback antenna's primary gain has
/// CDF `[K F(t) - F(t)^K]/(K-1)`, and the interferer is the minimum
/// admissible gain among the other antennas' `M(K-1)` channels. Zero for
/// `K = 1`, where the stage is unreachable.
pub fn prob_sic_fail_fallback(p: &ScaledParams) -> Result<f64, AnalyticError> {
    guard_unit(sic_fail_fallback_raw(p))
}

/// Exact outage probability of the suboptimal joint selection strategy
/// under perfect CSI. The three contributing events are disjoint by
/// construction (no admissible pair anywhere; admission at the strongest
/// antenna but SIC failure there; fallback admission but SIC failure
/// there), so their probabilities add.
pub fn outage_suboptimal_closed(p: &ScaledParams) -> Result<f64, AnalyticError> {
    guard_unit(
        prob_no_eligible_pair(p) + sic_fail_at_best_antenna_raw(p) + sic_fail_fallback_raw(p),
    )
}

/// Staged composition `J1 + (1-J1)[(1-J2) J3 + J2 J4]` that treats the
/// admission stages as mutually independent even though the component
/// integrals already carry their stage masses. It converges to the exact
/// composition at high SNR (all stage masses vanish) and is biased low
/// elsewhere; it is retained because the factored arrangement here and the
/// single-expression arrangement in
/// [`outage_suboptimal_approx_expanded`] provide a digit-level transcription
/// cross-check of the underlying sums.
pub fn outage_suboptimal_approx(p: &ScaledParams) -> Result<f64, AnalyticError> {
    let j1 = prob_no_eligible_pair(p);
    let j2 = prob_no_eligible_at_antenna(p);
    let j3 = sic_fail_at_best_antenna_raw(p);
    let j4 = sic_fail_pooled_min_raw(p);
    guard_unit(j1 + (1.0 - j1) * ((1.0 - j2) * j3 + j2 * j4))
}

/// Fully expanded single-expression form of [`outage_suboptimal_approx`],
/// transcribed independently (plain products, no log-space assembly, no
/// shared helpers) so the two arrangements can be compared digit for digit.
pub fn outage_suboptimal_approx_expanded(p: &ScaledParams) -> Result<f64, AnalyticError> {
    let (k, m) = (p.antennas, p.users);
    let (om0, omm) = (p.omega0_scaled, p.omega_m_scaled);
    let (g0, gs) = (p.gamma0, p.gamma_s);
    let a_miss = 1.0 - (-gs / omm).exp();
    let j1 = a_miss.powi((m * k) as i32);
    let j2 = a_miss.powi(m as i32);

    let mut j3 = 0.0;
    for a in 0..=k {
        for b in 0..m {
            let s = a as f64 * g0 / om0 + (b + 1) as f64 / omm;
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            j3 += sign
                * binomial_f64(k, a)
                * binomial_f64(m - 1, b)
                * a_miss.powi((m - 1 - b) as i32)
                * (-(a as f64) * g0 / om0).exp()
                * (-gs * s).exp()
                / s;
        }
    }
    j3 *= m as f64 / omm;

    let n = m * k;
    let mut j4 = 0.0;
    for c in 0..2usize {
        for d in 0..n {
            let s = c as f64 * g0 / om0 + (d + 1) as f64 / omm;
            let sign = if c == 0 { 1.0 } else { -1.0 };
            j4 += sign
                * binomial_f64(n - 1, d)
                * a_miss.powi((n - 1 - d) as i32)
                * (-(c as f64) * g0 / om0).exp()
                * (-gs * s).exp()
                / s;
        }
    }
    j4 *= n as f64 / omm;

    guard_unit(j1 + (1.0 - j1) * ((1.0 - j2) * j3 + j2 * j4))
}

// ---------------------------------------------------------------------
// single-antenna min-gain baseline
// ---------------------------------------------------------------------

fn single_antenna_only(p: &ScaledParams) -> Result<(), AnalyticError> {
    if p.antennas != 1 {
        return Err(AnalyticError::SingleAntennaOnly(p.antennas));
    }
    Ok(())
}

/// `int_L^inf e^{-y*gamma0/omega0} f_Y1(y) dy` for the minimum `Y1` of M iid
/// secondary gains; `Y1` is itself exponential with rate `M/omega_m`, so the
/// integral is elementary.
fn min_gain_laplace_tail(p: &ScaledParams, lower: f64) -> f64 {
    let rate = p.users as f64 / p.omega_m_scaled + p.gamma0 / p.omega0_scaled;
    (p.users as f64 / p.omega_m_scaled) * (-lower * rate).exp() / rate
}

/// First-stage outage of the single-antenna min-gain baseline: the primary's
/// SIC decoding fails under interference from the weakest of M secondary
/// users. Order-statistics double-sum form,
/// `1 - (M/om_m) e^{-gamma0/om_0} sum_s sum_p (-1)^{s+p} C(M-1,s) C(s,p) /
/// ((p+1)/om_m + gamma0/om_0)`;
/// the sum telescopes to the elementary `min_gain_laplace_tail(0)`, which
/// the unit tests assert as an identity.
pub fn prob_sic_fail_min_gain(p: &ScaledParams) -> Result<f64, AnalyticError> {
    single_antenna_only(p)?;
    let m = p.users;
    let c0 = p.gamma0 / p.omega0_scaled;
    let mut acc = Neumaier::default();
    for s in 0..m {
        for q in 0..=s {
            let rate = (q as f64 + 1.0) / p.omega_m_scaled + c0;
            let ln_mag = ln_binomial(m - 1, s) + ln_binomial(s, q) - rate.ln();
            let sign = if (s + q) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(sign * ln_mag.exp());
        }
    }
    let integral = (m as f64 / p.omega_m_scaled) * acc.value();
    guard_unit(1.0 - (-c0).exp() * integral)
}

/// Second-stage outage of the min-gain baseline: the primary decodes but the
/// weakest secondary gain misses the admission threshold. SIC success and a
/// small minimum are positively coupled through `Y1`, so this is the joint
/// `int_0^{gamma_s} (1 - F(gamma0(1+y))) f_Y1(y) dy =
/// e^{-gamma0/om_0} [I(0) - I(gamma_s)]`, not a product of marginals.
pub fn prob_rate_fail_min_gain(p: &ScaledParams) -> Result<f64, AnalyticError> {
    single_antenna_only(p)?;
    let c0 = p.gamma0 / p.omega0_scaled;
    guard_unit((-c0).exp() * (min_gain_laplace_tail(p, 0.0) - min_gain_laplace_tail(p, p.gamma_s)))
}

/// Outage probability of the single-antenna min-gain baseline: the two stage
/// events are disjoint, so their probabilities add.
pub fn outage_min_gain_closed(p: &ScaledParams) -> Result<f64, AnalyticError> {
    guard_unit(prob_sic_fail_min_gain(p)? + prob_rate_fail_min_gain(p)?)
}

// ---------------------------------------------------------------------
// quadrature oracle
// ---------------------------------------------------------------------

/// Events the quadrature oracle can evaluate. Each integrand is built
/// pointwise from first-principles CDFs and densities and shares no algebra
/// with the sum forms above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleIntegrand {
    /// Twin of [`prob_sic_fail_at_best_antenna`].
    SicFailAtBestAntenna,
    /// Twin of [`prob_sic_fail_pooled_min`].
    SicFailPooledMin,
    /// Twin of [`prob_sic_fail_fallback`].
    SicFailFallback,
    /// Twin of [`prob_sic_fail_min_gain`].
    SicFailMinGain,
    /// Twin of [`prob_rate_fail_min_gain`].
    RateFailMinGain,
}

/// Evaluates the selected event by adaptive quadrature at the default
/// tolerance [`ORACLE_ABS_TOL`].
pub fn quadrature_oracle(which: OracleIntegrand, p: &ScaledParams) -> Result<f64, AnalyticError> {
    quadrature_oracle_with_tol(which, p, ORACLE_ABS_TOL)
}

/// Evaluates the selected event by adaptive quadrature to a caller-chosen
/// absolute tolerance.
pub fn quadrature_oracle_with_tol(
    which: OracleIntegrand,
    p: &ScaledParams,
    abs_tol: f64,
) -> Result<f64, AnalyticError> {
    let (k, m) = (p.antennas, p.users);
    let (om0, omm) = (p.omega0_scaled, p.omega_m_scaled);
    let (g0, gs) = (p.gamma0, p.gamma_s);
    // Primary gain CDF and the defective density of the minimum admissible
    // gain among `pool` secondary gains, both written out directly.
    let f_x = move |t: f64| -(-t / om0).exp_m1();
    let miss = -(-gs / omm).exp_m1();
    let min_elig = move |y: f64, pool: usize| {
        (pool as f64 / omm) * (-y / omm).exp() * (miss + (-y / omm).exp()).powi(pool as i32 - 1)
    };

    let v = match which {
        OracleIntegrand::SicFailAtBestAntenna => quadrature::integrate_to_infinity(
            &|y| f_x(g0 * (1.0 + y)).powi(k as i32) * min_elig(y, m),
            gs,
            abs_tol,
        )?,
        OracleIntegrand::SicFailPooledMin => quadrature::integrate_to_infinity(
            &|y| f_x(g0 * (1.0 + y)) * min_elig(y, m * k),
            gs,
            abs_tol,
        )?,
        OracleIntegrand::SicFailFallback => {
            if k == 1 {
                0.0
            } else {
                let non_max_cdf =
                    move |t: f64| (k as f64 * f_x(t) - f_x(t).powi(k as i32)) / (k as f64 - 1.0);
                let tail = quadrature::integrate_to_infinity(
                    &|y| non_max_cdf(g0 * (1.0 + y)) * min_elig(y, m * (k - 1)),
                    gs,
                    abs_tol,
                )?;
                miss.powi(m as i32) * tail
            }
        }
        OracleIntegrand::SicFailMinGain => {
            single_antenna_only(p)?;
            // density of the minimum of M iid exponentials, written as the
            // order statistic M f (1-F)^(M-1)
            let f_y1 = move |y: f64| {
                (m as f64 / omm) * (-y / omm).exp() * (-y / omm).exp().powi(m as i32 - 1)
            };
            quadrature::integrate_to_infinity(&|y| f_x(g0 * (1.0 + y)) * f_y1(y), 0.0, abs_tol)?
        }
        OracleIntegrand::RateFailMinGain => {
            single_antenna_only(p)?;
            let f_y1 = move |y: f64| {
                (m as f64 / omm) * (-y / omm).exp() * (-y / omm).exp().powi(m as i32 - 1)
            };
            quadrature::integrate(&|y| (1.0 - f_x(g0 * (1.0 + y))) * f_y1(y), 0.0, gs, abs_tol)?
        }
    };
    guard_unit(v)
}
