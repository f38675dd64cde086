//! Closed-form constants from the makespan analysis of the two protocols.

use serde::Serialize;
use thiserror::Error;

use super::precision::Fixed;
use crate::protocol::ofa_delta_upper_bound;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("delta must be a positive finite number, got {0}")]
    InvalidDelta(f64),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("gamma is singular at delta = 2 (division by delta - 2)")]
    GammaSingular,
    #[error("M is singular at delta = {delta}: ln(delta) - 1 = {gap:e} (delta is e to working precision)")]
    MSingular { delta: f64, gap: f64 },
}

/// Relative gap between the double and extended evaluations of M above which
/// the double result is flagged.
pub const M_DIVERGENCE_WARNING: f64 = 1e-12;

/// `|ln δ − 1|` at or below this is treated as `δ = e`.
pub const M_SINGULARITY_GAP: f64 = 4.0 * f64::EPSILON;

/// Additive constant `C` of the One-fail Adaptive makespan bound
/// `2(δ+1)k + C·ln²(1+k)`, fitted once on an independent calibration campaign
/// (see `fit_additive_constant` and the `calibrate_ofa_constant` example;
/// fitted value 2.72 over 1200 trials at k = 10², 10³, 10⁴) and frozen.
pub const OFA_ADDITIVE_CONSTANT: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisQuantities {
    pub delta: f64,
    pub k: u64,
    /// Round threshold `300·δ·ln(1+k)`.
    pub tau: f64,
    /// `(δ−1)(3−δ)/(δ−2)`.
    pub gamma: f64,
    /// `2·Σ_{j=0..4} (5/6)^j · τ`.
    pub s_value: f64,
    /// M evaluated in 256-bit fixed point.
    pub m_value: f64,
    /// M evaluated directly in double precision.
    pub m_value_f64: f64,
    pub m_relative_divergence: f64,
    pub m_warning: Option<String>,
    /// `2(δ+1)k`.
    pub ofa_bound: f64,
    /// `4(1+1/δ)k`.
    pub ebobo_bound: f64,
    pub ofa_bound_ratio: f64,
    pub ebobo_bound_ratio: f64,
    /// Whether δ lies in One-fail Adaptive's admissible range.
    pub ofa_delta_in_range: bool,
    /// Whether δ lies in Exp Back-on/Back-off's admissible range.
    pub ebobo_delta_in_range: bool,
}

fn check(delta: f64, k: u64) -> Result<(), AnalysisError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(AnalysisError::InvalidDelta(delta));
    }
    if k == 0 {
        return Err(AnalysisError::InvalidK);
    }
    Ok(())
}

pub fn tau(delta: f64, k: u64) -> f64 {
    300.0 * delta * (k as f64).ln_1p()
}

pub fn gamma(delta: f64) -> Result<f64, AnalysisError> {
    if delta == 2.0 {
        return Err(AnalysisError::GammaSingular);
    }
    Ok((delta - 1.0) * (3.0 - delta) / (delta - 2.0))
}

/// `Σ_{j=0..4} (5/6)^j = 4651/1296`.
const SUB_ROUND_SUM_NUM: u64 = 4651;
const SUB_ROUND_SUM_DEN: u64 = 1296;

pub fn s_value(tau: f64) -> f64 {
    2.0 * (0..5).map(|j| (5.0f64 / 6.0).powi(j)).sum::<f64>() * tau
}

pub fn ofa_bound(delta: f64, k: u64) -> f64 {
    2.0 * (delta + 1.0) * k as f64
}

pub fn ebobo_bound(delta: f64, k: u64) -> f64 {
    4.0 * (1.0 + 1.0 / delta) * k as f64
}

/// `2(δ+1)k + c·ln²(1+k)`.
pub fn ofa_makespan_bound(delta: f64, k: u64, c: f64) -> f64 {
    ofa_bound(delta, k) + c * (k as f64).ln_1p().powi(2)
}

/// Smallest `C` such that every `(k, makespan)` sample satisfies
/// `makespan ≤ 2(δ+1)k + C·ln²(1+k)`; never negative.
pub fn fit_additive_constant(delta: f64, samples: &[(u64, u64)]) -> f64 {
    samples
        .iter()
        .map(|&(k, m)| (m as f64 - ofa_bound(delta, k)) / (k as f64).ln_1p().powi(2))
        .fold(0.0, f64::max)
}

struct ExtendedM {
    value: f64,
}

fn m_extended(delta: f64, k: u64) -> Result<ExtendedM, AnalysisError> {
    let d = Fixed::from_f64(delta);
    let one = Fixed::one();
    let ln_delta = d.ln().ok_or(AnalysisError::InvalidDelta(delta))?;
    let gap = &ln_delta - &one;
    if gap.abs().to_f64() <= M_SINGULARITY_GAP {
        return Err(AnalysisError::MSingular {
            delta,
            gap: gap.to_f64(),
        });
    }
    let two = Fixed::from_u64(2);
    let d_minus_two = &d - &two;
    if d_minus_two.is_zero() {
        return Err(AnalysisError::GammaSingular);
    }
    let gamma = &(&(&d - &one) * &(&Fixed::from_u64(3) - &d)) / &d_minus_two;
    let ln_k1 = Fixed::from_u64(k + 1).ln().expect("k + 1 > 0");
    let tau = &(&Fixed::from_u64(300) * &d) * &ln_k1;
    let s = &(&(&two * &Fixed::from_u64(SUB_ROUND_SUM_NUM)) * &tau) / &Fixed::from_u64(SUB_ROUND_SUM_DEN);
    let first = &(&(&(&d + &one) * &ln_delta) - &one) / &gap;
    let lead = &(&(&gamma + &(&two * &tau)) + &one) * &ln_delta;
    let second = &(&lead - &one) / &gap;
    let m = &(&first * &s) + &second;
    Ok(ExtendedM { value: m.to_f64() })
}

fn m_double(delta: f64, gamma: f64, tau: f64, s: f64) -> f64 {
    let l = delta.ln();
    ((delta + 1.0) * l - 1.0) / (l - 1.0) * s + ((gamma + 2.0 * tau + 1.0) * l - 1.0) / (l - 1.0)
}

/// All analysis constants for `(δ, k)`.
pub fn compute_quantities(delta: f64, k: u64) -> Result<AnalysisQuantities, AnalysisError> {
    check(delta, k)?;
    let gamma = gamma(delta)?;
    let tau = tau(delta, k);
    let s = s_value(tau);
    let m = m_extended(delta, k)?;
    let m_f64 = m_double(delta, gamma, tau, s);
    let divergence = ((m_f64 - m.value) / m.value).abs();
    let m_warning = (divergence > M_DIVERGENCE_WARNING).then(|| {
        format!("double-precision M differs from the extended value by {divergence:.3e} (relative)")
    });
    Ok(AnalysisQuantities {
        delta,
        k,
        tau,
        gamma,
        s_value: s,
        m_value: m.value,
        m_value_f64: m_f64,
        m_relative_divergence: divergence,
        m_warning,
        ofa_bound: ofa_bound(delta, k),
        ebobo_bound: ebobo_bound(delta, k),
        ofa_bound_ratio: 2.0 * (delta + 1.0),
        ebobo_bound_ratio: 4.0 * (1.0 + 1.0 / delta),
        ofa_delta_in_range: delta > std::f64::consts::E && delta <= ofa_delta_upper_bound(),
        ebobo_delta_in_range: delta > 0.0 && delta < 1.0 / std::f64::consts::E,
    })
}

/// Probability that exactly one of `kappa` nodes transmits when each does so
/// with probability `1/kappa_hat`.
pub fn success_probability(kappa: u64, kappa_hat: f64) -> f64 {
    let k = kappa as f64;
    (k / kappa_hat) * ((k - 1.0) * (-1.0 / kappa_hat).ln_1p()).exp()
}
