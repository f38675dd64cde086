//! Balls-in-bins Monte Carlo for the singleton-count concentration argument.

use rand::{Rng, RngExt};

use crate::protocol::ParamError;

/// Drops `m` balls uniformly into `w` bins and counts bins holding exactly one.
pub fn balls_in_bins_singletons<R: Rng + ?Sized>(m: u64, w: u64, rng: &mut R) -> u64 {
    assert!(m >= 1 && w >= 1, "need at least one ball and one bin");
    let mut load = vec![0u8; w as usize];
    for _ in 0..m {
        let b = rng.random_range(0..w) as usize;
        load[b] = load[b].saturating_add(1);
    }
    load.iter().filter(|&&c| c == 1).count() as u64
}

/// `m·(1 − 1/w)^(m−1)`, the expected number of singleton bins.
pub fn expected_singletons(m: u64, w: u64) -> f64 {
    m as f64 * ((m - 1) as f64 * (-1.0 / w as f64).ln_1p()).exp()
}

/// Fraction of `samples` experiments with fewer than `delta·m` singletons.
pub fn singleton_tail_estimate<R: Rng + ?Sized>(
    m: u64,
    w: u64,
    delta: f64,
    samples: u64,
    rng: &mut R,
) -> Result<f64, ParamError> {
    if !(delta > 0.0 && delta < 1.0 / std::f64::consts::E) {
        return Err(ParamError::EboboDelta { delta });
    }
    if m == 0 || m > w {
        return Err(ParamError::Invalid(format!("need 1 <= m <= w, got m={m}, w={w}")));
    }
    if samples == 0 {
        return Err(ParamError::Invalid("samples must be positive".into()));
    }
    let threshold = delta * m as f64;
    let low = (0..samples)
        .filter(|_| (balls_in_bins_singletons(m, w, rng) as f64) < threshold)
        .count();
    Ok(low as f64 / samples as f64)
}
