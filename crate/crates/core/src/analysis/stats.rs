//! Sample statistics and the two-sample Kolmogorov–Smirnov test.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    /// Largest gap between the two empirical CDFs.
    pub statistic: f64,
    /// Asymptotic p-value of the statistic.
    pub p_value: f64,
}

impl KsResult {
    /// True when equality is rejected at significance `alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn standard_error(xs: &[f64]) -> f64 {
    std_dev(xs) / (xs.len() as f64).sqrt()
}

/// Kolmogorov distribution tail `Q(λ) = 2 Σ (−1)^{j−1} e^{−2j²λ²}`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let a2 = -2.0 * lambda * lambda;
    let mut sign = 2.0;
    let mut sum = 0.0;
    let mut prev = 0.0f64;
    for j in 1..=100 {
        let term = sign * (a2 * (j * j) as f64).exp();
        sum += term;
        if term.abs() <= 1e-10 * prev || term.abs() <= 1e-16 * sum {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
        prev = term.abs();
    }
    1.0
}

/// Two-sample Kolmogorov–Smirnov test. Ties are handled by stepping past every
/// copy of a value before comparing the CDFs.
pub fn ks_two_sample(a: &[u64], b: &[u64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "samples must be non-empty");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_tail((en + 0.12 + 0.11 / en) * d),
    }
}
