//! Small statistical helpers shared across modules.

use statrs::distribution::{ContinuousCDF, Normal};

/// Sample mean and standard error of the mean.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    assert!(n >= 2, "need at least two samples");
    let sum: f64 = samples.iter().sum();
    let mean = sum / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = (ss / (n - 1) as f64).max(0.0);
    (mean, (var / n as f64).sqrt())
}

/// Mean and SE from accumulated `sum` and `sum of squares` over `n` draws.
pub fn mean_se_from_sums(sum: f64, sumsq: f64, n: usize) -> (f64, f64) {
    debug_assert!(n >= 2);
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Median; `NaN`-free input assumed, infinities allowed (censored mass).
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Harmonic number `H_d = sum_{i=1..d} 1/i`.
pub fn harmonic(d: usize) -> f64 {
    (1..=d).map(|i| 1.0 / i as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-12);
        // sd = sqrt(5/3), se = sd/2
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);

        let (m2, se2) = mean_se_from_sums(10.0, 30.0, 4);
        assert!((m - m2).abs() < 1e-12);
        assert!((se - se2).abs() < 1e-12);
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[1.0, f64::INFINITY, 2.0]), 2.0);
    }

    #[test]
    fn normal_cdf_quantile_roundtrip() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-12);
        assert!((norm_quantile(0.75) - 0.6744897501960817).abs() < 1e-9);
        for p in [0.1, 0.25, 0.5, 0.9] {
            assert!((norm_cdf(norm_quantile(p)) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(2) - 1.5).abs() < 1e-15);
        assert!((harmonic(10) - 2.9289682539682538).abs() < 1e-12);
    }
}
