//! Small statistics helpers: two-sample Kolmogorov-Smirnov and moments.

use crate::{Error, Result};

/// Two-sample KS statistic: sup over the pooled sample of |F_a - F_b|.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Underpowered { min: 1, got: 0 });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.total_cmp(q));
    ys.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    Ok(d)
}

/// Rejection threshold used throughout: 1.95 * sqrt((n + m) / (n m)).
pub fn ks_critical(n: usize, m: usize) -> f64 {
    1.95 * (((n + m) as f64) / ((n * m) as f64)).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn se_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of the sample variance (normal-theory approximation
/// sqrt(2/(n-1)) * s^2 is too narrow for skewed data; use the fourth-moment
/// form).
pub fn se_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mu = mean(xs);
    let m2 = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mu).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).sqrt()
}

/// Standard error of a bernoulli proportion.
pub fn se_proportion(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ks_identical_samples_zero() {
        let xs: Vec<f64> = (0..500).map(|k| (k as f64).sin()).collect();
        assert_abs_diff_eq!(ks_statistic(&xs, &xs).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ks_disjoint_samples_one() {
        let a: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let b: Vec<f64> = (0..100).map(|k| 1_000.0 + k as f64).collect();
        assert_abs_diff_eq!(ks_statistic(&a, &b).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ks_known_small_case() {
        // F_a jumps at 1,2; F_b jumps at 1.5, 3 => sup|diff| = 1/2 at x in [2,3)
        let a = vec![1.0, 2.0];
        let b = vec![1.5, 3.0];
        assert_abs_diff_eq!(ks_statistic(&a, &b).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn ks_uniform_shift_detected() {
        let a: Vec<f64> = (0..2_000).map(|k| k as f64 / 2_000.0).collect();
        let b: Vec<f64> = (0..2_000).map(|k| 0.2 + k as f64 / 2_000.0).collect();
        let d = ks_statistic(&a, &b).unwrap();
        assert!((d - 0.2).abs() < 5e-3, "d = {d}");
        assert!(d > ks_critical(2_000, 2_000));
    }

    #[test]
    fn critical_value_pinned() {
        assert_abs_diff_eq!(ks_critical(2_000, 2_000), 1.95 * (2.0f64 / 2_000.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn moments_on_known_data() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(mean(&xs), 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(variance(&xs), 5.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(se_mean(&xs), (5.0f64 / 12.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(se_proportion(0.5, 100), 0.05, epsilon = 1e-15);
    }
}
