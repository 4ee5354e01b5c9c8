//! Summary statistics for MCMC output.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Plain sample variance (denominator `n - 1`, zero for `n < 2`).
    pub variance: f64,
    /// Batch-means Monte Carlo standard error of `mean`.
    pub se_mean: f64,
    /// Batch-means Monte Carlo standard error of `variance`.
    pub se_variance: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Batch-means standard error of the mean of a correlated series, using
/// `floor(sqrt(n))` batches of equal size (the tail remainder is dropped).
pub fn batch_means_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    let batches = (n as f64).sqrt().floor() as usize;
    if batches < 2 {
        return if n >= 2 {
            (variance(xs) / n as f64).sqrt()
        } else {
            0.0
        };
    }
    let size = n / batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .take(batches)
        .map(mean)
        .collect();
    (variance(&means) / batches as f64).sqrt()
}

pub fn moments(xs: &[f64]) -> Moments {
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    Moments {
        n: xs.len(),
        mean: m,
        variance: variance(xs),
        se_mean: batch_means_se(xs),
        se_variance: batch_means_se(&sq),
    }
}
