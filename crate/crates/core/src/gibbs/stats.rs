//! Batch-means and replica-level error bars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BATCHES: usize = 32;
pub const MIN_BATCHES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Distance from `target` in units of the standard error.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean of independent draws.
pub fn iid(xs: &[f64]) -> Estimate {
    let n = xs.len();
    let m = mean(xs);
    let var = if n > 1 { xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    Estimate { n, mean: m, stderr: (var / n as f64).sqrt() }
}

/// Batch means over a correlated series, with `min(batches, n)` batches.
pub fn batch_means(xs: &[f64], batches: usize) -> Result<Estimate> {
    let b = batches.min(xs.len());
    if b < MIN_BATCHES {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot fill {MIN_BATCHES} batches",
            xs.len()
        )));
    }
    let size = xs.len() / b;
    let start = xs.len() - b * size;
    let bm: Vec<f64> = xs[start..].chunks(size).map(mean).collect();
    let e = iid(&bm);
    Ok(Estimate { n: xs.len(), mean: mean(xs), stderr: e.stderr })
}

/// Combine per-replica estimates: mean of means, error from their spread.
///
/// A single replica keeps its own within-chain error.
pub fn combine_replicas(per_replica: &[Estimate]) -> Estimate {
    let n = per_replica.iter().map(|e| e.n).sum();
    if per_replica.len() == 1 {
        return Estimate { n, ..per_replica[0] };
    }
    let means: Vec<f64> = per_replica.iter().map(|e| e.mean).collect();
    let e = iid(&means);
    Estimate { n, mean: e.mean, stderr: e.stderr }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant_series() {
        let e = batch_means(&[2.0; 100], 32).unwrap();
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n, 100);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert!(batch_means(&[1.0; 15], 32).is_err());
        assert!(batch_means(&[1.0; 16], 32).is_ok());
    }

    #[test]
    fn iid_error_of_alternating_series() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = iid(&xs);
        assert!(e.mean.abs() < 1e-12);
        assert!((e.stderr - (1000.0f64 / 999.0).sqrt() / 1000f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn replicas_use_spread_of_means() {
        let per = [
            Estimate { n: 10, mean: 1.0, stderr: 0.0 },
            Estimate { n: 10, mean: 3.0, stderr: 0.0 },
        ];
        let c = combine_replicas(&per);
        assert_eq!(c.n, 20);
        assert_eq!(c.mean, 2.0);
        assert!((c.stderr - 1.0).abs() < 1e-12);
    }
}
