use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Binomial proportion with a two-sided normal-approximation confidence
/// interval (continuity corrected, clamped to `[0, 1]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(successes: usize, trials: usize, confidence: f64) -> Self {
        let (ci_low, ci_high) = binomial_ci(successes, trials, confidence);
        Proportion {
            successes,
            trials,
            rate: if trials == 0 {
                0.0
            } else {
                successes as f64 / trials as f64
            },
            ci_low,
            ci_high,
        }
    }
}

pub fn binomial_ci(successes: usize, trials: usize, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = standard_normal().inverse_cdf(0.5 + confidence / 2.0);
    let half = z * (p * (1.0 - p) / n).sqrt() + 0.5 / n;
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// One-sided p-value for `H1: p1 > p2` from the pooled two-proportion z-test.
pub fn one_sided_two_proportion(s1: usize, n1: usize, s2: usize, n2: usize) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 1.0;
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let p1 = s1 as f64 / a;
    let p2 = s2 as f64 / b;
    let pooled = (s1 + s2) as f64 / (a + b);
    let se = (pooled * (1.0 - pooled) * (1.0 / a + 1.0 / b)).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    1.0 - standard_normal().cdf((p1 - p2) / se)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: u64,
    /// Exclusive upper edge.
    pub hi: u64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: u64,
    pub max: u64,
    /// Power-of-two bins `[0,1), [1,2), [2,4), ...`; empty bins omitted.
    pub histogram: Vec<HistogramBin>,
}

impl QueryStats {
    pub fn from_samples(samples: &[u64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
        };
        let mut histogram: Vec<HistogramBin> = Vec::new();
        for &q in &sorted {
            let (lo, hi) = if q == 0 {
                (0, 1)
            } else {
                let lo = 1u64 << (63 - q.leading_zeros());
                (lo, lo.saturating_mul(2))
            };
            match histogram.last_mut() {
                Some(b) if b.lo == lo => b.count += 1,
                _ => histogram.push(HistogramBin { lo, hi, count: 1 }),
            }
        }
        Some(QueryStats {
            count: n,
            mean: sorted.iter().map(|&q| q as f64).sum::<f64>() / n as f64,
            median,
            min: sorted[0],
            max: sorted[n - 1],
            histogram,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_contains_rate() {
        let (lo, hi) = binomial_ci(30, 100, 0.95);
        assert!(lo < 0.3 && 0.3 < hi);
        // 1.96 * sqrt(0.21 / 100) + 0.005
        assert!((hi - 0.3 - 0.094_819_3).abs() < 1e-4);
        assert_eq!(binomial_ci(0, 0, 0.95), (0.0, 1.0));
    }

    #[test]
    fn z_test_direction() {
        assert!(one_sided_two_proportion(80, 100, 50, 100) < 1e-4);
        assert!(one_sided_two_proportion(50, 100, 80, 100) > 0.99);
        assert_eq!(one_sided_two_proportion(0, 10, 0, 10), 1.0);
    }

    #[test]
    fn histogram_bins() {
        let s = QueryStats::from_samples(&[0, 1, 3, 3, 9]).unwrap();
        assert_eq!(s.median, 3.0);
        let bins: Vec<(u64, usize)> = s.histogram.iter().map(|b| (b.lo, b.count)).collect();
        assert_eq!(bins, vec![(0, 1), (1, 1), (2, 2), (8, 1)]);
        assert!(QueryStats::from_samples(&[]).is_none());
    }
}
