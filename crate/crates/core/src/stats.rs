//! Success-probability estimates, significance, and block histograms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessStats {
    pub n: u64,
    pub successes: u64,
    pub p_hat: f64,
    /// Wald binomial standard error `sqrt(p (1 - p) / n)`.
    pub sigma: f64,
}

impl SuccessStats {
    pub fn from_counts(successes: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRecords);
        }
        if successes > n {
            return Err(Error::InvalidParameter {
                name: "successes",
                value: successes as f64,
                reason: "cannot exceed the number of runs",
            });
        }
        let p_hat = successes as f64 / n as f64;
        Ok(SuccessStats {
            n,
            successes,
            p_hat,
            sigma: binomial_sigma(p_hat, n),
        })
    }

    /// Wilson score interval at `z` standard deviations.
    pub fn wilson_interval(&self, z: f64) -> (f64, f64) {
        let n = self.n as f64;
        let p = self.p_hat;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        (centre - half, centre + half)
    }
}

pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Statistics over the given (accepted) runs; success means
/// `answer == truth`.
pub fn success_stats<'a, I>(records: I) -> Result<SuccessStats>
where
    I: IntoIterator<Item = &'a RunRecord>,
{
    let (n, successes) = records.into_iter().fold((0u64, 0u64), |(n, s), r| {
        (n + 1, s + u64::from(r.correct()))
    });
    SuccessStats::from_counts(successes, n)
}

/// `(p_hat - classical_p) / sigma`.
pub fn sigma_violation(stats: &SuccessStats, classical_p: f64) -> Result<f64> {
    if stats.sigma <= 0.0 {
        return Err(Error::ZeroSigma);
    }
    Ok((stats.p_hat - classical_p) / stats.sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub block_size: usize,
    /// Success fraction of each block, in run order.
    pub block_fractions: Vec<f64>,
}

impl Histogram {
    pub fn blocks(&self) -> usize {
        self.block_fractions.len()
    }

    pub fn mean(&self) -> f64 {
        self.block_fractions.iter().sum::<f64>() / self.blocks() as f64
    }

    /// Sample standard deviation of the block fractions; zero for one block.
    pub fn spread(&self) -> f64 {
        let k = self.blocks();
        if k < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.block_fractions.iter().map(|f| (f - m).powi(2)).sum();
        (ss / (k - 1) as f64).sqrt()
    }
}

/// Split the runs into consecutive blocks of `block_size` (a trailing
/// partial block is dropped), and bin each block's success fraction on a
/// grid of width `bin_width` over `[0, 1]`. The last bin is closed so that
/// a fraction of exactly 1 is counted.
pub fn block_histogram<'a, I>(records: I, block_size: usize, bin_width: f64) -> Result<Histogram>
where
    I: IntoIterator<Item = &'a RunRecord>,
{
    let outcomes: Vec<bool> = records.into_iter().map(RunRecord::correct).collect();
    block_histogram_outcomes(&outcomes, block_size, bin_width)
}

pub fn block_histogram_outcomes(
    outcomes: &[bool],
    block_size: usize,
    bin_width: f64,
) -> Result<Histogram> {
    if block_size == 0 {
        return Err(Error::InvalidParameter {
            name: "block_size",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "bin_width",
            value: bin_width,
            reason: "must lie in (0, 1]",
        });
    }
    if outcomes.len() < block_size {
        return Err(Error::NotEnoughRecords {
            n: outcomes.len(),
            block_size,
        });
    }
    let bins = (1.0 / bin_width - 1e-9).ceil() as usize;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| (i as f64 * bin_width).min(1.0))
        .collect();
    let block_fractions: Vec<f64> = outcomes
        .chunks_exact(block_size)
        .map(|b| b.iter().filter(|&&c| c).count() as f64 / block_size as f64)
        .collect();
    let mut counts = vec![0u64; bins];
    for &f in &block_fractions {
        let i = ((f / bin_width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram {
        bin_edges,
        counts,
        block_size,
        block_fractions,
    })
}
