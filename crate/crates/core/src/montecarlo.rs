//! Seeded, worker-partitioned Monte Carlo driver.
//!
//! A run of `n` samples is split across `workers` independent ChaCha8
//! streams (stream index = worker index) and the per-worker moments are
//! merged in worker order with the pairwise update of Chan et al. A given
//! `(seed, n, workers)` triple therefore always reproduces the same
//! estimate bit for bit, regardless of how rayon schedules the workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type StreamRng = ChaCha8Rng;

/// Smallest sample count accepted by the capacity estimators.
pub const MIN_SAMPLES: usize = 1_000;

pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// RNG for one worker stream of a seeded run.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Sampling {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Sampling {
            n_samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, min_samples: usize) -> Result<()> {
        if self.n_samples < min_samples {
            return Err(Error::param(
                "n_samples",
                format!("need at least {min_samples}, got {}", self.n_samples),
            ));
        }
        if self.workers == 0 || self.workers > self.n_samples {
            return Err(Error::param(
                "workers",
                format!("must be in 1..={}, got {}", self.n_samples, self.workers),
            ));
        }
        Ok(())
    }

    /// Number of samples handled by `worker`.
    pub fn share(&self, worker: usize) -> usize {
        let base = self.n_samples / self.workers;
        base + usize::from(worker < self.n_samples % self.workers)
    }
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::new(DEFAULT_SAMPLES, 0)
    }
}

/// Running mean and second central moment (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n_a = self.count as f64;
        let n_b = other.count as f64;
        let n = n_a + n_b;
        let delta = other.mean - self.mean;
        self.mean += delta * n_b / n;
        self.m2 += other.m2 + delta * delta * n_a * n_b / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Moments of two paired statistics and of their difference `b - a`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairedAccumulator {
    pub first: Accumulator,
    pub second: Accumulator,
    pub difference: Accumulator,
}

impl PairedAccumulator {
    pub fn push(&mut self, a: f64, b: f64) {
        self.first.push(a);
        self.second.push(b);
        self.difference.push(b - a);
    }

    pub fn merge(&mut self, other: &PairedAccumulator) {
        self.first.merge(&other.first);
        self.second.merge(&other.second);
        self.difference.merge(&other.difference);
    }
}

/// Runs `sample` once per draw on every worker stream and pools the moments.
pub fn run<F>(sampling: &Sampling, sample: F) -> Accumulator
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let parts: Vec<Accumulator> = (0..sampling.workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream_rng(sampling.seed, w as u64);
            let mut acc = Accumulator::default();
            for _ in 0..sampling.share(w) {
                acc.push(sample(&mut rng));
            }
            acc
        })
        .collect();
    parts.iter().fold(Accumulator::default(), |mut total, p| {
        total.merge(p);
        total
    })
}

/// Paired variant of [`run`]: both statistics come from the same draw.
pub fn run_paired<F>(sampling: &Sampling, sample: F) -> PairedAccumulator
where
    F: Fn(&mut StreamRng) -> (f64, f64) + Sync,
{
    let parts: Vec<PairedAccumulator> = (0..sampling.workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream_rng(sampling.seed, w as u64);
            let mut acc = PairedAccumulator::default();
            for _ in 0..sampling.share(w) {
                let (a, b) = sample(&mut rng);
                acc.push(a, b);
            }
            acc
        })
        .collect();
    parts.iter().fold(PairedAccumulator::default(), |mut total, p| {
        total.merge(p);
        total
    })
}

/// Draws a per-worker sample bank once, for surrogate objectives that are
/// re-evaluated many times on the same draws.
pub fn draw_banks<T, F>(sampling: &Sampling, draw: F) -> Vec<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    (0..sampling.workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream_rng(sampling.seed, w as u64);
            (0..sampling.share(w)).map(|_| draw(&mut rng)).collect()
        })
        .collect()
}

/// Averages `value` over a bank produced by [`draw_banks`], merging in worker order.
pub fn average_banks<T, F>(banks: &[Vec<T>], value: F) -> Accumulator
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    let parts: Vec<Accumulator> = banks
        .par_iter()
        .map(|bank| {
            let mut acc = Accumulator::default();
            for item in bank {
                acc.push(value(item));
            }
            acc
        })
        .collect();
    parts.iter().fold(Accumulator::default(), |mut total, p| {
        total.merge(p);
        total
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Accumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Accumulator::default();
        let mut right = Accumulator::default();
        xs[..313].iter().for_each(|&x| left.push(x));
        xs[313..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(left.count(), whole.count());
        assert!((left.mean() - whole.mean()).abs() < 1e-12);
        assert!((left.variance() - whole.variance()).abs() < 1e-10);
    }

    #[test]
    fn shares_cover_all_samples() {
        let s = Sampling::new(1_003, 0).with_workers(4);
        let total: usize = (0..4).map(|w| s.share(w)).sum();
        assert_eq!(total, 1_003);
    }

    #[test]
    fn run_is_reproducible_per_seed_and_workers() {
        let s = Sampling::new(5_000, 9).with_workers(3);
        let a = run(&s, |rng| rng.random::<f64>());
        let b = run(&s, |rng| rng.random::<f64>());
        assert_eq!(a, b);
        let c = run(&s.with_seed(10), |rng| rng.random::<f64>());
        assert_ne!(a.mean(), c.mean());
    }

    #[test]
    fn bank_average_equals_streaming_run() {
        let s = Sampling::new(4_000, 3).with_workers(2);
        let streamed = run(&s, |rng| rng.random::<f64>().powi(2));
        let banks = draw_banks(&s, |rng| rng.random::<f64>());
        let banked = average_banks(&banks, |x| x * x);
        assert_eq!(streamed, banked);
    }

    #[test]
    fn rejects_tiny_runs() {
        assert!(Sampling::new(10, 0).validate(MIN_SAMPLES).is_err());
        assert!(Sampling::new(2_000, 0).with_workers(0).validate(MIN_SAMPLES).is_err());
    }
}
