//! Replica seeding, parallel replica maps and streaming moment accumulators.
//!
//! Every Monte Carlo replica owns a ChaCha8 stream keyed by the master seed
//! and selected by the replica index, so results never depend on how replicas
//! are scheduled across worker threads. Parallel maps collect in replica
//! order and every reduction runs sequentially over that ordered output.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Human-readable description of the seeding scheme, echoed in run manifests.
pub const SEEDING_SCHEME: &str = "ChaCha8Rng: key = seed_from_u64(splitmix64-derived seed), \
stream = replica index, word position 0; sub-experiment seeds = splitmix64 chain over (master seed, tags)";

/// Replica chunk size used by batched samplers. Fixed so that output is
/// independent of the number of worker threads.
pub const REPLICA_CHUNK: usize = 64;

/// Independent random stream for one replica.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-experiment seed from a master seed and a list of tags
/// (ladder level, Hurst index bits, experiment id, ...).
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Evaluate `f` for every replica index in `0..count`, in parallel, returning
/// results in replica order.
pub fn map_replicas<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count as u64).into_par_iter().map(f).collect()
}

/// Like [`map_replicas`] but hands out fixed-size chunks of replica indices,
/// for samplers that amortize work over a batch.
pub fn map_replica_chunks<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> Vec<T> + Sync + Send,
{
    let chunks: Vec<Range<u64>> = (0..count)
        .step_by(REPLICA_CHUNK)
        .map(|start| start as u64..(start + REPLICA_CHUNK).min(count) as u64)
        .collect();
    let nested: Vec<Vec<T>> = chunks.into_par_iter().map(f).collect();
    nested.into_iter().flatten().collect()
}

/// Run `f` on a dedicated rayon pool with `threads` workers (0 = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// One-pass mean/variance accumulator (Welford) with an associative merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine two partial accumulators (Chan et al. parallel update).
    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
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
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for MeanAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanAccumulator::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Mean and standard error of a slice.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let acc: MeanAccumulator = values.iter().copied().collect();
    (acc.mean(), acc.std_error())
}
