//! Deterministic parallel Monte-Carlo accumulation.
//!
//! Samples are processed in fixed-size chunks; chunk i always consumes
//! substream i of the caller's stream, and chunk partial sums are combined by
//! a pairwise (tree) reduction in index order. Consequently the result is
//! bit-identical for any number of worker threads, including one.

use crate::stream::SeededStream;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Default number of samples per chunk.
pub const DEFAULT_CHUNK: u64 = 16_384;

/// Running first and second moments of a scalar sample set.
///
/// Internally Welford's recurrence with Chan's merge, so a sample set that
/// is constant produces a variance of exactly zero (the textbook
/// sum-of-squares form loses that to cancellation), and zero-variance
/// estimators report stderr at the rounding floor instead of a noise floor.
#[derive(Debug, Clone, Copy, Default)]
pub struct McStats {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl McStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(a: McStats, b: McStats) -> McStats {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let (na, nb, nf) = (a.n as f64, b.n as f64, n as f64);
        let delta = b.mean - a.mean;
        McStats {
            n,
            mean: a.mean + delta * (nb / nf),
            m2: a.m2 + b.m2 + delta * delta * (na * nb / nf),
        }
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.mean
        }
    }

    /// Sample variance (population estimate; 0 for n < 2).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n as f64 - 1.0)).max(0.0)
    }

    /// Standard error of the mean (0 for n < 2).
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Pairwise (tree) reduction over chunk statistics in index order.
pub fn pairwise_merge(mut stats: Vec<McStats>) -> McStats {
    if stats.is_empty() {
        return McStats::default();
    }
    while stats.len() > 1 {
        let mut next = Vec::with_capacity(stats.len().div_ceil(2));
        for pair in stats.chunks(2) {
            next.push(if pair.len() == 2 {
                McStats::merge(pair[0], pair[1])
            } else {
                pair[0]
            });
        }
        stats = next;
    }
    stats[0]
}

/// Run `n_samples` evaluations of `per_sample` in deterministic parallel
/// chunks. `per_sample` receives the chunk's generator and must draw all of
/// its randomness from it.
pub fn mc_run<F>(base: &SeededStream, n_samples: u64, chunk_size: u64, per_sample: F) -> McStats
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    mc_run_scoped(base, n_samples, chunk_size, || (), |(), rng| per_sample(rng))
}

/// Like `mc_run`, but builds scratch state once per chunk — for samplers
/// that carry reusable buffers. Chunking, substream assignment and the
/// pairwise reduction are identical, so results match `mc_run` bit for bit
/// when the per-sample draws match.
pub fn mc_run_scoped<S, I, F>(
    base: &SeededStream,
    n_samples: u64,
    chunk_size: u64,
    init: I,
    per_sample: F,
) -> McStats
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha8Rng) -> f64 + Sync,
{
    assert!(chunk_size > 0, "chunk size must be positive");
    let n_chunks = n_samples.div_ceil(chunk_size);
    let partials: Vec<McStats> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = base.substream(ci).rng();
            let mut state = init();
            let lo = ci * chunk_size;
            let hi = (lo + chunk_size).min(n_samples);
            let mut st = McStats::default();
            for _ in lo..hi {
                st.push(per_sample(&mut state, &mut rng));
            }
            st
        })
        .collect();
    pairwise_merge(partials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn mean_and_stderr_of_uniform() {
        let base = SeededStream::new(1);
        let st = mc_run(&base, 200_000, DEFAULT_CHUNK, |rng| rng.gen::<f64>());
        assert!((st.mean() - 0.5).abs() < 3.0 * st.stderr());
        // stderr of U[0,1] mean is sqrt(1/12/N)
        let expect = (1.0 / 12.0 / 200_000.0_f64).sqrt();
        assert!((st.stderr() - expect).abs() / expect < 0.05);
    }

    #[test]
    fn bitwise_stable_across_thread_counts() {
        let base = SeededStream::new(7);
        let job = || mc_run(&base, 100_000, 4096, |rng| rng.gen::<f64>().sin());
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap();
        let a = pool1.install(job);
        let b = pool8.install(job);
        assert_eq!(a.mean().to_bits(), b.mean().to_bits());
        assert_eq!(a.stderr().to_bits(), b.stderr().to_bits());
        assert_eq!(a.n, b.n);
    }

    #[test]
    fn constant_samples_have_exactly_zero_variance() {
        let base = SeededStream::new(5);
        let st = mc_run(&base, 50_000, 4096, |_| 0.731);
        assert_eq!(st.mean(), 0.731);
        assert_eq!(st.variance(), 0.0);
        assert_eq!(st.stderr(), 0.0);
    }

    #[test]
    fn merged_variance_matches_single_pass() {
        let mut all = McStats::default();
        let mut parts = Vec::new();
        let mut rng = SeededStream::new(9).rng();
        for _ in 0..8 {
            let mut part = McStats::default();
            for _ in 0..1000 {
                let x: f64 = rng.gen::<f64>().powi(3) - 0.2;
                all.push(x);
                part.push(x);
            }
            parts.push(part);
        }
        let merged = pairwise_merge(parts);
        assert_eq!(merged.n, all.n);
        assert!((merged.mean() - all.mean()).abs() < 1e-14);
        assert!((merged.variance() - all.variance()).abs() < 1e-14);
    }

    #[test]
    fn pairwise_merge_matches_plain_sum_counts() {
        let stats: Vec<McStats> = (0..13)
            .map(|i| {
                let mut s = McStats::default();
                s.push(i as f64);
                s
            })
            .collect();
        let merged = pairwise_merge(stats);
        assert_eq!(merged.n, 13);
        assert!((merged.mean() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn remainder_chunk_is_exact() {
        let base = SeededStream::new(3);
        let st = mc_run(&base, 10_001, 4096, |_| 1.0);
        assert_eq!(st.n, 10_001);
        assert_eq!(st.mean(), 1.0);
    }
}
