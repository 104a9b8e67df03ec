//! Order-preserving parallel map over a fixed-size worker pool.
//!
//! Every result lands at the index of its input, so the output is identical
//! for any worker count. Randomized work (encryption) draws one seed per item
//! from the caller's RNG up front, which keeps it reproducible as well.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::Result;

#[derive(Clone)]
pub struct Workers {
    count: usize,
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl fmt::Debug for Workers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Workers({})", self.count)
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::serial()
    }
}

impl Workers {
    pub fn serial() -> Self {
        Workers { count: 1, pool: None }
    }

    pub fn new(count: usize) -> Self {
        assert!(count >= 1, "worker count must be positive");
        if count == 1 {
            return Workers::serial();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .thread_name(|i| format!("cryptonn-worker-{i}"))
            .build()
            .expect("thread pool");
        Workers {
            count,
            pool: Some(Arc::new(pool)),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `f(0), …, f(n-1)` in index order.
    pub fn map_range<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    pub fn try_map_range<R, F>(&self, n: usize, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(usize) -> Result<R> + Sync + Send,
    {
        self.map_range(n, f).into_iter().collect()
    }

    /// Like [`try_map_range`](Self::try_map_range), handing each item its own
    /// RNG seeded from `rng`.
    pub fn try_map_seeded<R, F, G>(&self, n: usize, rng: &mut G, f: F) -> Result<Vec<R>>
    where
        R: Send,
        G: Rng + ?Sized,
        F: Fn(usize, &mut ChaCha20Rng) -> Result<R> + Sync + Send,
    {
        let seeds: Vec<[u8; 32]> = (0..n).map(|_| rng.gen()).collect();
        self.try_map_range(n, |i| f(i, &mut ChaCha20Rng::from_seed(seeds[i])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_is_independent_of_worker_count() {
        let serial = Workers::serial().map_range(1000, |i| i * i);
        for n in [2, 3, 8] {
            assert_eq!(Workers::new(n).map_range(1000, |i| i * i), serial);
        }
    }

    #[test]
    fn seeded_map_is_reproducible() {
        let run = |workers: usize| {
            let mut rng = ChaCha20Rng::seed_from_u64(1);
            Workers::new(workers)
                .try_map_seeded(50, &mut rng, |i, r| Ok(r.gen::<u64>() ^ i as u64))
                .unwrap()
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn first_error_is_reported() {
        let out: Result<Vec<usize>> =
            Workers::new(2).try_map_range(10, |i| if i == 7 { Err(crate::Error::DivisorZero) } else { Ok(i) });
        assert!(out.is_err());
    }
}
