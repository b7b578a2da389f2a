//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` mode runs on rayon; without it
//! both modes run sequentially. Reductions always combine partial results in
//! index order so results do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for the hot loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Evaluate `f(i)` for `i in 0..n`.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Run `f(chunk_index, chunk)` over consecutive chunks of `data`.
    pub fn chunks_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => data
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
            _ => data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c)),
        }
    }

    /// Map over `blocks` index blocks and fold the partial results in order.
    pub fn map_reduce<T, F, R>(self, n: usize, blocks: usize, f: F, reduce: R, init: T) -> T
    where
        T: Send + Clone,
        F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
        R: Fn(T, T) -> T,
    {
        let blocks = blocks.clamp(1, n.max(1));
        let step = n.div_ceil(blocks);
        let parts = self.map(blocks, |b| {
            let lo = (b * step).min(n);
            let hi = ((b + 1) * step).min(n);
            f(lo..hi)
        });
        parts.into_iter().fold(init, reduce)
    }
}

/// Number of worker threads in use.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Configure the global worker pool. Only the first call has an effect.
pub fn init_threads(k: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = k;
    }
}
