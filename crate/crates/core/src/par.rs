//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature enabled these dispatch to rayon; without it they
//! run the same closures in order on the calling thread. Every caller merges
//! results in index order, so output never depends on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed reduction block used by [`sum_blocks`]. Partial sums are always formed
/// over these blocks and added left to right, so floating-point reductions are
/// identical for any thread count and for the sequential build.
pub const REDUCE_BLOCK: usize = 4096;

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps each item of a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Calls `f(block_index, block)` for consecutive mutable blocks of `data`.
pub fn for_each_block_mut<T, F>(data: &mut [T], block: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(block)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(block).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Calls `f(block_index, block)` for consecutive mutable blocks of `data`
/// and returns the per-block results in block order.
pub fn map_blocks_mut<T, R, F>(data: &mut [T], block: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut [T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(block).enumerate().map(|(i, c)| f(i, c)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(block).enumerate().map(|(i, c)| f(i, c)).collect()
    }
}

/// Like [`map_blocks_mut`] over two equally long slices walked in lockstep.
pub fn map_blocks_mut2<A, B, R, F>(a: &mut [A], b: &mut [B], block: usize, f: F) -> Vec<R>
where
    A: Send,
    B: Send,
    R: Send,
    F: Fn(usize, &mut [A], &mut [B]) -> R + Sync + Send,
{
    assert_eq!(a.len(), b.len(), "slices must have equal length");
    #[cfg(feature = "parallel")]
    {
        a.par_chunks_mut(block)
            .zip(b.par_chunks_mut(block))
            .enumerate()
            .map(|(i, (x, y))| f(i, x, y))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        a.chunks_mut(block).zip(b.chunks_mut(block)).enumerate().map(|(i, (x, y))| f(i, x, y)).collect()
    }
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn sum_blocks<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(REDUCE_BLOCK);
    let partials = map_range(blocks, |b| {
        let start = b * REDUCE_BLOCK;
        let end = (start + REDUCE_BLOCK).min(n);
        (start..end).map(&f).sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Whether this build dispatches work to a thread pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
