//! Execution mode for the data-parallel loops (kernel sweeps, property
//! suites, parameter sweeps).
//!
//! With the `parallel` feature the `Parallel` mode runs on the rayon global
//! pool. Without it, `Parallel` silently degrades to the sequential path so
//! callers never need their own `cfg` gates. Every helper here returns its
//! results in input order, so both modes produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Applies `f` to consecutive mutable chunks of `data`, passing the chunk index.
pub fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Execution::Sequential, &xs, |x| x * x + 1);
        let b = map(Execution::Parallel, &xs, |x| x * x + 1);
        assert_eq!(a, b);
        assert_eq!(
            map_range(Execution::Sequential, 17, |i| i * 3),
            map_range(Execution::Parallel, 17, |i| i * 3)
        );
    }

    #[test]
    fn chunked_writes_cover_everything() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut v = vec![0usize; 103];
            for_each_chunk_mut(exec, &mut v, 10, |ci, c| {
                for (k, x) in c.iter_mut().enumerate() {
                    *x = ci * 10 + k;
                }
            });
            assert!(v.iter().enumerate().all(|(i, &x)| i == x));
        }
    }
}
