//! Execution policy for the data-parallel inner loops.
//!
//! Every parallel loop in the crate goes through [`Execution::map_range`] so the
//! sequential and rayon-backed paths produce identical results: work items are
//! independent and results are collected in index order.

/// How the data-parallel loops are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work stealing. Falls back to [`Execution::Sequential`] when the
    /// crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    /// True when this policy actually fans out to a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f` on `0..len`, returning results in index order.
    pub fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Runs `f` over disjoint mutable chunks of `data`, each `chunk` long.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
            return;
        }
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_agree() {
        let f = |i: usize| (i * i) as u64 % 97;
        assert_eq!(
            Execution::Sequential.map_range(1000, f),
            Execution::Parallel.map_range(1000, f)
        );
    }

    #[test]
    fn chunked_writes_cover_everything() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut v = vec![0usize; 103];
            exec.for_each_chunk_mut(&mut v, 10, |i, c| {
                for (k, x) in c.iter_mut().enumerate() {
                    *x = i * 10 + k;
                }
            });
            assert!(v.iter().enumerate().all(|(i, &x)| i == x));
        }
    }
}
