//! Execution strategy for data-parallel loops.
//!
//! With the `parallel` feature the work is fanned out over rayon; without it
//! every strategy runs sequentially. Results are always collected in index
//! order, so callers see identical output regardless of thread count.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Use the global rayon pool.
    #[default]
    Parallel,
    /// Use a dedicated pool with this many workers.
    Threads(usize),
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Execution::Sequential | Execution::Threads(1))
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match exec {
            Execution::Sequential | Execution::Threads(1) => {}
            Execution::Parallel => return (0..n).into_par_iter().map(f).collect(),
            Execution::Threads(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .expect("failed to build worker pool");
                return pool.install(|| (0..n).into_par_iter().map(f).collect());
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = exec;
    (0..n).map(f).collect()
}
