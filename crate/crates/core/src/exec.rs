//! Data-parallel execution with a sequential fallback.
//!
//! Hot loops (stimulus rendering, batch scoring, cross-matrix cells) go
//! through [`Exec::map_indexed`]. With the `parallel` feature they run on a
//! rayon pool bounded by `PERCEPT_BENCH_THREADS`; without it, or with
//! [`Exec::Sequential`], they run in index order on the calling thread.
//! Results are always returned in index order, so both paths produce
//! identical output.

pub const THREADS_ENV: &str = "PERCEPT_BENCH_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// `Parallel` when the crate was built with the `parallel` feature.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Applies `f` to `0..n` and collects results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return pool().install(|| (0..n).into_par_iter().map(&f).collect());
        }
        (0..n).map(f).collect()
    }

    /// Like [`map_indexed`](Self::map_indexed) but short-circuits on the
    /// first error (lowest index wins on the sequential path).
    pub fn try_map_indexed<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return pool().install(|| (0..n).into_par_iter().map(&f).collect());
        }
        (0..n).map(f).collect()
    }
}

/// Worker count from `PERCEPT_BENCH_THREADS`, else available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count())
            .thread_name(|i| format!("percept-worker-{i}"))
            .build()
            .expect("thread pool")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree_and_keep_order() {
        let f = |i: usize| (i * i) as u64 ^ 0xABCD;
        let seq = Exec::Sequential.map_indexed(1000, f);
        let par = Exec::Parallel.map_indexed(1000, f);
        assert_eq!(seq, par);
        assert_eq!(seq[3], 9 ^ 0xABCD);
    }

    #[test]
    fn try_map_reports_error() {
        let r: Result<Vec<usize>, String> = Exec::Sequential.try_map_indexed(10, |i| {
            if i == 4 {
                Err(format!("bad {i}"))
            } else {
                Ok(i)
            }
        });
        assert_eq!(r.unwrap_err(), "bad 4");
    }
}
