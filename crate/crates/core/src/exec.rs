//! Execution policy: data-parallel via rayon, or sequential.
//!
//! Every parallel entry point in the crate shards its work into a fixed set of
//! units (seeds, prefixes, replicates) that does not depend on the thread
//! count, and reduces the per-unit results in index order. Sequential and
//! parallel runs therefore produce bit-identical output.

/// Name of the environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "RENYI_LAB_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecPolicy {
    Sequential,
    Parallel,
}

impl Default for ExecPolicy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecPolicy::Parallel
        } else {
            ExecPolicy::Sequential
        }
    }
}

impl ExecPolicy {
    /// The policy actually used: `Parallel` degrades to `Sequential` when the
    /// crate is built without the `parallel` feature.
    pub fn effective(self) -> Self {
        if cfg!(feature = "parallel") {
            self
        } else {
            ExecPolicy::Sequential
        }
    }

    /// Map `f` over `0..len`, returning results in index order.
    pub fn map_indexed<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self.effective() {
            #[cfg(feature = "parallel")]
            ExecPolicy::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Map `f` over a slice, returning results in slice order.
    pub fn map_slice<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        self.map_indexed(items.len(), |i| f(&items[i]))
    }
}

/// Configure the global rayon pool from [`THREADS_ENV`]. Returns the thread
/// count that was requested, if any. Calling it twice is harmless.
pub fn init_threads_from_env() -> Option<usize> {
    let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
    if n == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let a = ExecPolicy::Sequential.map_indexed(100, |i| (i as f64).sqrt());
        let b = ExecPolicy::Parallel.map_indexed(100, |i| (i as f64).sqrt());
        assert_eq!(a, b);
    }
}
