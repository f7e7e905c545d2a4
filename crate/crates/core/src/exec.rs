//! Sequential / data-parallel dispatch.
//!
//! Every batch-shaped kernel in the crate goes through [`map_indexed`], so the
//! `parallel` feature only has to be wired up once.

/// Execution strategy for batch kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses the rayon global pool. Falls back to sequential when the crate is
    /// built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Evaluates `f(0..len)` and collects the results in index order.
pub fn map_indexed<T, F>(exec: Exec, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_keep_order() {
        let seq = map_indexed(Exec::Sequential, 100, |i| i * i);
        let par = map_indexed(Exec::Parallel, 100, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
