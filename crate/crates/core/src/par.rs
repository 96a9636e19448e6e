//! Fan-out of independent jobs.
//!
//! With the `parallel` feature, [`Execution::Parallel`] maps jobs on the
//! current rayon pool; otherwise (or with [`Execution::Sequential`]) jobs run
//! in order on the calling thread. Results are always returned in input
//! order and every job derives its randomness from its own index, so the
//! outcome does not depend on the schedule.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether jobs will actually run concurrently in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` under the requested execution mode.
pub fn map_indexed<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Run `f` with at most `threads` worker threads (`None` keeps the global
/// pool). Without the `parallel` feature this just calls `f`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| e.to_string())?;
        return Ok(pool.install(f));
    }
    let _ = threads;
    Ok(f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = map_indexed(Execution::Sequential, 100, f);
        let b = map_indexed(Execution::Parallel, 100, f);
        assert_eq!(a, b);
        let c = with_threads(Some(2), || map_indexed(Execution::Parallel, 100, f)).unwrap();
        assert_eq!(a, c);
    }
}
