//! Worker pool sizing.

use log::warn;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SLOWVAR_NS_THREADS";

/// Worker cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            warn!("ignoring {THREADS_ENV}={raw:?}");
            None
        }
    }
}

/// Runs `f` on a pool capped by [`THREADS_ENV`], or on the global pool when
/// the variable is unset.
pub fn with_workers<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    match thread_cap() {
        Some(cap) => {
            let n = cap.max(1);
            log::debug!("{jobs} jobs on {n} threads");
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(e) => {
                    warn!("thread pool: {e}; using the global pool");
                    f()
                }
            }
        }
        None => f(),
    }
}
