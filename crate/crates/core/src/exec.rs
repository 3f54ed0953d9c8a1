//! Parallel execution helpers.
//!
//! All batch work in this crate goes through [`par_map`] so that results
//! are order-preserving: a parallel run and a sequential run produce the
//! same `Vec`, element by element, and downstream reductions happen in
//! index order. That keeps every report byte-identical regardless of the
//! thread count.
//!
//! With the `parallel` feature disabled the same API compiles to plain
//! sequential iteration.

/// Environment variable capping the rayon thread count.
pub const THREADS_ENV: &str = "GUREVIC_THREADS";

/// Thread cap requested through the environment, if any.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
}

/// Order-preserving parallel map over a slice.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Sequential fallback used when the `parallel` feature is off.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential map with the same signature as [`par_map`], kept available
/// unconditionally so benchmarks can compare both code paths in one build.
pub fn seq_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Order-preserving parallel map over an index range.
pub fn par_map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    par_map(&idx, |&i| f(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let par = par_map(&xs, |&x| x * x);
        let seq = seq_map(&xs, |&x| x * x);
        assert_eq!(par, seq);
    }

    #[test]
    fn thread_cap_parses() {
        std::env::set_var(THREADS_ENV, "3");
        assert_eq!(thread_cap_from_env(), Some(3));
        std::env::set_var(THREADS_ENV, "junk");
        assert_eq!(thread_cap_from_env(), None);
        std::env::remove_var(THREADS_ENV);
        assert_eq!(thread_cap_from_env(), None);
    }
}
