//! Fan-out helpers for independent cases: probe batches, trajectory sweeps
//! and check suites.
//!
//! With the `parallel` feature (default) the batch runs on rayon; without it
//! the same API degrades to sequential iteration. Results are collected in
//! input order and per-case inputs are derived from the case index, so the
//! output is identical either way.

/// Apply `f` to every case, in parallel when the feature allows.
#[cfg(feature = "parallel")]
pub fn map_batch<T, R, F>(cases: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    cases.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_batch<T, R, F>(cases: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    cases.into_iter().map(f).collect()
}

/// Sequential reference path, kept available for benchmarks and for
/// verifying that parallel execution does not change results.
pub fn map_batch_seq<T, R, F>(cases: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    cases.into_iter().map(f).collect()
}

/// Fold the maximum of a per-probe defect over `n` probes.
pub fn max_over_probes<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_batch((0..n).collect(), f)
        .into_iter()
        .fold(0.0f64, f64::max)
}

/// Like [`max_over_probes`] but also reports which probe attained the
/// maximum, so a failing check names a replayable input. Ties resolve to the
/// smallest index, keeping the result independent of execution order.
pub fn worst_probe<F>(n: usize, f: F) -> (f64, usize)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_batch((0..n).collect(), f)
        .into_iter()
        .enumerate()
        .fold((0.0f64, 0usize), |(best, at), (i, d)| {
            if d > best {
                (d, i)
            } else {
                (best, at)
            }
        })
}

/// Run `f` inside a thread pool of the requested size. `None` keeps the
/// default pool; without the `parallel` feature the closure just runs.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let cases: Vec<u64> = (0..1000).collect();
        let f = |x: u64| x.wrapping_mul(2654435761) % 97;
        let a = map_batch(cases.clone(), f);
        let b = map_batch_seq(cases, f);
        assert_eq!(a, b);
    }

    #[test]
    fn max_over_probes_is_order_independent() {
        let defect = |i: usize| (i as f64 * 0.37).sin().abs();
        let m = max_over_probes(500, defect);
        let mut expect = 0.0f64;
        for i in 0..500 {
            expect = expect.max(defect(i));
        }
        assert_eq!(m, expect);
    }

    #[test]
    fn scoped_pool_runs_closure() {
        let out = with_threads(Some(2), || max_over_probes(100, |i| i as f64));
        assert_eq!(out, 99.0);
    }
}
