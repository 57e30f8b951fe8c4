//! Order-preserving batch execution over independent per-video work items.
//!
//! With the `parallel` feature (default) the work runs on a bounded rayon
//! pool; without it the same API degrades to a sequential loop. Results come
//! back in input order either way, so output files are byte-identical
//! regardless of the worker count.

/// Sequential reference path; always available.
pub fn map_sequential<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Data-parallel path on a dedicated pool. `threads == 0` uses the rayon
/// default.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, U, F>(items: Vec<T>, threads: usize, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| items.into_par_iter().map(f).collect()),
        Err(_) => map_sequential(items, f),
    }
}

/// Map `f` over `items` with up to `threads` workers, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, threads: usize, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    if threads == 1 {
        map_sequential(items, f)
    } else {
        map_parallel(items, threads, f)
    }
}

/// Map `f` over `items`, preserving order. Sequential fallback: the
/// `parallel` feature is disabled, so `threads` is accepted but ignored.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, _threads: usize, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    map_sequential(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_input_order() {
        let items: Vec<u64> = (0..1000).collect();
        let expected: Vec<u64> = items.iter().map(|x| x * x).collect();
        assert_eq!(map(items.clone(), 1, |x| x * x), expected);
        assert_eq!(map(items.clone(), 8, |x| x * x), expected);
        assert_eq!(map_sequential(items, |x| x * x), expected);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..500).collect();
        let seq = map_sequential(items.clone(), |x| x.wrapping_mul(0x9E37_79B9));
        let par = map_parallel(items, 4, |x| x.wrapping_mul(0x9E37_79B9));
        assert_eq!(seq, par);
    }
}
