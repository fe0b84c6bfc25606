//! Exhaustive search split across threads by first-slot index.

use std::ops::Range;
use std::thread;

use pinch_core::scenario::PinchConfiguration;
use pinch_core::search::{check_budget, enumerate_partition, Incumbent, SearchResult, SearchSpace};
use pinch_core::Error;

/// Contiguous split of `0..n` into at most `parts` non-empty ranges.
pub fn split(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    let (base, extra) = (n / parts, n % parts);
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .filter(|r| !r.is_empty())
        .collect()
}

/// Same optimum, tie-break and evaluation count as the serial search.
/// `make` builds one objective per worker.
pub fn parallel_brute_force<M, F>(space: &SearchSpace, make: M, cap: u128, workers: usize) -> Result<SearchResult, Error>
where
    M: Fn() -> F + Sync,
    F: FnMut(&PinchConfiguration) -> f64,
{
    check_budget(space, cap)?;
    let first = space.slots.first().ok_or_else(|| Error::InvalidConfig("search space has no slots".into()))?;
    let ranges = split(first.candidates.len(), workers);
    let parts: Vec<Incumbent> = thread::scope(|s| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| {
                let make = &make;
                s.spawn(move || enumerate_partition(space, make(), r))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    let merged = parts
        .into_iter()
        .reduce(Incumbent::merge)
        .expect("at least one partition");
    Ok(SearchResult::from_incumbent(space, merged))
}

/// Runs `f` over `items` on up to `workers` threads; results keep input order.
pub fn map_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let chunks = split(items.len(), workers);
    thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|r| {
                let f = &f;
                s.spawn(move || items[r].iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

pub fn available_workers() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}
