//! Scoped-thread helpers. A thread count of 1 never spawns, which keeps the
//! library usable on targets without threads.

use std::num::NonZeroUsize;
use std::ops::Range;
use std::thread;

/// Resolves a requested thread count; 0 means "all available cores".
pub fn resolve_threads(requested: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1)
}

/// Splits `0..len` into `parts` contiguous ranges whose lengths differ by at
/// most one. The split depends only on `(len, parts)`.
pub(crate) fn split_range(len: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.clamp(1, len.max(1));
    let base = len / parts;
    let extra = len % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let size = base + usize::from(p < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

/// Runs `f(worker, range)` on each chunk of `0..len`, one chunk per thread,
/// and returns the results in worker order.
pub(crate) fn map_chunks<T, F>(len: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync,
{
    let chunks = split_range(len, threads);
    if chunks.len() == 1 {
        return vec![f(0, chunks[0].clone())];
    }
    thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .enumerate()
            .map(|(w, r)| {
                let f = &f;
                s.spawn(move || f(w, r))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

/// Applies `f(row_index, row)` to every `row_len`-sized row of `data`,
/// distributing contiguous blocks of rows over threads.
pub(crate) fn for_each_row_mut<T, F>(data: &mut [T], row_len: usize, threads: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    if row_len == 0 {
        return;
    }
    let rows = data.len() / row_len;
    let chunks = split_range(rows, threads);
    if chunks.len() == 1 {
        for (i, row) in data.chunks_mut(row_len).enumerate() {
            f(i, row);
        }
        return;
    }
    thread::scope(|s| {
        let mut rest = data;
        for r in chunks {
            let (head, tail) = rest.split_at_mut(r.len() * row_len);
            rest = tail;
            let f = &f;
            s.spawn(move || {
                for (offset, row) in head.chunks_mut(row_len).enumerate() {
                    f(r.start + offset, row);
                }
            });
        }
    });
}
