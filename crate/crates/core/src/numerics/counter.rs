//! Per-thread tally of distance evaluations, used to check cost claims
//! independently of wall-clock time.

use std::cell::Cell;

thread_local! {
    static DISTANCE_EVALS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub fn record(n: u64) {
    DISTANCE_EVALS.with(|c| c.set(c.get() + n));
}

pub fn current() -> u64 {
    DISTANCE_EVALS.with(Cell::get)
}

/// Runs `f` and returns its output with the number of distance evaluations it
/// recorded on this thread.
pub fn count<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = current();
    let out = f();
    (out, current() - before)
}
