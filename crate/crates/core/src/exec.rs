//! Execution abstraction between the algorithms and whatever runs them.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

/// Something that can run independent indexed tasks, possibly concurrently.
///
/// `for_each` must call `task(i)` exactly once for every `i < count` and
/// return only after all calls have completed. Calls may run on any thread
/// and in any order.
pub trait Executor: Sync {
    /// Number of workers tasks may be spread over.
    fn workers(&self) -> usize;

    fn for_each(&self, count: usize, task: &(dyn Fn(usize) + Sync));
}

impl<E: Executor + ?Sized> Executor for &E {
    fn workers(&self) -> usize {
        (**self).workers()
    }

    fn for_each(&self, count: usize, task: &(dyn Fn(usize) + Sync)) {
        (**self).for_each(count, task)
    }
}

/// Runs every task on the calling thread in ascending index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn workers(&self) -> usize {
        1
    }

    fn for_each(&self, count: usize, task: &(dyn Fn(usize) + Sync)) {
        (0..count).for_each(task);
    }
}

/// Evaluates `f(i)` for every `i < count` on `exec` and returns the results in
/// index order, independent of the schedule.
pub fn map_indexed<E, F>(exec: &E, count: usize, f: F) -> Vec<f64>
where
    E: Executor + ?Sized,
    F: Fn(usize) -> f64 + Sync,
{
    let slots: Vec<AtomicU64> = (0..count).map(|_| AtomicU64::new(0)).collect();
    exec.for_each(count, &|i| slots[i].store(f(i).to_bits(), Ordering::Relaxed));
    slots
        .into_iter()
        .map(|s| f64::from_bits(s.into_inner()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_visits_in_order() {
        let log: Vec<AtomicU64> = (0..5).map(|_| AtomicU64::new(u64::MAX)).collect();
        let next = AtomicU64::new(0);
        Serial.for_each(5, &|i| {
            let slot = next.fetch_add(1, Ordering::Relaxed) as usize;
            log[slot].store(i as u64, Ordering::Relaxed);
        });
        let seen: Vec<u64> = log.iter().map(|a| a.load(Ordering::Relaxed)).collect();
        assert_eq!(seen, [0, 1, 2, 3, 4]);
    }

    #[test]
    fn map_indexed_keeps_index_order() {
        let out = map_indexed(&Serial, 4, |i| i as f64 * 0.5);
        assert_eq!(out, [0.0, 0.5, 1.0, 1.5]);
        assert!(map_indexed(&Serial, 0, |_| 1.0).is_empty());
    }
}
