//! Lock-free binary64 accumulator emulating GPU `atomicAdd` on the CPU.

use core::sync::atomic::{AtomicU64, Ordering};

/// A binary64 cell updated through compare-and-swap on its bit pattern.
#[derive(Debug)]
pub struct AtomicF64(AtomicU64);

impl AtomicF64 {
    pub const fn new(value: f64) -> Self {
        AtomicF64(AtomicU64::new(value.to_bits()))
    }

    pub fn load(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Acquire))
    }

    pub fn store(&self, value: f64) {
        self.0.store(value.to_bits(), Ordering::Release)
    }

    /// Adds `v` and returns the value observed immediately before this add
    /// was committed.
    pub fn fetch_add(&self, v: f64) -> f64 {
        let mut current = self.0.load(Ordering::Relaxed);
        loop {
            let next = (f64::from_bits(current) + v).to_bits();
            match self
                .0
                .compare_exchange_weak(current, next, Ordering::AcqRel, Ordering::Relaxed)
            {
                Ok(prev) => return f64::from_bits(prev),
                Err(observed) => current = observed,
            }
        }
    }

    pub fn into_inner(self) -> f64 {
        f64::from_bits(self.0.into_inner())
    }
}

impl Default for AtomicF64 {
    fn default() -> Self {
        Self::new(0.0)
    }
}

/// Applies `accumulator += v` exactly once; the global order of concurrent
/// adds is unspecified.
#[inline]
pub fn atomic_f64_add(accumulator: &AtomicF64, v: f64) {
    accumulator.fetch_add(v);
}
