//! Floating-point non-associativity laboratory: the pure algorithmic core.
//!
//! This crate is `no_std` (it needs `alloc`) and contains every summation
//! variant, the variability metrics, the portable random generators, the
//! statistics toolkit and the tensor operations. Parallel execution is
//! abstracted behind [`Executor`]; the crate ships a [`Serial`] executor and
//! leaves thread pools to the embedding application.
//!
//! All math functions go through `libm` so that results (notably the normal
//! generator and the Gaussian CDF) are bit-identical across platforms.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod array;
pub mod atomic;
pub mod datagen;
mod error;
pub mod exec;
pub mod format;
pub mod metrics;
pub mod reduction;
pub mod stats;
pub mod tensor;

pub use array::{Distribution, FpArray};
pub use atomic::{atomic_f64_add, AtomicF64};
pub use datagen::{RngAlgorithm, RngSpec};
pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use reduction::{
    Backend, Engine, KernelGeometry, ReductionPlan, SumResult, Variant,
};

/// Unit roundoff of binary64, 2^-53.
pub const UNIT_ROUNDOFF: f64 = 1.0 / 9_007_199_254_740_992.0;
