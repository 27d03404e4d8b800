//! Experiment harness for floating-point non-associativity: worker pool,
//! file formats, experiment runners, reports and the `fpna` command line.

pub mod cli;
mod error;
pub mod experiments;
pub mod io;
pub mod pool;
pub mod report;
pub mod svg;

pub use error::{HarnessError, Result};
pub use pool::Pool;
pub use report::{emit_report, Format, Report};
