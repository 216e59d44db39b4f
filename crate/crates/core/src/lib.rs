//! Orbit generation in the log-significand domain and Benford conformance
//! statistics.
//!
//! Every sequence produced here is a list of [`SignedLogValue`]s: a sign plus
//! the base-10 logarithm of the magnitude, split into an integer
//! characteristic and a fractional mantissa. The mantissa is what all digit
//! statistics depend on, and it is kept accurate no matter how large the
//! characteristic grows.
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod conformance;
pub mod error;
pub mod matrixdyn;
pub mod oracle;
pub mod orbits;
mod precise;
pub mod rng;
pub mod significand;
pub mod stochasticdyn;
pub mod twostep;

pub use conformance::{ConformanceReport, DigitHistogram, Thresholds, Verdict};
pub use error::{Error, Result};
pub use precise::MAX_PRECISION;
pub use significand::SignedLogValue;
