//! Energy-detection spectrum sensing with a noise-adaptive threshold.
//!
//! The crate is organised bottom-up:
//!
//! * [`signal`] synthesises seeded QPSK primary-user waveforms and complex
//!   AWGN, and arranges sample streams into `L × N` snapshot frames.
//! * [`detector`] holds the energy statistic, the Gaussian Q-function, the
//!   closed-form detection / false-alarm probabilities, and the static and
//!   dynamic threshold rules.
//! * [`noise`] estimates the noise variance blindly from a frame: sample
//!   covariance, Jacobi eigendecomposition, MDL signal-count selection and a
//!   Marcenko-Pastur distribution fit.
//! * [`harness`] runs seeded Monte Carlo experiments that compare static and
//!   dynamic thresholds and writes the results as CSV.
//! * [`cli`] and [`plot`] back the `specsense` binary.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detector;
pub mod error;
pub mod harness;
pub mod noise;
pub mod plot;
pub mod signal;

pub use error::{SenseError, SenseResult};
