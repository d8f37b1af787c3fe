//! Low-interference N-continuous OFDM.
//!
//! The transmitter adds a short smooth signal to the head of every CP-OFDM
//! symbol so that the stream and its first N derivatives are continuous at
//! symbol junctions. The crate covers synthesis, a tapped-delay-line fading
//! channel with timing/frequency offsets, a ZF receiver, Welch and analytic
//! PSDs, closed-form SINR/BER/Eb-N0 expressions and STO estimation.
//!
//! Time is measured in samples throughout (`T_samp = 1`), so the useful
//! symbol lasts `M` and the subcarrier spacing is `1/M`. Frequencies handed
//! to the analytic PSD are in subcarrier units; multiply by the configured
//! spacing to get Hz.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod exec;
pub mod numerics;
pub mod receiver;
pub mod spectral;
pub mod sync;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Alias used across the crate for sampled complex buffers.
pub type ComplexVector = Vec<Complex64>;
