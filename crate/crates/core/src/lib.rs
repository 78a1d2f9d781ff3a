//! Time-based modulation for time-asynchronous diffusion channels with drift.
//!
//! A transmitter splits `N` molecules across release slots inside a window
//! `T_e`; the receiver never sees the transmitter clock and decides from the
//! sample variance of the arrival times alone. The crate covers the channel
//! simulation, the exact noncentral chi-squared law of the scaled sample
//! variance, maximum-likelihood detection with and without molecule loss,
//! theoretical error probabilities, split optimization and the baseline
//! receivers used for comparison.

pub mod analysis;
pub mod channel;
pub mod detection;
pub mod error;
pub mod modulation;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};
