//! Secure-rate analysis and Monte-Carlo simulation for a two-user Gaussian
//! wiretap channel with a cooperative jamming helper.
//!
//! Transmitter 1 sends confidential data to receiver 1 while receiver 2
//! eavesdrops; transmitter 2 is a helper whose signals align with the
//! confidential layers at the eavesdropper. The crate evaluates the GDoF
//! characterization and finite-SNR bounds, builds the layered PAM scheme,
//! and simulates encoding, the channel and the legitimate decoder.

pub mod bounds;
pub mod channel;
pub mod decode;
mod error;
pub mod fixed;
pub mod scheme;
pub mod sim;

pub use error::{Error, Result};
