//! Full-duplex MIMO with reduced-complexity analog self-interference
//! cancellation: canceller construction, joint TX/RX digital beamforming,
//! and a Monte Carlo harness comparing canceller designs.

pub mod beamforming;
pub mod canceller;
pub mod channels;
pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod solver;

pub use error::{Error, Result};
