//! Quantum Fisher information for Pauli-channel parameter estimation with
//! mixed qubit probes.
//!
//! Compares an independent channel-use protocol with a correlated protocol
//! built from pairwise controlled-Z gates, and provides the dense linear
//! algebra, channel models, correlation diagnostics and Monte Carlo harness
//! used to check the closed forms.

pub mod channels;
pub mod correlations;
pub mod error;
pub mod linop;
pub mod mc;
pub mod protocol;
pub mod qfi;
pub mod verify;

pub use error::{Error, Result};
