//! Fermionic Gaussian states, beam-splitter channels and entropy power checks.

/// Library version recorded in every run report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod channels;
pub mod clifford;
pub mod error;
pub mod gaussian;
pub mod grassmann;
pub mod infotheory;
pub mod linalg;
pub mod random;
pub mod report;
