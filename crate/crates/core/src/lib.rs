//! Simulator and optimizer for movable ("spider") RIS assisted mmWave MIMO links.
//!
//! The crate is organised bottom-up:
//!
//! - [`scenario`]: configuration, deployment geometry and derived constants.
//! - [`channel`]: Saleh-Valenzuela link channels over uniform rectangular arrays.
//! - [`beamforming`]: angular hybrid beamforming (quantized RF beams plus SVD baseband)
//!   and the achievable-rate objective.
//! - [`optimizer`]: particle-swarm search over RIS position and phase shifts, and a
//!   brute-force grid oracle for small instances.
//! - [`baselines`]: fixed RIS, random-phase and decode-and-forward relay references.
//! - [`harness`]: Monte Carlo sweeps, CSV/metadata output and plot scripts.

pub mod baselines;
pub mod beamforming;
pub mod channel;
pub mod error;
pub mod harness;
pub mod optimizer;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use scenario::{ArrayDims, DeploymentGeometry, Scenario, SystemConfig};
