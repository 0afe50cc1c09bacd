//! Count-based exploration through hashing.
//!
//! Observations are discretized by a hash function (SimHash, BASS cell
//! features, a feature grid, or a learned binary autoencoder code), visits
//! are counted exactly or with a Count-Min sketch, and the agent is trained
//! on the environment reward plus a bonus `beta / sqrt(n)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`hashing`] – static hash functions and canonical count keys.
//! * [`counting`] – exact and sketch counters, bonus computation, snapshots.
//! * [`autoencoder`] – the binarizing autoencoder used for learned codes.
//! * [`envs`] – sparse-reward toy environments.
//! * [`agents`] – Q-learning, REINFORCE and the bonus pipeline.
//! * [`harness`] – config files, experiment runs, sweeps and validation suites.

pub mod agents;
pub mod autoencoder;
pub mod counting;
pub mod envs;
pub mod error;
pub mod harness;
pub mod hashing;
pub mod rng;

pub use error::{Error, Result};
