//! Static hash functions that discretize observations, and the canonical
//! byte encoding used as a counting key.

mod bass;
mod grid;
mod key;
mod simhash;

pub use bass::{bass_features, BassConfig, Image};
pub use grid::{grid_hash, GridHashConfig};
pub use key::{encode_key, BinaryCode, Code, CountKey};
pub use simhash::SimHasher;

pub(crate) fn check_finite(x: &[f64]) -> crate::Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(crate::Error::NonFiniteInput)
    }
}
