//! Visit-count storage and the count-derived exploration bonus.

mod bonus;
mod cms;
mod exact;
mod snapshot;

pub use bonus::{bonus, make_key, BonusConfig, CountMode};
pub use cms::{fold_key, CountMinSketch, PRIMES_6M, PRIMES_NEAR_1K};
pub use exact::ExactCounter;

use crate::hashing::CountKey;
use crate::Result;

/// Common interface of the exact and sketch counters.
pub trait VisitCounter {
    /// Adds one visit and returns the count reported after the update.
    fn increment(&mut self, key: &CountKey) -> Result<u64>;
    fn query(&self, key: &CountKey) -> u64;
    /// Approximate heap footprint of the count storage.
    fn memory_bytes(&self) -> usize;
}

/// Counter backend selected at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum Counter {
    Exact(ExactCounter),
    Sketch(CountMinSketch),
}

impl Counter {
    pub fn to_snapshot(&self) -> Vec<u8> {
        snapshot::encode(self)
    }

    pub fn from_snapshot(bytes: &[u8]) -> Result<Self> {
        snapshot::decode(bytes)
    }
}

impl VisitCounter for Counter {
    fn increment(&mut self, key: &CountKey) -> Result<u64> {
        match self {
            Counter::Exact(c) => c.increment(key),
            Counter::Sketch(c) => c.increment(key),
        }
    }

    fn query(&self, key: &CountKey) -> u64 {
        match self {
            Counter::Exact(c) => c.query(key),
            Counter::Sketch(c) => c.query(key),
        }
    }

    fn memory_bytes(&self) -> usize {
        match self {
            Counter::Exact(c) => c.memory_bytes(),
            Counter::Sketch(c) => c.memory_bytes(),
        }
    }
}

impl From<ExactCounter> for Counter {
    fn from(c: ExactCounter) -> Self {
        Counter::Exact(c)
    }
}

impl From<CountMinSketch> for Counter {
    fn from(c: CountMinSketch) -> Self {
        Counter::Sketch(c)
    }
}
