use super::VisitCounter;
use crate::hashing::CountKey;
use crate::rng::mix64;
use crate::{Error, Result};

/// The default "6 M" prime set.
pub const PRIMES_6M: [u64; 6] = [999_931, 999_953, 999_959, 999_961, 999_979, 999_983];

/// Six primes near one thousand, for statistical tests at small scale.
pub const PRIMES_NEAR_1K: [u64; 6] = [991, 997, 1009, 1013, 1019, 1021];

/// Folds key bytes to a 64-bit integer: FNV-1a over the bytes, followed by
/// the SplitMix64 finalizer to spread low-entropy inputs over all bits.
pub fn fold_key(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix64(h)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d <= n / d {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Count-Min sketch / counting Bloom filter over prime-modulus rows.
///
/// Row `j` holds `p_j` counters and maps a key to cell `fold_key(key) mod p_j`.
/// Incrementing touches one cell per row; a query returns the row minimum,
/// which can over-count but never under-count.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMinSketch {
    primes: Vec<u64>,
    rows: Vec<Vec<u64>>,
}

impl CountMinSketch {
    pub fn new(primes: &[u64]) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::InvalidCounter("at least one prime is required".into()));
        }
        for (i, &p) in primes.iter().enumerate() {
            if !is_prime(p) {
                return Err(Error::InvalidCounter(format!("{p} is not prime")));
            }
            if primes[..i].contains(&p) {
                return Err(Error::InvalidCounter(format!("prime {p} repeated")));
            }
        }
        Ok(Self {
            primes: primes.to_vec(),
            rows: primes.iter().map(|&p| vec![0; p as usize]).collect(),
        })
    }

    pub fn with_6m() -> Self {
        Self::new(&PRIMES_6M).expect("built-in primes are valid")
    }

    pub(crate) fn from_parts(primes: Vec<u64>, rows: Vec<Vec<u64>>) -> Result<Self> {
        let mut s = Self::new(&primes)?;
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != s.rows[j].len() {
                return Err(Error::Snapshot(format!(
                    "row {j} has {} cells, expected {}",
                    row.len(),
                    s.rows[j].len()
                )));
            }
            s.rows[j] = row;
        }
        Ok(s)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn depth(&self) -> usize {
        self.primes.len()
    }

    pub fn row(&self, j: usize) -> &[u64] {
        &self.rows[j]
    }

    /// Increments the cells addressed by an already folded key.
    pub fn increment_folded(&mut self, folded: u64) -> Result<u64> {
        let mut min = u64::MAX;
        for (p, row) in self.primes.iter().zip(&self.rows) {
            let cell = row[(folded % p) as usize];
            if cell == u64::MAX {
                return Err(Error::CountOverflow);
            }
        }
        for (p, row) in self.primes.iter().zip(self.rows.iter_mut()) {
            let cell = &mut row[(folded % p) as usize];
            *cell += 1;
            min = min.min(*cell);
        }
        Ok(min)
    }

    pub fn query_folded(&self, folded: u64) -> u64 {
        self.primes
            .iter()
            .zip(&self.rows)
            .map(|(p, row)| row[(folded % p) as usize])
            .min()
            .unwrap_or(0)
    }

    /// Zeroes every counter, keeping the allocation.
    pub fn clear(&mut self) {
        for row in &mut self.rows {
            row.fill(0);
        }
    }
}

impl VisitCounter for CountMinSketch {
    fn increment(&mut self, key: &CountKey) -> Result<u64> {
        self.increment_folded(fold_key(key.as_bytes()))
    }

    fn query(&self, key: &CountKey) -> u64 {
        self.query_folded(fold_key(key.as_bytes()))
    }

    fn memory_bytes(&self) -> usize {
        self.rows.iter().map(|r| r.len() * 8).sum()
    }
}
