use std::collections::HashMap;

use super::VisitCounter;
use crate::hashing::CountKey;
use crate::{Error, Result};

/// Hash-table counter: exact counts, absent keys read as zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactCounter {
    table: HashMap<CountKey, u64>,
}

impl ExactCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CountKey, u64)> {
        self.table.iter().map(|(k, &v)| (k, v))
    }

    pub(crate) fn insert_raw(&mut self, key: CountKey, count: u64) {
        self.table.insert(key, count);
    }
}

impl VisitCounter for ExactCounter {
    fn increment(&mut self, key: &CountKey) -> Result<u64> {
        let slot = self.table.entry(key.clone()).or_insert(0);
        *slot = slot.checked_add(1).ok_or(Error::CountOverflow)?;
        Ok(*slot)
    }

    fn query(&self, key: &CountKey) -> u64 {
        self.table.get(key).copied().unwrap_or(0)
    }

    fn memory_bytes(&self) -> usize {
        self.table
            .keys()
            .map(|k| k.as_bytes().len() + std::mem::size_of::<CountKey>() + 8)
            .sum()
    }
}
