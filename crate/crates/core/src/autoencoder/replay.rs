use std::collections::VecDeque;

use rand::Rng;

/// Bounded FIFO of observations; the oldest entry is evicted first.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayPool {
    buffer: VecDeque<Vec<f64>>,
    capacity: usize,
}

impl ReplayPool {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            buffer: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
        }
    }

    pub fn push(&mut self, x: Vec<f64>) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(x);
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.buffer.iter()
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
        if self.buffer.is_empty() {
            return Vec::new();
        }
        (0..n)
            .map(|_| self.buffer[rng.random_range(0..self.buffer.len())].clone())
            .collect()
    }
}
