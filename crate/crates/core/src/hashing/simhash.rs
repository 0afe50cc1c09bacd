use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_finite, BinaryCode};
use crate::{rng, Error, Result};

/// Angular locality-sensitive hash: the sign pattern of a fixed Gaussian
/// random projection.
///
/// The `k x dim` projection matrix is drawn once at construction from a
/// ChaCha8 stream seeded with `seed` (row-major, one `N(0, 1)` sample per
/// entry), so `(k, dim, seed)` fully determines the hasher.
#[derive(Debug, Clone, PartialEq)]
pub struct SimHasher {
    k: usize,
    dim: usize,
    seed: u64,
    projection: Vec<f64>,
}

impl SimHasher {
    pub fn new(k: usize, dim: usize, seed: u64) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::InvalidDimension(format!(
                "simhash needs k >= 1 and dim >= 1, got k={k}, dim={dim}"
            )));
        }
        let mut rng = rng::seeded(seed);
        let projection = (0..k * dim).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self {
            k,
            dim,
            seed,
            projection,
        })
    }

    /// Builds a hasher from an explicit row-major `k x dim` matrix.
    pub fn from_matrix(k: usize, dim: usize, projection: Vec<f64>) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::InvalidDimension(format!(
                "simhash needs k >= 1 and dim >= 1, got k={k}, dim={dim}"
            )));
        }
        if projection.len() != k * dim {
            return Err(Error::DimensionMismatch {
                expected: k * dim,
                got: projection.len(),
            });
        }
        check_finite(&projection)?;
        Ok(Self {
            k,
            dim,
            seed: 0,
            projection,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &[f64] {
        &self.projection
    }

    /// Projection `A x` before taking signs.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        check_finite(x)?;
        Ok(self
            .projection
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Bit `i` is set iff `(A x)_i >= 0`; a zero projection counts as positive.
    pub fn hash(&self, x: &[f64]) -> Result<BinaryCode> {
        let projected = self.project(x)?;
        Ok(BinaryCode::from_bits(projected.iter().map(|&v| v >= 0.0)))
    }
}
