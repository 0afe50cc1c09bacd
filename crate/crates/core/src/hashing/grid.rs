use super::check_finite;
use crate::{Error, Result};

/// Per-dimension cell widths for feature-grid discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHashConfig {
    grid_sizes: Vec<f64>,
}

impl GridHashConfig {
    pub fn new(grid_sizes: Vec<f64>) -> Result<Self> {
        if grid_sizes.is_empty() {
            return Err(Error::InvalidDimension("empty grid".into()));
        }
        if let Some((index, &value)) = grid_sizes
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::NonPositiveGridSize { index, value });
        }
        Ok(Self { grid_sizes })
    }

    pub fn grid_sizes(&self) -> &[f64] {
        &self.grid_sizes
    }
}

/// `floor(x_i / s_i)` per coordinate (mathematical floor, so `-0.1 -> -1`).
pub fn grid_hash(x: &[f64], cfg: &GridHashConfig) -> Result<Vec<i64>> {
    if x.len() != cfg.grid_sizes.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.grid_sizes.len(),
            got: x.len(),
        });
    }
    check_finite(x)?;
    Ok(x.iter()
        .zip(&cfg.grid_sizes)
        .map(|(v, s)| (v / s).floor() as i64)
        .collect())
}
