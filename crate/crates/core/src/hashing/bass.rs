use crate::{Error, Result};

/// Row-major `height x width x channels` integer image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<i32>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<i32>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::DimensionMismatch {
                expected: height * width * channels,
                got: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0; height * width * channels],
        }
    }

    pub fn get(&self, y: usize, x: usize, z: usize) -> i32 {
        self.data[(y * self.width + x) * self.channels + z]
    }

    pub fn set(&mut self, y: usize, x: usize, z: usize, v: i32) {
        self.data[(y * self.width + x) * self.channels + z] = v;
    }
}

/// Cell size and bin count for BASS features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BassConfig {
    pub cell_size: usize,
    pub bins: u32,
}

impl BassConfig {
    pub fn new(cell_size: usize, bins: u32) -> Result<Self> {
        if cell_size == 0 || bins == 0 {
            return Err(Error::InvalidDimension(format!(
                "bass needs cell_size >= 1 and bins >= 1, got C={cell_size}, B={bins}"
            )));
        }
        Ok(Self { cell_size, bins })
    }
}

/// Cell-averaged, bin-quantized image features.
///
/// Each output entry is `floor(B * cell_sum / (255 * C^2))` for one
/// `C x C` cell and one channel, laid out row-major as
/// `(H/C) x (W/C) x channels`. A fully saturated cell yields `B`.
pub fn bass_features(image: &Image, cfg: &BassConfig) -> Result<Image> {
    let c = cfg.cell_size;
    if c == 0 || cfg.bins == 0 {
        return Err(Error::InvalidDimension("bass config with zero entry".into()));
    }
    if !image.height.is_multiple_of(c) || !image.width.is_multiple_of(c) {
        return Err(Error::ShapeNotDivisible {
            height: image.height,
            width: image.width,
            cell: c,
        });
    }
    if let Some(&v) = image.data.iter().find(|&&v| !(0..=255).contains(&v)) {
        return Err(Error::IntensityOutOfRange(i64::from(v)));
    }
    let (rows, cols) = (image.height / c, image.width / c);
    let denom = 255 * (c * c) as u64;
    let mut out = Image::zeros(rows, cols, image.channels);
    for i in 0..rows {
        for j in 0..cols {
            for z in 0..image.channels {
                let mut sum = 0u64;
                for y in i * c..(i + 1) * c {
                    for x in j * c..(j + 1) * c {
                        sum += image.get(y, x, z) as u64;
                    }
                }
                // integer floor avoids float rounding at bin edges
                let feature = u64::from(cfg.bins) * sum / denom;
                out.set(i, j, z, feature as i32);
            }
        }
    }
    Ok(out)
}
