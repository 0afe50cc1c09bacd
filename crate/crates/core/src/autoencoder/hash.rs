use super::AutoencoderModel;
use crate::hashing::{BinaryCode, SimHasher};
use crate::{Error, Result};

/// Round-half-up of code activations.
pub fn binarize(code: &[f64]) -> BinaryCode {
    BinaryCode::from_bits(code.iter().map(|&b| b >= 0.5))
}

/// Binarized eval-mode code of `x`, downsampled to `downsampler.k()` bits by SimHash.
pub fn learned_hash(
    model: &AutoencoderModel,
    x: &[f64],
    downsampler: &SimHasher,
) -> Result<BinaryCode> {
    if downsampler.dim() != model.code_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.code_dim(),
            got: downsampler.dim(),
        });
    }
    let code = binarize(&model.encode(x)?);
    downsampler.hash(&code.to_unit_vector())
}
