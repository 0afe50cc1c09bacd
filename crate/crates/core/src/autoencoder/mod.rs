//! Dense autoencoder with a sigmoid binary-code layer.
//!
//! Architecture: `input -> hidden.. (ReLU) -> code (sigmoid) -> hidden.. (ReLU)
//! -> input (sigmoid)`, with the decoder mirroring the encoder. During
//! training uniform noise `U(-a, a)` is added to the code activations before
//! they reach the decoder, and the loss adds a binarization penalty
//! `(lambda / D) * sum_i min((1 - b_i)^2, b_i^2)` to the Bernoulli negative
//! log-likelihood of the reconstruction.

mod adam;
mod checkpoint;
mod hash;
mod model;
mod replay;

pub use adam::Adam;
pub use hash::{binarize, learned_hash};
pub use model::{
    binarization_penalty, AutoencoderModel, Dense, ForwardOutput, Gradient, Noise, TrainBatch,
    CLAMP_EPS,
};
pub use replay::ReplayPool;
