use rand::Rng;

use crate::{Error, Result};

/// Noisy code activations are clamped to `[CLAMP_EPS, 1 - CLAMP_EPS]`.
pub const CLAMP_EPS: f64 = 1e-6;

/// Fully connected layer, `weights` row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn glorot(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let mut layer = Self::zeros(inputs, outputs);
        for w in &mut layer.weights {
            *w = rng.random_range(-limit..limit);
        }
        layer
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    /// Accumulates parameter gradients for upstream `delta` and returns the
    /// gradient with respect to the layer input.
    fn backward(&self, x: &[f64], delta: &[f64], grad: &mut Dense) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad.bias[o] += d;
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let grow = &mut grad.weights[o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                grow[i] += d * x[i];
                dx[i] += d * row[i];
            }
        }
        dx
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.bias)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Per-unit binarization penalty `min((1 - b)^2, b^2)`.
pub fn binarization_penalty(b: f64) -> f64 {
    ((1.0 - b) * (1.0 - b)).min(b * b)
}

/// Derivative of [`binarization_penalty`]; 0 at the kink `b = 0.5`.
fn binarization_slope(b: f64) -> f64 {
    if b < 0.5 {
        2.0 * b
    } else if b > 0.5 {
        -2.0 * (1.0 - b)
    } else {
        0.0
    }
}

/// N observation vectors with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainBatch {
    inputs: Vec<Vec<f64>>,
}

impl TrainBatch {
    pub fn new(inputs: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let dim = inputs[0].len();
        for x in &inputs {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if !x.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
                return Err(Error::NonFiniteInput);
            }
        }
        Ok(Self { inputs })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }
}

/// One noise realization: `U(-a, a)` per sample and code unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Noise(pub Vec<Vec<f64>>);

/// Gradient with the same layer shapes as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<Dense>,
}

impl Gradient {
    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.params().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// Sigmoid code activations `b(x)`, before noise.
    pub code: Vec<f64>,
    /// Bernoulli means of the reconstruction.
    pub reconstruction: Vec<f64>,
}

/// Activations kept for backprop.
struct Trace {
    /// Input to each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    pre: Vec<Vec<f64>>,
    code: Vec<f64>,
    /// Whether the noisy code value stayed inside the clamp range.
    code_pass: Vec<bool>,
    logits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    layers: Vec<Dense>,
    code_layer: usize,
    code_dim: usize,
    noise_amplitude: f64,
    lambda: f64,
}

impl AutoencoderModel {
    /// `layer_sizes` lists the input width followed by the encoder hidden
    /// widths; the decoder mirrors them back to the input width.
    pub fn new(
        layer_sizes: &[usize],
        code_dim: usize,
        noise_amplitude: f64,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = crate::rng::seeded(seed);
        Self::build(layer_sizes, code_dim, noise_amplitude, lambda, |i, o| {
            Dense::glorot(i, o, &mut rng)
        })
    }

    /// Same architecture with every weight and bias zero.
    pub fn zeros(
        layer_sizes: &[usize],
        code_dim: usize,
        noise_amplitude: f64,
        lambda: f64,
    ) -> Result<Self> {
        Self::build(layer_sizes, code_dim, noise_amplitude, lambda, Dense::zeros)
    }

    fn build(
        layer_sizes: &[usize],
        code_dim: usize,
        noise_amplitude: f64,
        lambda: f64,
        mut make: impl FnMut(usize, usize) -> Dense,
    ) -> Result<Self> {
        if !(noise_amplitude.is_finite() && noise_amplitude > 0.25) {
            return Err(Error::NoiseTooSmall(noise_amplitude));
        }
        if code_dim == 0 || layer_sizes.is_empty() || layer_sizes.contains(&0) {
            return Err(Error::InvalidDimension(format!(
                "autoencoder needs non-zero widths, got {layer_sizes:?} with code_dim {code_dim}"
            )));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::config("ae.lambda", format!("must be >= 0, got {lambda}")));
        }
        let mut widths: Vec<usize> = layer_sizes.to_vec();
        widths.push(code_dim);
        widths.extend(layer_sizes.iter().rev());
        let layers: Vec<Dense> = widths.windows(2).map(|w| make(w[0], w[1])).collect();
        Ok(Self {
            code_layer: layer_sizes.len() - 1,
            layers,
            code_dim,
            noise_amplitude,
            lambda,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    pub fn noise_amplitude(&self) -> f64 {
        self.noise_amplitude
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    /// Encoder hidden widths, excluding input and code.
    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.code_layer]
            .iter()
            .map(|l| l.outputs)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.params().copied()).collect()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.params_mut())
    }

    pub fn set_params(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.param_count());
        for (p, v) in self.params_mut().zip(values) {
            *p = *v;
        }
    }

    pub fn sample_noise(&self, samples: usize, rng: &mut impl Rng) -> Noise {
        let a = self.noise_amplitude;
        Noise(
            (0..samples)
                .map(|_| (0..self.code_dim).map(|_| rng.random_range(-a..a)).collect())
                .collect(),
        )
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteInput)
        }
    }

    fn trace(&self, x: &[f64], noise: Option<&[f64]>) -> Trace {
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n);
        let mut a = x.to_vec();
        let mut code = Vec::new();
        let mut code_pass = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&a);
            inputs.push(std::mem::take(&mut a));
            a = if i == self.code_layer {
                code = z.iter().map(|&v| sigmoid(v)).collect();
                match noise {
                    Some(u) => {
                        code_pass = code
                            .iter()
                            .zip(u)
                            .map(|(b, e)| (CLAMP_EPS..=1.0 - CLAMP_EPS).contains(&(b + e)))
                            .collect();
                        code.iter()
                            .zip(u)
                            .map(|(b, e)| (b + e).clamp(CLAMP_EPS, 1.0 - CLAMP_EPS))
                            .collect()
                    }
                    None => {
                        code_pass = vec![true; code.len()];
                        code.clone()
                    }
                }
            } else if i + 1 == n {
                z.clone()
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            pre.push(z);
        }
        Trace {
            inputs,
            pre,
            code,
            code_pass,
            logits: a,
        }
    }

    /// Eval-mode forward pass: no noise, fully deterministic.
    pub fn forward_eval(&self, x: &[f64]) -> Result<ForwardOutput> {
        self.check_input(x)?;
        let t = self.trace(x, None);
        Ok(ForwardOutput {
            code: t.code,
            reconstruction: t.logits.iter().map(|&z| sigmoid(z)).collect(),
        })
    }

    /// Forward pass; in train mode one noise draw per code unit is taken from `rng`.
    pub fn forward(&self, x: &[f64], rng: &mut impl Rng, train: bool) -> Result<ForwardOutput> {
        if !train {
            return self.forward_eval(x);
        }
        self.check_input(x)?;
        let noise = self.sample_noise(1, rng);
        let t = self.trace(x, Some(&noise.0[0]));
        Ok(ForwardOutput {
            code: t.code,
            reconstruction: t.logits.iter().map(|&z| sigmoid(z)).collect(),
        })
    }

    /// Eval-mode code activations.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        for layer in &self.layers[..self.code_layer] {
            a = layer.apply(&a).into_iter().map(|v| v.max(0.0)).collect();
        }
        Ok(self.layers[self.code_layer]
            .apply(&a)
            .into_iter()
            .map(sigmoid)
            .collect())
    }

    fn check_batch(&self, batch: &TrainBatch, noise: &Noise) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if noise.0.len() != batch.len() {
            return Err(Error::DimensionMismatch {
                expected: batch.len(),
                got: noise.0.len(),
            });
        }
        for x in batch.inputs() {
            self.check_input(x)?;
        }
        Ok(())
    }

    fn sample_terms(&self, x: &[f64], t: &Trace) -> (f64, f64) {
        let nll: f64 = t
            .logits
            .iter()
            .zip(x)
            .map(|(&z, &v)| softplus(z) - v * z)
            .sum();
        let penalty: f64 = t.code.iter().map(|&b| binarization_penalty(b)).sum();
        (nll, penalty * self.lambda / self.code_dim as f64)
    }

    /// Loss at a fixed noise realization.
    pub fn loss_with_noise(&self, batch: &TrainBatch, noise: &Noise) -> Result<f64> {
        self.check_batch(batch, noise)?;
        let total: f64 = batch
            .inputs()
            .iter()
            .zip(&noise.0)
            .map(|(x, u)| {
                let (nll, pen) = self.sample_terms(x, &self.trace(x, Some(u)));
                nll + pen
            })
            .sum();
        Ok(total / batch.len() as f64)
    }

    /// Batch loss under a fresh noise draw.
    pub fn loss(&self, batch: &TrainBatch, rng: &mut impl Rng) -> Result<f64> {
        let noise = self.sample_noise(batch.len(), rng);
        self.loss_with_noise(batch, &noise)
    }

    /// Mean reconstruction NLL and mean binarization term without noise.
    pub fn loss_terms_eval(&self, batch: &TrainBatch) -> Result<(f64, f64)> {
        let mut nll = 0.0;
        let mut pen = 0.0;
        for x in batch.inputs() {
            self.check_input(x)?;
            let (a, b) = self.sample_terms(x, &self.trace(x, None));
            nll += a;
            pen += b;
        }
        let n = batch.len() as f64;
        Ok((nll / n, pen / n))
    }

    /// Exact gradient of [`Self::loss_with_noise`], treating the noise as constant.
    pub fn grad_with_noise(&self, batch: &TrainBatch, noise: &Noise) -> Result<(f64, Gradient)> {
        self.check_batch(batch, noise)?;
        let mut grad = Gradient {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.inputs, l.outputs))
                .collect(),
        };
        let scale = 1.0 / batch.len() as f64;
        let pen_scale = self.lambda / self.code_dim as f64;
        let mut total = 0.0;
        for (x, u) in batch.inputs().iter().zip(&noise.0) {
            let t = self.trace(x, Some(u));
            let (nll, pen) = self.sample_terms(x, &t);
            total += nll + pen;
            // d(softplus(z) - x z)/dz = sigmoid(z) - x
            let mut delta: Vec<f64> = t
                .logits
                .iter()
                .zip(x)
                .map(|(&z, &v)| (sigmoid(z) - v) * scale)
                .collect();
            for i in (0..self.layers.len()).rev() {
                let da = self.layers[i].backward(&t.inputs[i], &delta, &mut grad.layers[i]);
                if i == 0 {
                    break;
                }
                let below = i - 1;
                delta = if below == self.code_layer {
                    da.iter()
                        .zip(&t.code)
                        .zip(&t.code_pass)
                        .map(|((&g, &b), &pass)| {
                            let through = if pass { g } else { 0.0 };
                            let db = through + pen_scale * scale * binarization_slope(b);
                            db * b * (1.0 - b)
                        })
                        .collect()
                } else {
                    da.iter()
                        .zip(&t.pre[below])
                        .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                        .collect()
                };
            }
        }
        Ok((total * scale, grad))
    }

    pub fn grad(&self, batch: &TrainBatch, rng: &mut impl Rng) -> Result<(f64, Gradient)> {
        let noise = self.sample_noise(batch.len(), rng);
        self.grad_with_noise(batch, &noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn batch(rows: &[&[f64]]) -> TrainBatch {
        TrainBatch::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn noise_amplitude_must_exceed_quarter() {
        assert!(AutoencoderModel::new(&[4, 3], 2, 0.3, 10.0, 0).is_ok());
        assert_eq!(
            AutoencoderModel::new(&[4, 3], 2, 0.2, 10.0, 0),
            Err(Error::NoiseTooSmall(0.2))
        );
        assert!(AutoencoderModel::new(&[4, 3], 2, 0.25, 10.0, 0).is_err());
        assert!(AutoencoderModel::new(&[4, 3], 0, 0.3, 10.0, 0).is_err());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = AutoencoderModel::new(&[6, 5], 3, 0.3, 10.0, 11).unwrap();
        let b = AutoencoderModel::new(&[6, 5], 3, 0.3, 10.0, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, AutoencoderModel::new(&[6, 5], 3, 0.3, 10.0, 12).unwrap());
        for l in a.layers() {
            let lim = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= lim));
            assert!(l.bias.iter().all(|&b| b == 0.0));
        }
        let widths: Vec<(usize, usize)> = a.layers().iter().map(|l| (l.inputs, l.outputs)).collect();
        assert_eq!(widths, vec![(6, 5), (5, 3), (3, 5), (5, 6)]);
    }

    #[test]
    fn zero_model_codes_are_half() {
        let m = AutoencoderModel::zeros(&[3], 4, 0.3, 10.0).unwrap();
        let out = m.forward_eval(&[0.2, 0.9, 0.0]).unwrap();
        assert_eq!(out.code, vec![0.5; 4]);
        assert_eq!(out.reconstruction, vec![0.5; 3]);
    }

    #[test]
    fn eval_deterministic_train_seeded() {
        let m = AutoencoderModel::new(&[5, 4], 3, 0.3, 10.0, 1).unwrap();
        let x = [0.1, 0.5, 0.9, 0.0, 1.0];
        assert_eq!(m.forward_eval(&x).unwrap(), m.forward_eval(&x).unwrap());
        let a = m.forward(&x, &mut seeded(5), true).unwrap();
        let b = m.forward(&x, &mut seeded(5), true).unwrap();
        assert_eq!(a, b);
        let c = m.forward(&x, &mut seeded(6), true).unwrap();
        assert_ne!(a.reconstruction, c.reconstruction);
        assert!(a.code.iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(m.forward(&[0.0, f64::NAN, 0.0, 0.0, 0.0], &mut seeded(1), false), Err(Error::NonFiniteInput));
    }

    #[test]
    fn penalty_values() {
        assert_eq!(binarization_penalty(0.5), 0.25);
        assert_eq!(binarization_penalty(0.0), 0.0);
        assert_eq!(binarization_penalty(1.0), 0.0);
        assert!(binarization_penalty(0.3) > 0.0 && binarization_penalty(0.3) < 0.25);
        assert_eq!(binarization_slope(0.5), 0.0);
        for i in 1..1000 {
            let b = i as f64 / 1000.0;
            assert!(binarization_penalty(b) <= 0.25);
        }
    }

    #[test]
    fn lambda_zero_is_pure_nll() {
        let m0 = AutoencoderModel::new(&[3, 4], 2, 0.3, 0.0, 2).unwrap();
        let b = batch(&[&[0.0, 0.5, 1.0], &[1.0, 0.2, 0.3]]);
        let noise = m0.sample_noise(2, &mut seeded(3));
        let (nll_only, pen) = m0.loss_terms_eval(&b).unwrap();
        assert_eq!(pen, 0.0);
        let mut manual = 0.0;
        for (x, u) in b.inputs().iter().zip(&noise.0) {
            let t = m0.trace(x, Some(u));
            for (&z, &v) in t.logits.iter().zip(x) {
                let p = sigmoid(z);
                manual -= v * p.ln() + (1.0 - v) * (1.0 - p).ln();
            }
        }
        assert!((m0.loss_with_noise(&b, &noise).unwrap() - manual / 2.0).abs() < 1e-12);
        assert!(nll_only > 0.0);
    }

    #[test]
    fn loss_matches_formula_at_half_codes() {
        // zero model: b = 0.5 everywhere, reconstruction 0.5, so
        // loss = input_dim * ln 2 + lambda/D * D * 0.25 in eval mode
        let m = AutoencoderModel::zeros(&[3], 4, 0.3, 10.0).unwrap();
        let b = batch(&[&[0.0, 1.0, 0.5]]);
        let (nll, pen) = m.loss_terms_eval(&b).unwrap();
        assert!((nll - 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((pen - 2.5).abs() < 1e-12);
    }

    #[test]
    fn empty_batch_rejected() {
        assert_eq!(TrainBatch::new(vec![]), Err(Error::EmptyBatch));
        assert_eq!(TrainBatch::new(vec![vec![1.5]]), Err(Error::NonFiniteInput));
    }

    #[test]
    fn decoder_bias_gradient_one_unit_model() {
        // 1-1-1 model, zero input: the loss is softplus(z_out) + penalty, so
        // dL/d(output bias) = sigmoid(z_out) with z_out = w_dec * c + b_dec
        let mut m = AutoencoderModel::zeros(&[1], 1, 0.3, 10.0).unwrap();
        m.set_params(&[0.7, -0.2, 1.3, 0.4]);
        let b = batch(&[&[0.0]]);
        let noise = Noise(vec![vec![0.05]]);
        let (_, g) = m.grad_with_noise(&b, &noise).unwrap();
        let code = sigmoid(0.7 * 0.0 - 0.2);
        let z_out = 1.3 * (code + 0.05) + 0.4;
        let expected = 1.0 / (1.0 + (-z_out).exp());
        assert!((g.layers[1].bias[0] - expected).abs() < 1e-14);
        // the decoder weight sees the noisy code as its input
        assert!((g.layers[1].weights[0] - expected * (code + 0.05)).abs() < 1e-14);
    }

    #[test]
    fn penalty_gradient_vanishes_at_half() {
        // zero model, decoder weights zero: the only code gradient is from the
        // penalty, which is zero at b = 0.5
        let m = AutoencoderModel::zeros(&[2], 3, 0.3, 10.0).unwrap();
        let b = batch(&[&[0.3, 0.6]]);
        let (_, g) = m.grad_with_noise(&b, &Noise(vec![vec![0.0; 3]])).unwrap();
        assert!(g.layers[0].bias.iter().all(|&v| v == 0.0));
        assert!(g.layers[0].weights.iter().all(|&v| v == 0.0));
    }
}
