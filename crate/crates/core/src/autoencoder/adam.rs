use rand::Rng;

use super::{AutoencoderModel, TrainBatch};
use crate::{Error, Result};

/// Adam moment estimates with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(param_count: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn update<'a>(
        &mut self,
        params: impl Iterator<Item = &'a mut f64>,
        grads: &[f64],
        learning_rate: f64,
    ) -> Result<()> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::InvalidLearningRate(learning_rate));
        }
        assert_eq!(grads.len(), self.m.len(), "gradient length mismatch");
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, &g), m), v) in params.zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

impl AutoencoderModel {
    /// One Adam step on a freshly noised batch. Returns the loss before the update.
    pub fn train_step(
        &mut self,
        batch: &TrainBatch,
        optimizer: &mut Adam,
        learning_rate: f64,
        rng: &mut impl Rng,
    ) -> Result<f64> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::InvalidLearningRate(learning_rate));
        }
        let (loss, grad) = self.grad(batch, rng)?;
        optimizer.update(self.params_mut(), &grad.flatten(), learning_rate)?;
        Ok(loss)
    }
}
