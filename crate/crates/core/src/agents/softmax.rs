use rand::Rng;

use super::{Policy, Trajectory};
use crate::envs::Observation;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Linear softmax policy: `logits = W [features; 1]`, temperature 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicy {
    action_count: usize,
    input_dim: usize,
    /// Row-major `action_count x (input_dim + 1)`; the last column is the bias.
    weights: Vec<f64>,
}

impl SoftmaxPolicy {
    pub fn new(input_dim: usize, action_count: usize) -> Self {
        Self {
            action_count,
            input_dim,
            weights: vec![0.0; action_count * (input_dim + 1)],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, w: Vec<f64>) {
        assert_eq!(w.len(), self.weights.len());
        self.weights = w;
    }

    fn row(&self, a: usize) -> &[f64] {
        let w = self.input_dim + 1;
        &self.weights[a * w..(a + 1) * w]
    }

    pub fn probabilities(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: features.len(),
            });
        }
        let logits: Vec<f64> = (0..self.action_count)
            .map(|a| {
                let row = self.row(a);
                row[self.input_dim] + row.iter().zip(features).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        Ok(exp.into_iter().map(|e| e / total).collect())
    }

    /// Discounted train-reward returns per step, and their batch mean.
    fn advantages(trajectories: &[Trajectory], gamma: f64) -> Vec<Vec<f64>> {
        let returns: Vec<Vec<f64>> = trajectories
            .iter()
            .map(|t| {
                let mut g = 0.0;
                let mut out: Vec<f64> = t
                    .steps
                    .iter()
                    .rev()
                    .map(|s| {
                        g = s.train_reward() + gamma * g;
                        g
                    })
                    .collect();
                out.reverse();
                out
            })
            .collect();
        let count: usize = returns.iter().map(Vec::len).sum();
        let baseline = returns.iter().flatten().sum::<f64>() / count.max(1) as f64;
        returns
            .into_iter()
            .map(|r| r.into_iter().map(|g| g - baseline).collect())
            .collect()
    }

    /// REINFORCE estimate `mean_t (G_t - b) grad log pi(a_t | s_t)` with `b`
    /// the mean return over the batch.
    pub fn policy_gradient(&self, trajectories: &[Trajectory], gamma: f64) -> Result<Vec<f64>> {
        let adv = Self::advantages(trajectories, gamma);
        let count: usize = adv.iter().map(Vec::len).sum();
        let mut grad = vec![0.0; self.weights.len()];
        let w = self.input_dim + 1;
        for (t, adv) in trajectories.iter().zip(&adv) {
            for (s, &a_t) in t.steps.iter().zip(adv) {
                if a_t == 0.0 {
                    continue;
                }
                let x = s.observation.features();
                let p = self.probabilities(&x)?;
                for k in 0..self.action_count {
                    let coef = a_t * (f64::from(u8::from(k == s.action)) - p[k]) / count as f64;
                    let g = &mut grad[k * w..(k + 1) * w];
                    for (gi, xi) in g.iter_mut().zip(&x) {
                        *gi += coef * xi;
                    }
                    g[self.input_dim] += coef;
                }
            }
        }
        Ok(grad)
    }

    /// Surrogate `mean_t (G_t - b) log pi(a_t | s_t)` whose gradient is
    /// [`Self::policy_gradient`] (returns held fixed).
    pub fn surrogate(&self, trajectories: &[Trajectory], gamma: f64) -> Result<f64> {
        let adv = Self::advantages(trajectories, gamma);
        let count: usize = adv.iter().map(Vec::len).sum();
        let mut total = 0.0;
        for (t, adv) in trajectories.iter().zip(&adv) {
            for (s, &a_t) in t.steps.iter().zip(adv) {
                let p = self.probabilities(&s.observation.features())?;
                total += a_t * p[s.action].ln();
            }
        }
        Ok(total / count.max(1) as f64)
    }

    /// Gradient ascent step on the REINFORCE estimate.
    pub fn reinforce_update(
        &mut self,
        trajectories: &[Trajectory],
        learning_rate: f64,
        gamma: f64,
    ) -> Result<()> {
        if learning_rate == 0.0 {
            return Ok(());
        }
        let grad = self.policy_gradient(trajectories, gamma)?;
        for (w, g) in self.weights.iter_mut().zip(grad) {
            *w += learning_rate * g;
        }
        Ok(())
    }
}

impl Policy for SoftmaxPolicy {
    fn act(&self, observation: &Observation, rng: &mut SeededRng) -> Result<usize> {
        let p = self.probabilities(&observation.features())?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, pa) in p.iter().enumerate() {
            acc += pa;
            if u < acc {
                return Ok(a);
            }
        }
        Ok(self.action_count - 1)
    }
}
