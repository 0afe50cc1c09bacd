use crate::envs::Observation;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Observation,
    pub action: usize,
    pub true_reward: f64,
    pub bonus_reward: f64,
    pub done: bool,
    /// The step entered an absorbing goal state.
    pub terminal: bool,
}

impl Step {
    pub fn train_reward(&self) -> f64 {
        self.true_reward + self.bonus_reward
    }
}

/// One episode. `final_observation` is the state reached by the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub final_observation: Observation,
    episode_return_true: f64,
}

impl Trajectory {
    pub fn new(steps: Vec<Step>, final_observation: Observation) -> Self {
        let episode_return_true = steps.iter().map(|s| s.true_reward).sum();
        Self {
            steps,
            final_observation,
            episode_return_true,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Sum of environment rewards, fixed at collection time.
    pub fn episode_return_true(&self) -> f64 {
        self.episode_return_true
    }

    pub fn episode_return_train(&self) -> f64 {
        self.steps.iter().map(Step::train_reward).sum()
    }

    /// Observation following step `i`.
    pub fn next_observation(&self, i: usize) -> &Observation {
        self.steps
            .get(i + 1)
            .map(|s| &s.observation)
            .unwrap_or(&self.final_observation)
    }

    /// Fails if the stored true return no longer matches the step rewards,
    /// i.e. a bonus leaked into the evaluation signal.
    pub fn check_purity(&self) -> Result<()> {
        let recomputed: f64 = self.steps.iter().map(|s| s.true_reward).sum();
        if recomputed.to_bits() == self.episode_return_true.to_bits() {
            Ok(())
        } else {
            Err(Error::Ordering("bonus leaked into the true episode return"))
        }
    }
}
