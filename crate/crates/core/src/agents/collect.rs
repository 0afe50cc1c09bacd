use rand::Rng;

use super::{Step, Trajectory};
use crate::envs::{Environment, Observation};
use crate::rng::SeededRng;
use crate::Result;

pub trait Policy {
    fn act(&self, observation: &Observation, rng: &mut SeededRng) -> Result<usize>;
}

/// Uniformly random actions.
#[derive(Debug, Clone, Copy)]
pub struct UniformPolicy {
    pub action_count: usize,
}

impl Policy for UniformPolicy {
    fn act(&self, _: &Observation, rng: &mut SeededRng) -> Result<usize> {
        Ok(rng.random_range(0..self.action_count))
    }
}

/// Runs whole episodes until at least `batch_size` steps are collected.
/// Bonus fields are left at zero.
pub fn collect_batch(
    env: &mut dyn Environment,
    policy: &dyn Policy,
    batch_size: usize,
    rng: &mut SeededRng,
) -> Result<Vec<Trajectory>> {
    assert!(batch_size >= 1, "batch size must be positive");
    let mut out = Vec::new();
    let mut total = 0;
    while total < batch_size {
        let episode_seed: u64 = rng.random();
        let mut obs = env.reset(episode_seed);
        let mut steps = Vec::new();
        loop {
            let action = policy.act(&obs, rng)?;
            let r = env.step(action)?;
            let done = r.done;
            steps.push(Step {
                observation: std::mem::replace(&mut obs, r.observation),
                action,
                true_reward: r.reward,
                bonus_reward: 0.0,
                done,
                terminal: r.terminal,
            });
            if done {
                break;
            }
        }
        total += steps.len();
        out.push(Trajectory::new(steps, obs));
    }
    Ok(out)
}
