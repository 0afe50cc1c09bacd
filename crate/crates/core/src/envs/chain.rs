use super::{EnvSpec, Environment, EpisodeClock, Observation, ObservationShape, StepResult};
use crate::{Error, Result};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Chain of `n` states; start at 0, reward +1 on reaching `n - 1`.
///
/// `right` moves one state up, `left` one state down (floored at 0). The
/// observation is the one-hot state vector and the horizon is `4 n`.
#[derive(Debug, Clone)]
pub struct ChainMdp {
    n: usize,
    seed: u64,
    state: usize,
    clock: EpisodeClock,
}

impl ChainMdp {
    pub fn new(n_states: usize, seed: u64) -> Result<Self> {
        if n_states < 3 {
            return Err(Error::InvalidSize(format!(
                "chain needs at least 3 states, got {n_states}"
            )));
        }
        Ok(Self {
            n: n_states,
            seed,
            state: 0,
            clock: EpisodeClock::default(),
        })
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn observe(&self) -> Observation {
        let mut v = vec![0.0; self.n];
        v[self.state] = 1.0;
        Observation::Vector(v)
    }
}

impl Environment for ChainMdp {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            observation: ObservationShape::Vector(self.n),
            action_count: 2,
            horizon: 4 * self.n,
        }
    }

    fn reset(&mut self, _episode_seed: u64) -> Observation {
        self.state = 0;
        self.clock.reset();
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        let spec = self.spec();
        self.clock.begin_step(action, &spec)?;
        self.state = if action == RIGHT {
            self.state + 1
        } else {
            self.state.saturating_sub(1)
        };
        let terminal = self.state == self.n - 1;
        let done = self.clock.finish_step(terminal, spec.horizon);
        Ok(StepResult {
            observation: self.observe(),
            reward: if terminal { 1.0 } else { 0.0 },
            done,
            terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::testing::{random_success_rate, rollout};

    #[test]
    fn reaching_the_end() {
        let mut env = ChainMdp::new(3, 0).unwrap();
        let steps = rollout(&mut env, &[RIGHT, RIGHT]);
        let rewards: Vec<f64> = steps.iter().map(|s| s.reward).collect();
        assert_eq!(rewards, vec![0.0, 1.0]);
        assert!(steps[1].done && steps[1].terminal);
    }

    #[test]
    fn all_left_never_rewards() {
        let mut env = ChainMdp::new(10, 0).unwrap();
        let steps = rollout(&mut env, &[LEFT; 1000]);
        assert_eq!(steps.len(), 40);
        assert!(steps.iter().all(|s| s.reward == 0.0));
        assert!(steps.last().unwrap().done && !steps.last().unwrap().terminal);
        assert_eq!(env.state(), 0);
    }

    #[test]
    fn one_hot_observation() {
        let mut env = ChainMdp::new(5, 0).unwrap();
        assert_eq!(env.reset(0), Observation::Vector(vec![1.0, 0.0, 0.0, 0.0, 0.0]));
        let s = env.step(RIGHT).unwrap();
        assert_eq!(s.observation, Observation::Vector(vec![0.0, 1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn errors() {
        assert!(matches!(ChainMdp::new(2, 0), Err(Error::InvalidSize(_))));
        let mut env = ChainMdp::new(3, 0).unwrap();
        assert_eq!(env.step(RIGHT), Err(Error::StepBeforeReset));
        env.reset(0);
        assert_eq!(
            env.step(2),
            Err(Error::InvalidAction {
                action: 2,
                action_count: 2
            })
        );
        env.step(RIGHT).unwrap();
        env.step(RIGHT).unwrap();
        assert_eq!(env.step(RIGHT), Err(Error::StepAfterDone));
    }

    #[test]
    fn random_policy_rarely_succeeds() {
        // Monte Carlo over 10^4 episodes establishes sparsity
        let mut env = ChainMdp::new(50, 0).unwrap();
        let rate = random_success_rate(&mut env, 10_000, 1);
        assert!(rate < 0.01, "random success rate {rate}");
        let mut env = ChainMdp::new(22, 0).unwrap();
        assert!(random_success_rate(&mut env, 10_000, 2) < 0.05);
        // with T = 4n the n = 20 chain sits just above 5%: exact dynamic
        // programming over the reflected walk gives 0.058647
        let mut env = ChainMdp::new(20, 0).unwrap();
        let rate = random_success_rate(&mut env, 10_000, 3);
        let se = (0.058647f64 * (1.0 - 0.058647) / 10_000.0).sqrt();
        assert!((rate - 0.058647).abs() < 4.0 * se, "rate {rate}");
    }
}
