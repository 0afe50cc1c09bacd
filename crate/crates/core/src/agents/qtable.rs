use std::collections::HashMap;

use rand::Rng;

use super::{Policy, Trajectory};
use crate::envs::Observation;
use crate::rng::SeededRng;
use crate::Result;

/// Maps an observation to the byte key of its Q-table row.
pub type StateKeyFn<'a> = dyn Fn(&Observation) -> Result<Vec<u8>> + 'a;

/// Tabular action values; unvisited entries read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: HashMap<Vec<u8>, Vec<f64>>,
    action_count: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl QTable {
    pub fn new(action_count: usize, alpha: f64, gamma: f64, epsilon: f64) -> Self {
        Self {
            values: HashMap::new(),
            action_count,
            alpha,
            gamma,
            epsilon,
        }
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn q(&self, state: &[u8], action: usize) -> f64 {
        self.values.get(state).map_or(0.0, |row| row[action])
    }

    fn max_q(&self, state: &[u8]) -> f64 {
        self.values
            .get(state)
            .map_or(0.0, |row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Greedy action; ties are broken uniformly at random.
    pub fn greedy(&self, state: &[u8], rng: &mut SeededRng) -> usize {
        let Some(row) = self.values.get(state) else {
            return rng.random_range(0..self.action_count);
        };
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..row.len()).filter(|&a| row[a] == best).collect();
        if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.random_range(0..ties.len())]
        }
    }

    pub fn epsilon_greedy(&self, state: &[u8], rng: &mut SeededRng) -> usize {
        if rng.random::<f64>() < self.epsilon {
            rng.random_range(0..self.action_count)
        } else {
            self.greedy(state, rng)
        }
    }

    /// `Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))`; `next = None`
    /// marks a terminal transition with zero continuation value.
    pub fn update_transition(&mut self, state: &[u8], action: usize, reward: f64, next: Option<&[u8]>) {
        let target = reward + next.map_or(0.0, |s| self.gamma * self.max_q(s));
        let row = self
            .values
            .entry(state.to_vec())
            .or_insert_with(|| vec![0.0; self.action_count]);
        row[action] += self.alpha * (target - row[action]);
    }

    /// One pass of one-step Q-learning over every transition, in batch order,
    /// on the bonus-augmented reward.
    pub fn update(&mut self, trajectories: &[Trajectory], key: &StateKeyFn) -> Result<()> {
        for t in trajectories {
            let mut keys = t
                .steps
                .iter()
                .map(|s| key(&s.observation))
                .collect::<Result<Vec<_>>>()?;
            keys.push(key(&t.final_observation)?);
            for (i, s) in t.steps.iter().enumerate() {
                let next = (!s.terminal).then(|| keys[i + 1].as_slice());
                self.update_transition(&keys[i], s.action, s.train_reward(), next);
            }
        }
        Ok(())
    }
}

/// Epsilon-greedy behaviour policy over a Q-table.
pub struct EpsilonGreedy<'a> {
    pub table: &'a QTable,
    pub key: &'a StateKeyFn<'a>,
}

impl Policy for EpsilonGreedy<'_> {
    fn act(&self, observation: &Observation, rng: &mut SeededRng) -> Result<usize> {
        Ok(self.table.epsilon_greedy(&(self.key)(observation)?, rng))
    }
}
