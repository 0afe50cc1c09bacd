use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use super::Trajectory;
use crate::autoencoder::{learned_hash, Adam, AutoencoderModel, ReplayPool, TrainBatch};
use crate::counting::{bonus, make_key, BonusConfig, Counter, VisitCounter};
use crate::envs::Observation;
use crate::hashing::{
    bass_features, encode_key, grid_hash, BassConfig, Code, CountKey, GridHashConfig, SimHasher,
};
use crate::rng::{seeded, SeededRng};
use crate::{Error, Result};

/// Autoencoder hash that is retrained on a replay pool of observations.
#[derive(Debug, Clone)]
pub struct LearnedHasher {
    model: AutoencoderModel,
    downsampler: SimHasher,
    optimizer: Adam,
    replay: ReplayPool,
    rng: SeededRng,
    learning_rate: f64,
    steps: usize,
    batch_size: usize,
    j_update: usize,
}

impl LearnedHasher {
    /// `k` is the SimHash width applied to the binarized code.
    pub fn new(
        layer_sizes: &[usize],
        cfg: &LearnedHasherConfig,
        k: usize,
        init_seed: u64,
        downsample_seed: u64,
        train_seed: u64,
    ) -> Result<Self> {
        let model = AutoencoderModel::new(layer_sizes, cfg.code_dim, cfg.noise, cfg.lambda, init_seed)?;
        if cfg.j_update == 0 || cfg.batch_size == 0 || cfg.replay_capacity == 0 {
            return Err(Error::InvalidDimension(
                "ae.j_update, ae.batch_size and ae.replay_capacity must be positive".into(),
            ));
        }
        Ok(Self {
            optimizer: Adam::new(model.param_count()),
            downsampler: SimHasher::new(k, cfg.code_dim, downsample_seed)?,
            model,
            replay: ReplayPool::new(cfg.replay_capacity),
            rng: seeded(train_seed),
            learning_rate: cfg.learning_rate,
            steps: cfg.steps,
            batch_size: cfg.batch_size,
            j_update: cfg.j_update,
        })
    }

    pub fn model(&self) -> &AutoencoderModel {
        &self.model
    }

    pub fn replay(&self) -> &ReplayPool {
        &self.replay
    }

    pub fn observe(&mut self, features: Vec<f64>) {
        self.replay.push(features);
    }

    pub fn due(&self, iteration: usize) -> bool {
        iteration.is_multiple_of(self.j_update)
    }

    /// Runs the configured number of minibatch steps on the replay pool and
    /// returns the mean training loss.
    pub fn retrain(&mut self) -> Result<f64> {
        if self.replay.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut total = 0.0;
        for _ in 0..self.steps {
            let batch = TrainBatch::new(self.replay.sample(self.batch_size, &mut self.rng))?;
            total += self
                .model
                .train_step(&batch, &mut self.optimizer, self.learning_rate, &mut self.rng)?;
        }
        Ok(total / self.steps.max(1) as f64)
    }

    pub fn code(&self, features: &[f64]) -> Result<Code> {
        Ok(Code::Binary(learned_hash(&self.model, features, &self.downsampler)?))
    }
}

/// Autoencoder settings that do not depend on the observation size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnedHasherConfig {
    pub code_dim: usize,
    pub noise: f64,
    pub lambda: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub j_update: usize,
    pub replay_capacity: usize,
}

/// State abstraction used for counting.
#[derive(Debug, Clone)]
pub enum StateHasher {
    SimHash(SimHasher),
    /// BASS features, optionally compressed further by SimHash.
    Bass {
        cfg: BassConfig,
        simhash: Option<SimHasher>,
    },
    Grid(GridHashConfig),
    Learned(Box<LearnedHasher>),
}

impl StateHasher {
    pub fn code(&self, obs: &Observation) -> Result<Code> {
        match self {
            StateHasher::SimHash(h) => Ok(Code::Binary(h.hash(&obs.features())?)),
            StateHasher::Bass { cfg, simhash } => {
                let Observation::Image(img) = obs else {
                    return Err(Error::UnsupportedObservation("BASS needs image observations"));
                };
                let f = bass_features(img, cfg)?;
                match simhash {
                    Some(h) => {
                        let x: Vec<f64> = f.data.iter().map(|&v| f64::from(v)).collect();
                        Ok(Code::Binary(h.hash(&x)?))
                    }
                    None => Ok(Code::Integers(f.data.iter().map(|&v| i64::from(v)).collect())),
                }
            }
            StateHasher::Grid(cfg) => match obs {
                Observation::Vector(v) => Ok(Code::Integers(grid_hash(v, cfg)?)),
                Observation::Image(_) => Err(Error::UnsupportedObservation(
                    "grid hashing needs vector observations",
                )),
            },
            StateHasher::Learned(h) => h.code(&obs.features()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Counting,
    Bonus,
}

/// Counter wrapper that rejects increments after the first bonus query of a
/// batch and queries before the batch has been counted.
#[derive(Debug, Clone)]
struct PhasedCounter {
    inner: Counter,
    phase: Phase,
}

impl PhasedCounter {
    fn increment(&mut self, key: &CountKey) -> Result<u64> {
        if self.phase != Phase::Counting {
            return Err(Error::Ordering("count increment after bonus queries began"));
        }
        self.inner.increment(key)
    }

    fn query(&self, key: &CountKey) -> Result<u64> {
        if self.phase != Phase::Bonus {
            return Err(Error::Ordering("bonus query before the batch was counted"));
        }
        Ok(self.inner.query(key))
    }
}

/// Hashing, counting and bonus assignment for collected batches.
#[derive(Debug)]
pub struct BonusPipeline {
    hasher: StateHasher,
    counter: PhasedCounter,
    bonus_cfg: BonusConfig,
    seen: HashSet<CountKey>,
    cache: RefCell<HashMap<Vec<u8>, Code>>,
}

impl BonusPipeline {
    pub fn new(hasher: StateHasher, counter: Counter, bonus_cfg: BonusConfig) -> Self {
        Self {
            hasher,
            counter: PhasedCounter {
                inner: counter,
                phase: Phase::Counting,
            },
            bonus_cfg,
            seen: HashSet::new(),
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn hasher(&self) -> &StateHasher {
        &self.hasher
    }

    /// Mutable access drops memoized codes, since the hash may change.
    pub fn hasher_mut(&mut self) -> &mut StateHasher {
        self.cache.borrow_mut().clear();
        &mut self.hasher
    }

    pub fn counter(&self) -> &Counter {
        &self.counter.inner
    }

    pub fn bonus_config(&self) -> &BonusConfig {
        &self.bonus_cfg
    }

    /// Number of distinct counting keys incremented so far.
    pub fn distinct_keys(&self) -> usize {
        self.seen.len()
    }

    pub fn code(&self, obs: &Observation) -> Result<Code> {
        let bytes = obs.to_bytes();
        if let Some(c) = self.cache.borrow().get(&bytes) {
            return Ok(c.clone());
        }
        let c = self.hasher.code(obs)?;
        self.cache.borrow_mut().insert(bytes, c.clone());
        Ok(c)
    }

    /// Action-free key bytes of the state's code, for hash-keyed Q tables.
    pub fn state_key(&self, obs: &Observation) -> Result<Vec<u8>> {
        Ok(encode_key(&self.code(obs)?, None)?.into_bytes())
    }

    /// Counts every step of the batch, then sets each step's bonus to
    /// `beta / sqrt(n)` from the post-update counts.
    pub fn apply_bonus(&mut self, trajectories: &mut [Trajectory]) -> Result<()> {
        self.counter.phase = Phase::Counting;
        let mut keys = Vec::with_capacity(trajectories.iter().map(Trajectory::len).sum());
        for t in trajectories.iter() {
            for s in &t.steps {
                let key = make_key(&self.code(&s.observation)?, Some(s.action as u64), &self.bonus_cfg)?;
                self.counter.increment(&key)?;
                keys.push(key);
            }
        }
        self.counter.phase = Phase::Bonus;
        let mut keys = keys.into_iter();
        for t in trajectories.iter_mut() {
            for s in &mut t.steps {
                let key = keys.next().expect("one key per step");
                s.bonus_reward = bonus(self.counter.query(&key)?, &self.bonus_cfg)?;
                self.seen.insert(key);
            }
        }
        self.counter.phase = Phase::Counting;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Step;
    use crate::counting::{CountMinSketch, CountMode, ExactCounter};

    fn one_hot(i: usize, n: usize) -> Observation {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Observation::Vector(v)
    }

    fn traj(states: &[usize]) -> Trajectory {
        let steps = states
            .iter()
            .map(|&i| Step {
                observation: one_hot(i, 5),
                action: i % 2,
                true_reward: 0.0,
                bonus_reward: 0.0,
                done: false,
                terminal: false,
            })
            .collect();
        Trajectory::new(steps, one_hot(0, 5))
    }

    fn pipeline(beta: f64, mode: CountMode) -> BonusPipeline {
        BonusPipeline::new(
            StateHasher::SimHash(SimHasher::new(32, 5, 9).unwrap()),
            Counter::Exact(ExactCounter::new()),
            BonusConfig::new(beta, mode).unwrap(),
        )
    }

    #[test]
    fn zero_beta_leaves_rewards() {
        let mut p = pipeline(0.0, CountMode::State);
        let mut batch = vec![traj(&[0, 1, 1, 2])];
        let before = batch.clone();
        p.apply_bonus(&mut batch).unwrap();
        assert_eq!(batch, before);
        assert_eq!(p.distinct_keys(), 3);
    }

    #[test]
    fn single_visit_gets_full_beta() {
        let mut p = pipeline(0.25, CountMode::State);
        let mut batch = vec![traj(&[3])];
        p.apply_bonus(&mut batch).unwrap();
        assert_eq!(batch[0].steps[0].bonus_reward, 0.25);
    }

    #[test]
    fn whole_batch_is_counted_before_bonuses() {
        let mut p = pipeline(1.0, CountMode::State);
        let mut batch = vec![traj(&[2, 2]), traj(&[2, 4, 2])];
        p.apply_bonus(&mut batch).unwrap();
        let bonuses: Vec<f64> = batch.iter().flat_map(|t| t.steps.iter().map(|s| s.bonus_reward)).collect();
        assert_eq!(bonuses, vec![0.5, 0.5, 0.5, 1.0, 0.5]);
        // counts persist across batches
        let mut next = vec![traj(&[4])];
        p.apply_bonus(&mut next).unwrap();
        assert_eq!(next[0].steps[0].bonus_reward, 1.0 / 2f64.sqrt());
    }

    #[test]
    fn state_action_mode_splits_counts() {
        let mut p = pipeline(1.0, CountMode::StateAction);
        let mut batch = vec![traj(&[1, 1, 1, 1])];
        batch[0].steps[0].action = 0;
        p.apply_bonus(&mut batch).unwrap();
        let b: Vec<f64> = batch[0].steps.iter().map(|s| s.bonus_reward).collect();
        assert_eq!(b, vec![1.0, 1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt()]);
    }

    #[test]
    fn sketch_backend_matches_exact_without_collisions() {
        let mut exact = pipeline(1.0, CountMode::State);
        let mut sketch = BonusPipeline::new(
            StateHasher::SimHash(SimHasher::new(32, 5, 9).unwrap()),
            Counter::Sketch(CountMinSketch::with_6m()),
            BonusConfig::new(1.0, CountMode::State).unwrap(),
        );
        for states in [[0, 1, 2, 3], [3, 3, 4, 0]] {
            let mut a = vec![traj(&states)];
            let mut b = a.clone();
            exact.apply_bonus(&mut a).unwrap();
            sketch.apply_bonus(&mut b).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn phase_violations_are_errors() {
        let mut c = PhasedCounter {
            inner: Counter::Exact(ExactCounter::new()),
            phase: Phase::Counting,
        };
        let key = encode_key(&Code::Raw(vec![1]), None).unwrap();
        assert!(matches!(c.query(&key), Err(Error::Ordering(_))));
        c.increment(&key).unwrap();
        c.phase = Phase::Bonus;
        assert_eq!(c.query(&key), Ok(1));
        assert!(matches!(c.increment(&key), Err(Error::Ordering(_))));
    }

    #[test]
    fn bass_rejects_vector_observations() {
        let h = StateHasher::Bass {
            cfg: BassConfig::new(2, 4).unwrap(),
            simhash: None,
        };
        assert!(matches!(h.code(&one_hot(0, 4)), Err(Error::UnsupportedObservation(_))));
    }
}
