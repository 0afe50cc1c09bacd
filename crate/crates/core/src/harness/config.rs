//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is optional
//! and falls back to the value of [`ExperimentConfig::default`]; unknown or
//! repeated keys are rejected. Lists are comma-separated.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::counting::{CountMode, PRIMES_6M, PRIMES_NEAR_1K};
use crate::envs::GridObservation;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Chain,
    Gridworld,
    PointMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HasherKind {
    /// No counting at all: the baseline agent.
    None,
    SimHash,
    Bass,
    Grid,
    Learned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterKind {
    Exact,
    CountMin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primes {
    SixMillion,
    NearThousand,
    List(Vec<u64>),
}

impl Primes {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Primes::SixMillion => PRIMES_6M.to_vec(),
            Primes::NearThousand => PRIMES_NEAR_1K.to_vec(),
            Primes::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    QLearning,
    Reinforce,
}

/// What the Q table is keyed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QKey {
    /// Canonical observation bytes.
    Exact,
    /// The counting hash code of the observation.
    Hash,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub env_n_states: usize,
    pub env_width: usize,
    pub env_height: usize,
    pub env_observation: GridObservation,
    /// `0` selects the environment's default horizon.
    pub env_horizon: usize,
    pub env_goal_radius: f64,
    pub env_seed: u64,
    pub hasher: HasherKind,
    pub hasher_k: usize,
    pub bass_cell_size: usize,
    pub bass_bins: u32,
    pub bass_simhash: bool,
    /// One width per observation coordinate, or a single width for all.
    pub grid_sizes: Vec<f64>,
    pub ae_hidden: Vec<usize>,
    pub ae_code_dim: usize,
    pub ae_noise: f64,
    pub ae_lambda: f64,
    pub ae_j_update: usize,
    pub ae_learning_rate: f64,
    pub ae_steps: usize,
    pub ae_batch_size: usize,
    pub ae_replay_capacity: usize,
    pub counter: CounterKind,
    pub counter_primes: Primes,
    pub beta: f64,
    pub count_mode: CountMode,
    pub agent: AgentKind,
    pub agent_alpha: f64,
    pub agent_gamma: f64,
    pub agent_epsilon: f64,
    pub agent_learning_rate: f64,
    pub agent_q_key: QKey,
    pub batch_size: usize,
    pub iterations: usize,
    pub seeds: usize,
    pub master_seed: u64,
    pub output: String,
    pub sweep_reference_k: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::Chain,
            env_n_states: 50,
            env_width: 10,
            env_height: 10,
            env_observation: GridObservation::Position,
            env_horizon: 0,
            env_goal_radius: 0.1,
            env_seed: 0,
            hasher: HasherKind::SimHash,
            hasher_k: 32,
            bass_cell_size: 2,
            bass_bins: 4,
            bass_simhash: false,
            grid_sizes: vec![0.25],
            ae_hidden: vec![64],
            ae_code_dim: 64,
            ae_noise: 0.3,
            ae_lambda: 10.0,
            ae_j_update: 3,
            ae_learning_rate: 1e-3,
            ae_steps: 20,
            ae_batch_size: 32,
            ae_replay_capacity: 10_000,
            counter: CounterKind::Exact,
            counter_primes: Primes::SixMillion,
            beta: 0.01,
            count_mode: CountMode::State,
            agent: AgentKind::Reinforce,
            agent_alpha: 0.5,
            agent_gamma: 0.99,
            agent_epsilon: 0.05,
            agent_learning_rate: 10.0,
            agent_q_key: QKey::Exact,
            batch_size: 200,
            iterations: 50,
            seeds: 5,
            master_seed: 0,
            output: "run".into(),
            sweep_reference_k: 16,
        }
    }
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::config(key, reason)
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| bad(key, format!("cannot parse {v:?}")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| num(key, s.trim())).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn choice<T: Copy>(key: &str, v: &str, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|&(_, t)| t)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            bad(key, format!("expected one of {}, got {v:?}", names.join("|")))
        })
}

fn name_of<T: Copy + PartialEq>(t: T, options: &[(&'static str, T)]) -> &'static str {
    options.iter().find(|(_, o)| *o == t).map(|(n, _)| *n).expect("every variant is named")
}

const ENVS: &[(&str, EnvKind)] = &[
    ("chain", EnvKind::Chain),
    ("gridworld", EnvKind::Gridworld),
    ("point_mass", EnvKind::PointMass),
];
const OBSERVATIONS: &[(&str, GridObservation)] = &[
    ("position", GridObservation::Position),
    ("image", GridObservation::Image),
];
const HASHERS: &[(&str, HasherKind)] = &[
    ("none", HasherKind::None),
    ("simhash", HasherKind::SimHash),
    ("bass", HasherKind::Bass),
    ("grid", HasherKind::Grid),
    ("learned", HasherKind::Learned),
];
const COUNTERS: &[(&str, CounterKind)] = &[
    ("exact", CounterKind::Exact),
    ("count_min", CounterKind::CountMin),
];
const COUNT_MODES: &[(&str, CountMode)] = &[
    ("state", CountMode::State),
    ("state_action", CountMode::StateAction),
];
const AGENTS: &[(&str, AgentKind)] = &[
    ("q_learning", AgentKind::QLearning),
    ("reinforce", AgentKind::Reinforce),
];
const Q_KEYS: &[(&str, QKey)] = &[("exact", QKey::Exact), ("hash", QKey::Hash)];
const BOOLS: &[(&str, bool)] = &[("true", true), ("false", false)];

impl ExperimentConfig {
    /// Parses and validates a config file body.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(
                    &format!("line {}", lineno + 1),
                    format!("expected `key = value`, got {line:?}"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(bad(key, "repeated key"));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its text value without cross-key validation.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "env" => self.env = choice(key, v, ENVS)?,
            "env.n_states" => self.env_n_states = num(key, v)?,
            "env.width" => self.env_width = num(key, v)?,
            "env.height" => self.env_height = num(key, v)?,
            "env.observation" => self.env_observation = choice(key, v, OBSERVATIONS)?,
            "env.horizon" => self.env_horizon = num(key, v)?,
            "env.goal_radius" => self.env_goal_radius = num(key, v)?,
            "env.seed" => self.env_seed = num(key, v)?,
            "hasher" => self.hasher = choice(key, v, HASHERS)?,
            "hasher.k" => self.hasher_k = num(key, v)?,
            "bass.cell_size" => self.bass_cell_size = num(key, v)?,
            "bass.bins" => self.bass_bins = num(key, v)?,
            "bass.simhash" => self.bass_simhash = choice(key, v, BOOLS)?,
            "grid.sizes" => self.grid_sizes = list(key, v)?,
            "ae.hidden" => {
                self.ae_hidden = if v.is_empty() { Vec::new() } else { list(key, v)? }
            }
            "ae.code_dim" => self.ae_code_dim = num(key, v)?,
            "ae.noise" => self.ae_noise = num(key, v)?,
            "ae.lambda" => self.ae_lambda = num(key, v)?,
            "ae.j_update" => self.ae_j_update = num(key, v)?,
            "ae.learning_rate" => self.ae_learning_rate = num(key, v)?,
            "ae.steps" => self.ae_steps = num(key, v)?,
            "ae.batch_size" => self.ae_batch_size = num(key, v)?,
            "ae.replay_capacity" => self.ae_replay_capacity = num(key, v)?,
            "counter" => self.counter = choice(key, v, COUNTERS)?,
            "counter.primes" => {
                self.counter_primes = match v {
                    "6m" => Primes::SixMillion,
                    "near_1k" => Primes::NearThousand,
                    _ => Primes::List(list(key, v)?),
                }
            }
            "beta" => self.beta = num(key, v)?,
            "count_mode" => self.count_mode = choice(key, v, COUNT_MODES)?,
            "agent" => self.agent = choice(key, v, AGENTS)?,
            "agent.alpha" => self.agent_alpha = num(key, v)?,
            "agent.gamma" => self.agent_gamma = num(key, v)?,
            "agent.epsilon" => self.agent_epsilon = num(key, v)?,
            "agent.learning_rate" => self.agent_learning_rate = num(key, v)?,
            "agent.q_key" => self.agent_q_key = choice(key, v, Q_KEYS)?,
            "batch_size" => self.batch_size = num(key, v)?,
            "iterations" => self.iterations = num(key, v)?,
            "seeds" => self.seeds = num(key, v)?,
            "master_seed" => self.master_seed = num(key, v)?,
            "output" => self.output = v.to_string(),
            "sweep.reference_k" => self.sweep_reference_k = num(key, v)?,
            _ => return Err(bad(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its current value, one per line; [`Self::parse`]
    /// reads it back to an equal config.
    pub fn to_text(&self) -> String {
        let primes = match &self.counter_primes {
            Primes::SixMillion => "6m".to_string(),
            Primes::NearThousand => "near_1k".to_string(),
            Primes::List(v) => join(v),
        };
        let entries: Vec<(&str, String)> = vec![
            ("env", name_of(self.env, ENVS).into()),
            ("env.n_states", self.env_n_states.to_string()),
            ("env.width", self.env_width.to_string()),
            ("env.height", self.env_height.to_string()),
            ("env.observation", name_of(self.env_observation, OBSERVATIONS).into()),
            ("env.horizon", self.env_horizon.to_string()),
            ("env.goal_radius", self.env_goal_radius.to_string()),
            ("env.seed", self.env_seed.to_string()),
            ("hasher", name_of(self.hasher, HASHERS).into()),
            ("hasher.k", self.hasher_k.to_string()),
            ("bass.cell_size", self.bass_cell_size.to_string()),
            ("bass.bins", self.bass_bins.to_string()),
            ("bass.simhash", self.bass_simhash.to_string()),
            ("grid.sizes", join(&self.grid_sizes)),
            ("ae.hidden", join(&self.ae_hidden)),
            ("ae.code_dim", self.ae_code_dim.to_string()),
            ("ae.noise", self.ae_noise.to_string()),
            ("ae.lambda", self.ae_lambda.to_string()),
            ("ae.j_update", self.ae_j_update.to_string()),
            ("ae.learning_rate", self.ae_learning_rate.to_string()),
            ("ae.steps", self.ae_steps.to_string()),
            ("ae.batch_size", self.ae_batch_size.to_string()),
            ("ae.replay_capacity", self.ae_replay_capacity.to_string()),
            ("counter", name_of(self.counter, COUNTERS).into()),
            ("counter.primes", primes),
            ("beta", self.beta.to_string()),
            ("count_mode", name_of(self.count_mode, COUNT_MODES).into()),
            ("agent", name_of(self.agent, AGENTS).into()),
            ("agent.alpha", self.agent_alpha.to_string()),
            ("agent.gamma", self.agent_gamma.to_string()),
            ("agent.epsilon", self.agent_epsilon.to_string()),
            ("agent.learning_rate", self.agent_learning_rate.to_string()),
            ("agent.q_key", name_of(self.agent_q_key, Q_KEYS).into()),
            ("batch_size", self.batch_size.to_string()),
            ("iterations", self.iterations.to_string()),
            ("seeds", self.seeds.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("output", self.output.clone()),
            ("sweep.reference_k", self.sweep_reference_k.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Checks ranges and cross-key combinations, and that the environment
    /// and hasher can actually be built.
    pub fn validate(&self) -> Result<()> {
        let unit = |key: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(bad(key, format!("must lie in [0, 1], got {v}")))
            }
        };
        let positive = |key: &str, v: usize| {
            if v > 0 {
                Ok(())
            } else {
                Err(bad(key, "must be positive"))
            }
        };
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(bad("beta", format!("must be finite and >= 0, got {}", self.beta)));
        }
        unit("agent.alpha", self.agent_alpha)?;
        unit("agent.gamma", self.agent_gamma)?;
        unit("agent.epsilon", self.agent_epsilon)?;
        if !(self.agent_learning_rate.is_finite() && self.agent_learning_rate >= 0.0) {
            return Err(bad("agent.learning_rate", "must be finite and >= 0"));
        }
        positive("batch_size", self.batch_size)?;
        positive("iterations", self.iterations)?;
        positive("seeds", self.seeds)?;
        positive("sweep.reference_k", self.sweep_reference_k)?;
        if self.output.is_empty() || self.output.contains(['/', '\\']) {
            return Err(bad("output", "must be a plain non-empty file stem"));
        }
        if self.agent_q_key == QKey::Hash && self.hasher == HasherKind::None {
            return Err(bad("agent.q_key", "hash keys need a hasher other than none"));
        }
        if self.agent_q_key == QKey::Hash && self.hasher == HasherKind::Learned {
            return Err(bad("agent.q_key", "hash keys are not supported with a learned hasher"));
        }
        let env = crate::harness::build_env(self)?;
        let spec = env.spec();
        match self.hasher {
            HasherKind::None => {}
            HasherKind::SimHash => positive("hasher.k", self.hasher_k)?,
            HasherKind::Bass => {
                if self.env != EnvKind::Gridworld || self.env_observation != GridObservation::Image {
                    return Err(bad("hasher", "bass needs env = gridworld with env.observation = image"));
                }
                if self.bass_cell_size == 0 || !self.env_width.is_multiple_of(self.bass_cell_size)
                    || !self.env_height.is_multiple_of(self.bass_cell_size)
                {
                    return Err(bad("bass.cell_size", "must be positive and divide the grid size"));
                }
                if self.bass_bins == 0 {
                    return Err(bad("bass.bins", "must be positive"));
                }
                if self.bass_simhash {
                    positive("hasher.k", self.hasher_k)?;
                }
            }
            HasherKind::Grid => {
                if matches!(self.env, EnvKind::Gridworld)
                    && self.env_observation == GridObservation::Image
                {
                    return Err(bad("hasher", "grid hashing needs vector observations"));
                }
                let n = spec.observation.flat_len();
                if self.grid_sizes.len() != 1 && self.grid_sizes.len() != n {
                    return Err(bad(
                        "grid.sizes",
                        format!("need 1 or {n} widths, got {}", self.grid_sizes.len()),
                    ));
                }
                if let Some(s) = self.grid_sizes.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                    return Err(bad("grid.sizes", format!("widths must be positive, got {s}")));
                }
            }
            HasherKind::Learned => {
                positive("hasher.k", self.hasher_k)?;
                positive("ae.code_dim", self.ae_code_dim)?;
                positive("ae.j_update", self.ae_j_update)?;
                positive("ae.batch_size", self.ae_batch_size)?;
                positive("ae.replay_capacity", self.ae_replay_capacity)?;
                if self.ae_hidden.contains(&0) {
                    return Err(bad("ae.hidden", "widths must be positive"));
                }
                if !(self.ae_noise.is_finite() && self.ae_noise > 0.25) {
                    return Err(bad("ae.noise", format!("must exceed 0.25, got {}", self.ae_noise)));
                }
                if !(self.ae_lambda.is_finite() && self.ae_lambda >= 0.0) {
                    return Err(bad("ae.lambda", "must be finite and >= 0"));
                }
                if !(self.ae_learning_rate.is_finite() && self.ae_learning_rate > 0.0) {
                    return Err(bad("ae.learning_rate", "must be positive"));
                }
            }
        }
        if self.hasher != HasherKind::None && self.counter == CounterKind::CountMin {
            crate::counting::CountMinSketch::new(&self.counter_primes.values())
                .map_err(|e| bad("counter.primes", e.to_string()))?;
        }
        Ok(())
    }
}
