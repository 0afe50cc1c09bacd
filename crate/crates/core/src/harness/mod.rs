//! Experiment configuration, runs, sweeps and validation suites.

mod config;
pub mod report;
mod sweep;
pub mod validate;

pub use config::{AgentKind, CounterKind, EnvKind, ExperimentConfig, HasherKind, Primes, QKey};
pub use report::{final_return, summarize, write_run_files, Summary};
pub use sweep::{cmd_run, cmd_sweep, run_config, run_seeds, sweep_configs, SweepAxis, SweepCell};

use crate::agents::{BonusPipeline, LearnedHasher, LearnedHasherConfig, StateHasher};
use crate::counting::{BonusConfig, CountMinSketch, Counter, ExactCounter};
use crate::envs::{ChainMdp, EnvSpec, Environment, SparseGridworld, SparsePointMass, Walls};
use crate::hashing::{BassConfig, GridHashConfig, SimHasher};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Builds the configured environment; construction errors are reported
/// against the `env` key.
pub fn build_env(cfg: &ExperimentConfig) -> Result<Box<dyn Environment>> {
    let as_config = |e: Error| Error::config("env", e.to_string());
    if cfg.env != EnvKind::Gridworld && cfg.env_horizon != 0 {
        return Err(Error::config("env.horizon", "only the gridworld horizon is configurable"));
    }
    Ok(match cfg.env {
        EnvKind::Chain => Box::new(ChainMdp::new(cfg.env_n_states, cfg.env_seed).map_err(as_config)?),
        EnvKind::Gridworld => {
            let horizon = match cfg.env_horizon {
                0 => 2 * (cfg.env_width + cfg.env_height),
                h => h,
            };
            Box::new(
                SparseGridworld::with_options(
                    cfg.env_width,
                    cfg.env_height,
                    Walls::TwoRoom,
                    cfg.env_seed,
                    cfg.env_observation,
                    horizon,
                )
                .map_err(as_config)?,
            )
        }
        EnvKind::PointMass => {
            Box::new(SparsePointMass::new(cfg.env_goal_radius, cfg.env_seed).map_err(as_config)?)
        }
    })
}

/// Builds the hashing and counting pipeline, or `None` for the baseline.
pub fn build_pipeline(
    cfg: &ExperimentConfig,
    spec: &EnvSpec,
    run_seed: u64,
) -> Result<Option<BonusPipeline>> {
    let dim = spec.observation.flat_len();
    let hash_seed = derive_seed(run_seed, 1);
    let hasher = match cfg.hasher {
        HasherKind::None => return Ok(None),
        HasherKind::SimHash => StateHasher::SimHash(SimHasher::new(cfg.hasher_k, dim, hash_seed)?),
        HasherKind::Bass => {
            let bass = BassConfig::new(cfg.bass_cell_size, cfg.bass_bins)?;
            let simhash = if cfg.bass_simhash {
                let cells = (cfg.env_width / cfg.bass_cell_size) * (cfg.env_height / cfg.bass_cell_size);
                Some(SimHasher::new(cfg.hasher_k, cells, hash_seed)?)
            } else {
                None
            };
            StateHasher::Bass { cfg: bass, simhash }
        }
        HasherKind::Grid => {
            let sizes = if cfg.grid_sizes.len() == 1 {
                vec![cfg.grid_sizes[0]; dim]
            } else {
                cfg.grid_sizes.clone()
            };
            StateHasher::Grid(GridHashConfig::new(sizes)?)
        }
        HasherKind::Learned => {
            let mut layers = vec![dim];
            layers.extend(&cfg.ae_hidden);
            let settings = LearnedHasherConfig {
                code_dim: cfg.ae_code_dim,
                noise: cfg.ae_noise,
                lambda: cfg.ae_lambda,
                learning_rate: cfg.ae_learning_rate,
                steps: cfg.ae_steps,
                batch_size: cfg.ae_batch_size,
                j_update: cfg.ae_j_update,
                replay_capacity: cfg.ae_replay_capacity,
            };
            StateHasher::Learned(Box::new(LearnedHasher::new(
                &layers,
                &settings,
                cfg.hasher_k,
                derive_seed(run_seed, 2),
                hash_seed,
                derive_seed(run_seed, 3),
            )?))
        }
    };
    let counter = match cfg.counter {
        CounterKind::Exact => Counter::Exact(ExactCounter::new()),
        CounterKind::CountMin => Counter::Sketch(CountMinSketch::new(&cfg.counter_primes.values())?),
    };
    Ok(Some(BonusPipeline::new(
        hasher,
        counter,
        BonusConfig::new(cfg.beta, cfg.count_mode)?,
    )))
}
