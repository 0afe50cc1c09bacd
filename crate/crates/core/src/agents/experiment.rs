use std::time::Instant;

use super::{collect_batch, BonusPipeline, EpsilonGreedy, Policy, QTable, SoftmaxPolicy, StateHasher, Trajectory};
use crate::envs::Observation;
use crate::harness::{build_env, build_pipeline, AgentKind, ExperimentConfig, QKey};
use crate::rng::{derive_seed, seeded};
use crate::Result;

/// Metrics of one training iteration of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub iteration: usize,
    pub seed: u64,
    /// Mean over the batch's episodes of the environment-only return.
    pub mean_true_return: f64,
    /// Mean bonus per step.
    pub mean_bonus: f64,
    pub distinct_keys: usize,
    pub counter_bytes: usize,
    /// Mean loss of the last autoencoder retraining round, if any.
    pub ae_loss: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
}

impl RunResult {
    pub fn final_return(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.mean_true_return)
    }

    pub fn iterations_to_first_goal(&self) -> Option<usize> {
        iterations_to_first_goal(&self.rows)
    }
}

/// Index of the first iteration whose batch collected any true reward.
pub fn iterations_to_first_goal(rows: &[MetricsRow]) -> Option<usize> {
    rows.iter().find(|r| r.mean_true_return > 0.0).map(|r| r.iteration)
}

enum Agent {
    Q(QTable),
    Reinforce(SoftmaxPolicy),
}

/// Runs one seed of an experiment.
///
/// Each iteration collects a batch with the current policy, optionally
/// feeds the batch to the autoencoder replay pool and retrains it every
/// `ae.j_update` iterations, counts the batch and assigns bonuses, then
/// updates the agent on the bonus-augmented rewards. Independent random
/// streams are derived from `run_seed`: 0 for the agent, 1 for the hash
/// projections, 2 for autoencoder initialization and 3 for its training.
pub fn run_experiment(cfg: &ExperimentConfig, run_seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let mut env = build_env(cfg)?;
    let spec = env.spec();
    let mut pipeline = build_pipeline(cfg, &spec, run_seed)?;
    let mut rng = seeded(derive_seed(run_seed, 0));
    let mut agent = match cfg.agent {
        AgentKind::QLearning => Agent::Q(QTable::new(
            spec.action_count,
            cfg.agent_alpha,
            cfg.agent_gamma,
            cfg.agent_epsilon,
        )),
        AgentKind::Reinforce => {
            Agent::Reinforce(SoftmaxPolicy::new(spec.observation.flat_len(), spec.action_count))
        }
    };
    let mut rows = Vec::with_capacity(cfg.iterations);
    let mut ae_loss = None;
    for iteration in 0..cfg.iterations {
        let start = Instant::now();
        let mut batch = {
            let exact = |o: &Observation| Ok(o.to_bytes());
            let hashed = |o: &Observation| {
                pipeline
                    .as_ref()
                    .expect("hash keys require a hasher")
                    .state_key(o)
            };
            match &agent {
                Agent::Q(table) => {
                    let policy = match cfg.agent_q_key {
                        QKey::Exact => EpsilonGreedy { table, key: &exact },
                        QKey::Hash => EpsilonGreedy { table, key: &hashed },
                    };
                    collect_batch(env.as_mut(), &policy as &dyn Policy, cfg.batch_size, &mut rng)?
                }
                Agent::Reinforce(p) => collect_batch(env.as_mut(), p, cfg.batch_size, &mut rng)?,
            }
        };
        if let Some(p) = pipeline.as_mut() {
            if let StateHasher::Learned(h) = p.hasher_mut() {
                for t in &batch {
                    for s in &t.steps {
                        h.observe(s.observation.features());
                    }
                }
                if h.due(iteration) {
                    ae_loss = Some(h.retrain()?);
                }
            }
            p.apply_bonus(&mut batch)?;
        }
        for t in &batch {
            t.check_purity()?;
        }
        match &mut agent {
            Agent::Q(table) => match cfg.agent_q_key {
                QKey::Exact => table.update(&batch, &|o: &Observation| Ok(o.to_bytes()))?,
                QKey::Hash => {
                    let p = pipeline.as_ref().expect("hash keys require a hasher");
                    table.update(&batch, &|o: &Observation| p.state_key(o))?
                }
            },
            Agent::Reinforce(policy) => {
                policy.reinforce_update(&batch, cfg.agent_learning_rate, cfg.agent_gamma)?
            }
        }
        rows.push(metrics(iteration, run_seed, &batch, pipeline.as_ref(), ae_loss, start));
    }
    Ok(RunResult {
        seed: run_seed,
        rows,
    })
}

fn metrics(
    iteration: usize,
    seed: u64,
    batch: &[Trajectory],
    pipeline: Option<&BonusPipeline>,
    ae_loss: Option<f64>,
    start: Instant,
) -> MetricsRow {
    let episodes = batch.len() as f64;
    let steps: usize = batch.iter().map(Trajectory::len).sum();
    let bonus_total: f64 = batch
        .iter()
        .flat_map(|t| t.steps.iter().map(|s| s.bonus_reward))
        .sum();
    MetricsRow {
        iteration,
        seed,
        mean_true_return: batch.iter().map(Trajectory::episode_return_true).sum::<f64>() / episodes,
        mean_bonus: bonus_total / steps.max(1) as f64,
        distinct_keys: pipeline.map_or(0, BonusPipeline::distinct_keys),
        counter_bytes: pipeline.map_or(0, |p| {
            use crate::counting::VisitCounter;
            p.counter().memory_bytes()
        }),
        ae_loss,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}
