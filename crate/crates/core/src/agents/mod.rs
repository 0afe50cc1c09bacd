//! Agents trained on bonus-augmented rewards, and the per-iteration loop
//! tying environment, hashing, counting and policy updates together.

mod collect;
mod experiment;
mod pipeline;
mod qtable;
mod softmax;
mod trajectory;

pub use collect::{collect_batch, Policy, UniformPolicy};
pub use experiment::{iterations_to_first_goal, run_experiment, MetricsRow, RunResult};
pub use pipeline::{BonusPipeline, LearnedHasher, LearnedHasherConfig, StateHasher};
pub use qtable::{EpsilonGreedy, QTable};
pub use softmax::SoftmaxPolicy;
pub use trajectory::{Step, Trajectory};
