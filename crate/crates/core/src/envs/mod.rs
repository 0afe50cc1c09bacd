//! Sparse-reward toy environments with a uniform episodic interface.
//!
//! All dynamics are deterministic: a trajectory is a pure function of the
//! construction parameters and the action sequence. `reset` takes an episode
//! seed to keep the interface uniform with stochastic environments.

pub mod chain;
pub mod gridworld;
pub mod point_mass;

pub use chain::ChainMdp;
pub use gridworld::{GridObservation, SparseGridworld, Walls};
pub use point_mass::SparsePointMass;

use crate::hashing::Image;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Vector(Vec<f64>),
    Image(Image),
}

impl Observation {
    /// Real features for hashing and function approximation; image
    /// intensities are scaled into `[0, 1]`.
    pub fn features(&self) -> Vec<f64> {
        match self {
            Observation::Vector(v) => v.clone(),
            Observation::Image(img) => img.data.iter().map(|&p| f64::from(p) / 255.0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Observation::Vector(v) => v.len(),
            Observation::Image(img) => img.data.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical bytes: a kind byte, then `f64` bit patterns or image shape
    /// and intensities, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Observation::Vector(v) => {
                out.push(0);
                for x in v {
                    out.extend_from_slice(&x.to_bits().to_le_bytes());
                }
            }
            Observation::Image(img) => {
                out.push(1);
                for d in [img.height, img.width, img.channels] {
                    out.extend_from_slice(&(d as u32).to_le_bytes());
                }
                // intensities fit in a byte for every built-in environment
                out.extend(img.data.iter().map(|&p| p.clamp(0, 255) as u8));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationShape {
    Vector(usize),
    Image {
        height: usize,
        width: usize,
        channels: usize,
    },
}

impl ObservationShape {
    pub fn flat_len(&self) -> usize {
        match *self {
            ObservationShape::Vector(n) => n,
            ObservationShape::Image {
                height,
                width,
                channels,
            } => height * width * channels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvSpec {
    pub observation: ObservationShape,
    pub action_count: usize,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    /// Environment reward only; exploration bonuses are added downstream.
    pub reward: f64,
    /// The episode is over, by reaching the goal or the horizon.
    pub done: bool,
    /// The episode ended in an absorbing goal state.
    pub terminal: bool,
}

pub trait Environment: Send {
    fn spec(&self) -> EnvSpec;
    fn reset(&mut self, episode_seed: u64) -> Observation;
    fn step(&mut self, action: usize) -> Result<StepResult>;
}

/// Step counter shared by the environments to enforce reset/step ordering.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    t: usize,
    started: bool,
    done: bool,
}

impl EpisodeClock {
    pub(crate) fn reset(&mut self) {
        *self = Self {
            t: 0,
            started: true,
            done: false,
        };
    }

    pub(crate) fn begin_step(&self, action: usize, spec: &EnvSpec) -> Result<()> {
        if !self.started {
            return Err(Error::StepBeforeReset);
        }
        if self.done {
            return Err(Error::StepAfterDone);
        }
        if action >= spec.action_count {
            return Err(Error::InvalidAction {
                action,
                action_count: spec.action_count,
            });
        }
        Ok(())
    }

    /// Advances time and returns whether the episode is over.
    pub(crate) fn finish_step(&mut self, terminal: bool, horizon: usize) -> bool {
        self.t += 1;
        self.done = terminal || self.t >= horizon;
        self.done
    }
}
