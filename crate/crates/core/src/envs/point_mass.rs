use super::{EnvSpec, Environment, EpisodeClock, Observation, ObservationShape, StepResult};
use crate::{Error, Result};

pub const THRUST_POS_X: usize = 0;
pub const THRUST_NEG_X: usize = 1;
pub const THRUST_POS_Y: usize = 2;
pub const THRUST_NEG_Y: usize = 3;

const THRUST: f64 = 0.05;
const MAX_SPEED: f64 = 0.2;
const GOAL: (f64, f64) = (0.9, 0.9);
const START: (f64, f64) = (-0.9, -0.9);
const HORIZON: usize = 200;
/// Integration step: position advances by `DT * velocity` each step.
const DT: f64 = 0.1;

/// Point mass in the box `[-1, 1]^2` with four discrete thrust actions.
///
/// Each action changes one velocity component by `±0.05` (clamped to
/// `[-0.2, 0.2]`), then the position advances by `0.1 * velocity`. Hitting the
/// box edge stops motion along that axis. The state `(x, y, vx, vy)` is the
/// observation; reward +1 within `goal_radius` of `(0.9, 0.9)`.
#[derive(Debug, Clone)]
pub struct SparsePointMass {
    goal_radius: f64,
    seed: u64,
    state: [f64; 4],
    clock: EpisodeClock,
}

impl SparsePointMass {
    pub fn new(goal_radius: f64, seed: u64) -> Result<Self> {
        if !(goal_radius > 0.0 && goal_radius < 0.5) {
            return Err(Error::InvalidRadius(goal_radius));
        }
        Ok(Self {
            goal_radius,
            seed,
            state: [START.0, START.1, 0.0, 0.0],
            clock: EpisodeClock::default(),
        })
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn goal_radius(&self) -> f64 {
        self.goal_radius
    }
}

impl Environment for SparsePointMass {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            observation: ObservationShape::Vector(4),
            action_count: 4,
            horizon: HORIZON,
        }
    }

    fn reset(&mut self, _episode_seed: u64) -> Observation {
        self.state = [START.0, START.1, 0.0, 0.0];
        self.clock.reset();
        Observation::Vector(self.state.to_vec())
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        let spec = self.spec();
        self.clock.begin_step(action, &spec)?;
        let [mut x, mut y, mut vx, mut vy] = self.state;
        match action {
            THRUST_POS_X => vx += THRUST,
            THRUST_NEG_X => vx -= THRUST,
            THRUST_POS_Y => vy += THRUST,
            _ => vy -= THRUST,
        }
        vx = vx.clamp(-MAX_SPEED, MAX_SPEED);
        vy = vy.clamp(-MAX_SPEED, MAX_SPEED);
        x += DT * vx;
        y += DT * vy;
        if !(-1.0..=1.0).contains(&x) {
            x = x.clamp(-1.0, 1.0);
            vx = 0.0;
        }
        if !(-1.0..=1.0).contains(&y) {
            y = y.clamp(-1.0, 1.0);
            vy = 0.0;
        }
        self.state = [x, y, vx, vy];
        let terminal = (x - GOAL.0).hypot(y - GOAL.1) <= self.goal_radius;
        let done = self.clock.finish_step(terminal, spec.horizon);
        Ok(StepResult {
            observation: Observation::Vector(self.state.to_vec()),
            reward: if terminal { 1.0 } else { 0.0 },
            done,
            terminal,
        })
    }
}
