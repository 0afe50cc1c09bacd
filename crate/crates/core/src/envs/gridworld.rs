use std::collections::VecDeque;

use super::{EnvSpec, Environment, EpisodeClock, Observation, ObservationShape, StepResult};
use crate::hashing::Image;
use crate::{Error, Result};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;

pub const AGENT_INTENSITY: i32 = 255;
pub const WALL_INTENSITY: i32 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Walls {
    /// A vertical wall at column `width / 2` with one door at row `height / 2`.
    TwoRoom,
    /// Explicit `(x, y)` wall cells.
    Cells(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridObservation {
    /// `(x, y)` cell coordinates as reals.
    #[default]
    Position,
    /// `height x width x 1` occupancy image: agent 255, walls 128, else 0.
    Image,
}

/// Grid world with a single rewarding goal cell.
///
/// The agent starts at `(0, 0)`; the goal is the opposite corner
/// `(width - 1, height - 1)`. Moves into walls or off the grid leave the
/// position unchanged. Reaching the goal gives +1 and ends the episode.
#[derive(Debug, Clone)]
pub struct SparseGridworld {
    width: usize,
    height: usize,
    wall: Vec<bool>,
    observation: GridObservation,
    horizon: usize,
    seed: u64,
    pos: (usize, usize),
    clock: EpisodeClock,
}

impl SparseGridworld {
    /// Default horizon `2 (width + height)`.
    pub fn new(width: usize, height: usize, walls: Walls, seed: u64) -> Result<Self> {
        Self::with_options(
            width,
            height,
            walls,
            seed,
            GridObservation::Position,
            2 * (width + height),
        )
    }

    pub fn with_options(
        width: usize,
        height: usize,
        walls: Walls,
        seed: u64,
        observation: GridObservation,
        horizon: usize,
    ) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidSize(format!(
                "grid must be at least 2x2, got {width}x{height}"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidSize("horizon must be positive".into()));
        }
        let mut wall = vec![false; width * height];
        match walls {
            Walls::TwoRoom => {
                let (wx, door) = (width / 2, height / 2);
                for y in (0..height).filter(|&y| y != door) {
                    wall[y * width + wx] = true;
                }
            }
            Walls::Cells(cells) => {
                for (x, y) in cells {
                    if x >= width || y >= height {
                        return Err(Error::InvalidSize(format!("wall ({x}, {y}) off the grid")));
                    }
                    wall[y * width + x] = true;
                }
            }
        }
        let env = Self {
            width,
            height,
            wall,
            observation,
            horizon,
            seed,
            pos: (0, 0),
            clock: EpisodeClock::default(),
        };
        if !env.goal_reachable() {
            return Err(Error::UnreachableGoal);
        }
        Ok(env)
    }

    pub fn goal(&self) -> (usize, usize) {
        (self.width - 1, self.height - 1)
    }

    pub fn position(&self) -> (usize, usize) {
        self.pos
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_wall(&self, x: usize, y: usize) -> bool {
        self.wall[y * self.width + x]
    }

    fn goal_reachable(&self) -> bool {
        if self.is_wall(0, 0) || self.is_wall(self.width - 1, self.height - 1) {
            return false;
        }
        let mut seen = vec![false; self.wall.len()];
        let mut queue = VecDeque::from([(0usize, 0usize)]);
        seen[0] = true;
        while let Some((x, y)) = queue.pop_front() {
            if (x, y) == self.goal() {
                return true;
            }
            for a in 0..4 {
                let next = self.moved((x, y), a);
                let i = next.1 * self.width + next.0;
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(next);
                }
            }
        }
        false
    }

    fn moved(&self, (x, y): (usize, usize), action: usize) -> (usize, usize) {
        let (nx, ny) = match action {
            UP if y > 0 => (x, y - 1),
            DOWN if y + 1 < self.height => (x, y + 1),
            LEFT if x > 0 => (x - 1, y),
            RIGHT if x + 1 < self.width => (x + 1, y),
            _ => (x, y),
        };
        if self.is_wall(nx, ny) {
            (x, y)
        } else {
            (nx, ny)
        }
    }

    fn observe(&self) -> Observation {
        match self.observation {
            GridObservation::Position => {
                Observation::Vector(vec![self.pos.0 as f64, self.pos.1 as f64])
            }
            GridObservation::Image => {
                let mut img = Image::zeros(self.height, self.width, 1);
                for y in 0..self.height {
                    for x in 0..self.width {
                        if self.is_wall(x, y) {
                            img.set(y, x, 0, WALL_INTENSITY);
                        }
                    }
                }
                img.set(self.pos.1, self.pos.0, 0, AGENT_INTENSITY);
                Observation::Image(img)
            }
        }
    }
}

impl Environment for SparseGridworld {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            observation: match self.observation {
                GridObservation::Position => ObservationShape::Vector(2),
                GridObservation::Image => ObservationShape::Image {
                    height: self.height,
                    width: self.width,
                    channels: 1,
                },
            },
            action_count: 4,
            horizon: self.horizon,
        }
    }

    fn reset(&mut self, _episode_seed: u64) -> Observation {
        self.pos = (0, 0);
        self.clock.reset();
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        let spec = self.spec();
        self.clock.begin_step(action, &spec)?;
        self.pos = self.moved(self.pos, action);
        let terminal = self.pos == self.goal();
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

    fn two_room(obs: GridObservation) -> SparseGridworld {
        SparseGridworld::with_options(10, 10, Walls::TwoRoom, 0, obs, 40).unwrap()
    }

    /// Shortest path from start to goal through the door at (5, 5).
    fn shortest_path() -> Vec<usize> {
        let mut a = vec![RIGHT; 4];
        a.extend([DOWN; 5]);
        a.extend([RIGHT; 5]);
        a.extend([DOWN; 4]);
        a
    }

    #[test]
    fn goal_adjacent_step_rewards() {
        let mut env = two_room(GridObservation::Position);
        let steps = rollout(&mut env, &shortest_path());
        assert_eq!(steps.len(), 18);
        let last = steps.last().unwrap();
        assert_eq!(last.reward, 1.0);
        assert!(last.done && last.terminal);
        assert!(steps[..17].iter().all(|s| s.reward == 0.0));
    }

    #[test]
    fn walls_block_movement() {
        let mut env = two_room(GridObservation::Position);
        let steps = rollout(&mut env, &[RIGHT, RIGHT, RIGHT, RIGHT, RIGHT]);
        assert_eq!(env.position(), (4, 0));
        assert_eq!(steps[4].observation, Observation::Vector(vec![4.0, 0.0]));
        assert_eq!(steps[4].reward, 0.0);
        // off-grid moves also stay put
        env.reset(0);
        env.step(UP).unwrap();
        assert_eq!(env.position(), (0, 0));
    }

    #[test]
    fn image_has_one_agent_cell_matching_position() {
        let mut img_env = two_room(GridObservation::Image);
        let mut pos_env = two_room(GridObservation::Position);
        img_env.reset(0);
        pos_env.reset(0);
        for &a in &[RIGHT, DOWN, DOWN, RIGHT, LEFT, DOWN, RIGHT, RIGHT, RIGHT] {
            let Observation::Image(img) = img_env.step(a).unwrap().observation else {
                panic!("expected image");
            };
            let Observation::Vector(xy) = pos_env.step(a).unwrap().observation else {
                panic!("expected vector");
            };
            let agent: Vec<usize> = (0..img.data.len())
                .filter(|&i| img.data[i] == AGENT_INTENSITY)
                .collect();
            assert_eq!(agent.len(), 1);
            let argmax = agent[0];
            assert_eq!((argmax % 10) as f64, xy[0]);
            assert_eq!((argmax / 10) as f64, xy[1]);
            assert_eq!(img.data.iter().filter(|&&v| v == WALL_INTENSITY).count(), 9);
        }
    }

    #[test]
    fn unreachable_goal_rejected() {
        let cells = (0..4).map(|y| (2, y)).collect();
        assert!(matches!(
            SparseGridworld::new(4, 4, Walls::Cells(cells), 0),
            Err(Error::UnreachableGoal)
        ));
        assert!(matches!(
            SparseGridworld::new(4, 4, Walls::Cells(vec![(0, 0)]), 0),
            Err(Error::UnreachableGoal)
        ));
    }

    #[test]
    fn random_policy_rarely_succeeds() {
        let mut env = SparseGridworld::new(10, 10, Walls::TwoRoom, 0).unwrap();
        assert!(random_success_rate(&mut env, 10_000, 4) < 0.05);
        let mut env = SparseGridworld::new(8, 8, Walls::TwoRoom, 0).unwrap();
        assert!(random_success_rate(&mut env, 10_000, 5) < 0.05);
    }

    #[test]
    fn deterministic_trajectories() {
        let actions = [RIGHT, DOWN, RIGHT, RIGHT, DOWN, LEFT, DOWN];
        let a = rollout(&mut two_room(GridObservation::Image), &actions);
        let b = rollout(&mut two_room(GridObservation::Image), &actions);
        assert_eq!(a, b);
    }
}
