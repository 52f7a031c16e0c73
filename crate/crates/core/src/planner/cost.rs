use crate::error::{Error, Result};
use crate::linalg::Vector;

use super::Obstacle;

/// Penalty for each violated term.
pub const PENALTY: f64 = 1000.0;

/// Planned trajectory: paired inputs and predicted outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub inputs: Vec<Vector>,
    pub points: Vec<Vector>,
}

impl Trajectory {
    pub fn new(inputs: Vec<Vector>, points: Vec<Vector>) -> Result<Self> {
        if inputs.len() != points.len() || points.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "trajectory needs >= 2 paired points, got {} inputs and {} points",
                inputs.len(),
                points.len()
            )));
        }
        Ok(Self { inputs, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with columns `step,s0..,x0..`; `first_step` numbers the first row.
    pub fn to_csv(&self, first_step: usize) -> String {
        let i = self.inputs[0].len();
        let d = self.points[0].len();
        let mut out = String::from("step");
        (0..i).for_each(|k| out.push_str(&format!(",s{k}")));
        (0..d).for_each(|k| out.push_str(&format!(",x{k}")));
        out.push('\n');
        for (n, (s, x)) in self.inputs.iter().zip(&self.points).enumerate() {
            out.push_str(&(first_step + n).to_string());
            for v in s.iter().chain(x.iter()) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn collision_cost(points: &[Vector], obs: &Obstacle) -> f64 {
    if points.iter().any(|p| obs.contains(p)) {
        PENALTY
    } else {
        0.0
    }
}

pub fn continuity_cost(points: &[Vector], threshold: f64) -> f64 {
    if points.windows(2).any(|w| (&w[1] - &w[0]).norm() > threshold) {
        PENALTY
    } else {
        0.0
    }
}

/// `c_collision + c_cont`, each term either 0 or [`PENALTY`].
pub fn cost(traj: &Trajectory, obs: &Obstacle, cont_threshold: f64) -> f64 {
    points_cost(&traj.points, obs, cont_threshold)
}

pub(crate) fn points_cost(points: &[Vector], obs: &Obstacle, cont_threshold: f64) -> f64 {
    collision_cost(points, obs) + continuity_cost(points, cont_threshold)
}
