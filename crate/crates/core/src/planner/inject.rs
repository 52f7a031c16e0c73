use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

use super::{Obstacle, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ObstacleShape {
    Sphere { radius: f64 },
    AxisCube { space_diagonal: f64 },
}

impl ObstacleShape {
    pub fn at(&self, center: Vector) -> Result<Obstacle> {
        match *self {
            ObstacleShape::Sphere { radius } => Obstacle::sphere(center, radius),
            ObstacleShape::AxisCube { space_diagonal } => Obstacle::cube(center, space_diagonal),
        }
    }
}

/// Which part of the path an obstacle may sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Anywhere except where the path crosses itself.
    SinglePass,
    /// Only where the remaining path passes the obstacle at least twice.
    Crossing,
    Any,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionConfig {
    pub shape: ObstacleShape,
    /// Inclusive range of steps at which the obstacle may appear.
    pub appear_steps: (usize, usize),
    /// Minimum number of steps between appearance and the center's step.
    pub lead_min: usize,
    pub lead_max: Option<usize>,
    pub placement: Placement,
    /// When set, the final plan point must lie outside the obstacle inflated
    /// by this factor, so the goal itself stays reachable.
    pub goal_clearance: Option<f64>,
    pub max_attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub appear_step: usize,
    /// Step of the pool entry the center was taken from.
    pub center_step: usize,
    pub obstacle: Obstacle,
}

/// Number of maximal runs of consecutive points inside `obs`.
pub fn passes(points: &[Vector], obs: &Obstacle) -> usize {
    let mut runs = 0;
    let mut inside = false;
    for p in points {
        let now = obs.contains(p);
        if now && !inside {
            runs += 1;
        }
        inside = now;
    }
    runs
}

/// Draws an appearance step uniformly from `cfg.appear_steps` and a center
/// uniformly from the `(step, point)` pool entries inside the lead window,
/// retrying until the nominal plan collides after the appearance step, the
/// current position is clear, the placement rule holds and, if requested,
/// the goal is clear.
pub fn inject_obstacle<R: Rng>(
    nominal: &Trajectory,
    pool: &[(usize, Vector)],
    cfg: &InjectionConfig,
    rng: &mut R,
) -> Result<Injection> {
    let (lo, hi) = cfg.appear_steps;
    if lo > hi || hi + 1 >= nominal.len() {
        return Err(Error::InvalidConfig(format!(
            "appearance range [{lo}, {hi}] does not fit a {}-point plan",
            nominal.len()
        )));
    }
    for _ in 0..cfg.max_attempts.max(1) {
        let appear = rng.random_range(lo..=hi);
        let first = appear + cfg.lead_min;
        let last = cfg.lead_max.map_or(usize::MAX, |m| appear + m);
        let window: Vec<&(usize, Vector)> = pool.iter().filter(|(s, _)| (first..=last).contains(s)).collect();
        if window.is_empty() {
            continue;
        }
        let (center_step, center) = window[rng.random_range(0..window.len())];
        let obstacle = cfg.shape.at(center.clone())?;
        let ahead = &nominal.points[appear + 1..];
        if obstacle.contains(&nominal.points[appear]) || !ahead.iter().any(|p| obstacle.contains(p)) {
            continue;
        }
        if let Some(f) = cfg.goal_clearance {
            if obstacle
                .inflated(f)
                .contains(ahead.last().expect("plan has >= 2 points"))
            {
                continue;
            }
        }
        let ok = match cfg.placement {
            Placement::Any => true,
            Placement::SinglePass => passes(&nominal.points, &obstacle.inflated(2.0)) < 2,
            Placement::Crossing => passes(ahead, &obstacle) >= 2,
        };
        if ok {
            return Ok(Injection {
                appear_step: appear,
                center_step: *center_step,
                obstacle,
            });
        }
    }
    Err(Error::InvalidConfig(format!(
        "no admissible obstacle found in {} attempts",
        cfg.max_attempts
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A loop that passes the origin at steps 0..3 and again near the end.
    fn loop_plan() -> Trajectory {
        let n = 40;
        let pts: Vec<Vector> = (0..n)
            .map(|i| {
                let a = i as f64 / (n - 1) as f64 * 2.0 * std::f64::consts::PI;
                Vector::from_vec(vec![3.0 * a.sin(), 1.5 * (1.0 - a.cos())])
            })
            .collect();
        let inputs = (0..n).map(|i| Vector::from_element(1, i as f64)).collect();
        Trajectory::new(inputs, pts).unwrap()
    }

    fn cfg(placement: Placement) -> InjectionConfig {
        InjectionConfig {
            shape: ObstacleShape::Sphere { radius: 0.5 },
            appear_steps: (0, 30),
            lead_min: 2,
            lead_max: None,
            placement,
            goal_clearance: None,
            max_attempts: 500,
        }
    }

    fn pool(t: &Trajectory) -> Vec<(usize, Vector)> {
        t.points.iter().cloned().enumerate().collect()
    }

    #[test]
    fn same_seed_same_obstacle() {
        let t = loop_plan();
        let a = inject_obstacle(&t, &pool(&t), &cfg(Placement::Any), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = inject_obstacle(&t, &pool(&t), &cfg(Placement::Any), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert!(pool(&t).iter().any(|(_, p)| p == a.obstacle.center()));
    }

    #[test]
    fn placement_rules() {
        let t = loop_plan();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let single = inject_obstacle(&t, &pool(&t), &cfg(Placement::SinglePass), &mut rng).unwrap();
            assert!(passes(&t.points, &single.obstacle.inflated(2.0)) < 2);
            assert!(!single.obstacle.contains(&t.points[single.appear_step]));
        }
        // The loop only returns to the origin at its very end, so the only
        // crossing obstacle must sit at the start, before any appearance step.
        let err = inject_obstacle(
            &t,
            &pool(&t),
            &cfg(Placement::Crossing),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(err.is_err());
    }

    #[test]
    fn counts_runs() {
        let obs = Obstacle::sphere(Vector::zeros(1), 1.0).unwrap();
        let pts: Vec<Vector> = [0.0, 0.5, 3.0, 0.2, 4.0, 0.0]
            .iter()
            .map(|x| Vector::from_element(1, *x))
            .collect();
        assert_eq!(passes(&pts, &obs), 3);
    }
}
