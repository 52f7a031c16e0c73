//! Deterministic synthetic demonstration sets.
//!
//! `letter_a` draws a two-stroke letter "A" over time `t in [0, 1]`: an
//! inverted V followed by a crossbar that crosses both legs, so the mean
//! path intersects itself twice. `handover` produces minimum-jerk hand and
//! end-effector paths where the end-effector position is the output and the
//! hand position the input.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Demonstration;
use crate::error::{Error, Result};
use crate::linalg::{linspace, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct LetterConfig {
    pub demos: usize,
    pub samples: usize,
    /// Std of per-demo waypoint displacement.
    pub waypoint_noise: f64,
    /// Std of the per-demo relative scale.
    pub scale_noise: f64,
    pub offset_noise: f64,
    /// Maximum amplitude of the per-demo time warp.
    pub time_warp: f64,
    pub obs_noise: f64,
}

impl Default for LetterConfig {
    fn default() -> Self {
        Self {
            demos: 10,
            samples: 200,
            waypoint_noise: 0.3,
            scale_noise: 0.03,
            offset_noise: 0.15,
            time_warp: 0.0,
            obs_noise: 0.02,
        }
    }
}

const LETTER_WAYPOINTS: [[f64; 2]; 6] = [
    [-3.0, -5.0],
    [0.0, 5.0],
    [3.0, -5.0],
    [4.2, -3.0],
    [4.0, -1.0],
    [-4.0, -1.0],
];

fn normal(std: f64) -> Normal<f64> {
    Normal::new(0.0, std.max(0.0)).expect("finite std")
}

pub fn letter_a(cfg: &LetterConfig, seed: u64) -> Result<Vec<Demonstration>> {
    if cfg.demos == 0 || cfg.samples < 2 {
        return Err(Error::InvalidConfig(
            "letter generator needs >= 1 demo and >= 2 samples".into(),
        ));
    }
    if cfg.time_warp * 2.0 * std::f64::consts::PI >= 1.0 {
        return Err(Error::InvalidConfig("time warp too large to stay monotone".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wp = normal(cfg.waypoint_noise);
    let sc = normal(cfg.scale_noise);
    let off = normal(cfg.offset_noise);
    let obs = normal(cfg.obs_noise);
    let times = linspace(0.0, 1.0, cfg.samples);

    (0..cfg.demos)
        .map(|_| {
            let scale = 1.0 + sc.sample(&mut rng);
            let offset = [off.sample(&mut rng), off.sample(&mut rng)];
            let pts: Vec<[f64; 2]> = LETTER_WAYPOINTS
                .iter()
                .map(|p| {
                    [
                        p[0] * scale + offset[0] + wp.sample(&mut rng),
                        p[1] * scale + offset[1] + wp.sample(&mut rng),
                    ]
                })
                .collect();
            let curve = ArcCurve::new(&catmull_rom(&pts, 40));
            let warp = (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0) * cfg.time_warp;
            let mut inputs = Vec::with_capacity(cfg.samples);
            let mut outputs = Vec::with_capacity(cfg.samples);
            for &t in &times {
                let u = t + warp * (2.0 * std::f64::consts::PI * t).sin();
                let p = curve.at(u);
                inputs.push(Vector::from_element(1, t));
                outputs.push(Vector::from_vec(vec![
                    p[0] + obs.sample(&mut rng),
                    p[1] + obs.sample(&mut rng),
                ]));
            }
            Demonstration::new(inputs, outputs)
        })
        .collect()
}

/// Uniform Catmull-Rom spline through `pts`, `per_segment` samples per span.
fn catmull_rom(pts: &[[f64; 2]], per_segment: usize) -> Vec<[f64; 2]> {
    let n = pts.len();
    let get = |i: isize| pts[i.clamp(0, n as isize - 1) as usize];
    let mut out = Vec::with_capacity((n - 1) * per_segment + 1);
    for seg in 0..n - 1 {
        let i = seg as isize;
        let (p0, p1, p2, p3) = (get(i - 1), get(i), get(i + 1), get(i + 2));
        for k in 0..per_segment {
            let t = k as f64 / per_segment as f64;
            let (t2, t3) = (t * t, t * t * t);
            let mut q = [0.0; 2];
            for d in 0..2 {
                q[d] = 0.5
                    * (2.0 * p1[d]
                        + (-p0[d] + p2[d]) * t
                        + (2.0 * p0[d] - 5.0 * p1[d] + 4.0 * p2[d] - p3[d]) * t2
                        + (-p0[d] + 3.0 * p1[d] - 3.0 * p2[d] + p3[d]) * t3);
            }
            out.push(q);
        }
    }
    out.push(pts[n - 1]);
    out
}

/// Polyline parameterized by normalized arc length.
struct ArcCurve {
    pts: Vec<[f64; 2]>,
    cum: Vec<f64>,
}

impl ArcCurve {
    fn new(pts: &[[f64; 2]]) -> Self {
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            cum.push(cum.last().unwrap() + d);
        }
        Self { pts: pts.to_vec(), cum }
    }

    fn at(&self, u: f64) -> [f64; 2] {
        let total = *self.cum.last().unwrap();
        let target = u.clamp(0.0, 1.0) * total;
        let i = match self.cum.partition_point(|c| *c <= target) {
            0 => 0,
            p => (p - 1).min(self.pts.len() - 2),
        };
        let span = self.cum[i + 1] - self.cum[i];
        let w = if span > 0.0 { (target - self.cum[i]) / span } else { 0.0 };
        [
            self.pts[i][0] + w * (self.pts[i + 1][0] - self.pts[i][0]),
            self.pts[i][1] + w * (self.pts[i + 1][1] - self.pts[i][1]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoverConfig {
    pub demos: usize,
    pub samples: usize,
    /// Std of per-demo hand start displacement (meters).
    pub start_noise: f64,
    /// Std of per-demo end-effector start displacement (meters).
    pub robot_start_noise: f64,
    /// Std of per-demo handover-location displacement (meters).
    pub handover_noise: f64,
    pub obs_noise: f64,
    /// Std of a per-demo mid-path bump of the end-effector path, which
    /// vanishes at both ends (meters).
    pub path_noise: f64,
    /// Fraction of the horizon the end-effector waits before moving.
    pub robot_delay: f64,
}

impl Default for HandoverConfig {
    fn default() -> Self {
        Self {
            demos: 5,
            samples: 200,
            start_noise: 0.01,
            robot_start_noise: 0.05,
            handover_noise: 0.01,
            obs_noise: 0.002,
            path_noise: 0.08,
            robot_delay: 0.1,
        }
    }
}

const HAND_START: [f64; 3] = [0.35, -0.35, 0.05];
const HANDOVER: [f64; 3] = [0.55, 0.0, 0.30];
const ROBOT_START: [f64; 3] = [0.40, 0.45, 0.10];
const GRASP_OFFSET: [f64; 3] = [0.0, 0.10, 0.0];

fn min_jerk(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

pub fn handover(cfg: &HandoverConfig, seed: u64) -> Result<Vec<Demonstration>> {
    if cfg.demos == 0 || cfg.samples < 2 || !(0.0..1.0).contains(&cfg.robot_delay) {
        return Err(Error::InvalidConfig("invalid handover generator configuration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sn = normal(cfg.start_noise);
    let rsn = normal(cfg.robot_start_noise);
    let hn = normal(cfg.handover_noise);
    let obs = normal(cfg.obs_noise);
    let lift_noise = normal(0.02);
    let pn = normal(cfg.path_noise);
    let times = linspace(0.0, 1.0, cfg.samples);
    let jitter = |base: [f64; 3], dist: &Normal<f64>, rng: &mut ChaCha8Rng| {
        Vector::from_iterator(3, base.iter().map(|b| b + dist.sample(rng)))
    };

    (0..cfg.demos)
        .map(|_| {
            let h0 = jitter(HAND_START, &sn, &mut rng);
            let hh = jitter(HANDOVER, &hn, &mut rng);
            let r0 = jitter(ROBOT_START, &rsn, &mut rng);
            let rh = &hh + Vector::from_column_slice(&GRASP_OFFSET);
            let lift = 0.10 + lift_noise.sample(&mut rng);
            let swing = 0.08;
            let bump = jitter([0.0; 3], &pn, &mut rng);
            let mut inputs = Vec::with_capacity(cfg.samples);
            let mut outputs = Vec::with_capacity(cfg.samples);
            for &t in &times {
                let th = min_jerk(t);
                let tr = min_jerk((t - cfg.robot_delay) / (1.0 - cfg.robot_delay));
                let mut h = &h0 + (&hh - &h0) * th;
                h[2] += lift * (std::f64::consts::PI * th).sin();
                let mut r = &r0 + (&rh - &r0) * tr;
                r[0] += swing * (std::f64::consts::PI * tr).sin();
                r[2] += 0.5 * lift * (std::f64::consts::PI * tr).sin();
                r += &bump * (std::f64::consts::PI * tr).sin();
                inputs.push(h.map(|v| v + obs.sample(&mut rng)));
                outputs.push(r.map(|v| v + obs.sample(&mut rng)));
            }
            Demonstration::new(inputs, outputs)
        })
        .collect()
}
