//! Sampler-driven searches for a collision-free replan.
//!
//! Every search scores `X_pred = [current position] ++ predictions over the
//! remaining plan inputs`, where the current position is the method's own
//! nominal prediction at the first input. The first evaluation is always the
//! unmodified plan; later ones come from the sampler.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cost::{points_cost, PENALTY};
use super::sampler::{Sampler, SamplerKind};
use super::{Obstacle, Trajectory};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::kmp::{fit_count, KmpModel, ViaPoint};
use crate::linalg::{Matrix, Vector};
use crate::nskmp::{Modulation, NullSpaceReference, QueryGrid};
use crate::promp::PrompModel;
use crate::refdist::{perturb_component_mean, Conditioner, GaussianMixture};

/// Cost recorded for a candidate whose evaluation failed numerically.
pub const ERROR_COST: f64 = 3.0 * PENALTY;

/// How sampled inputs `s_hat` (or via-point inputs) are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputWindow {
    /// Scalar input in `[s0, min(s0 + width, s_end)]`.
    Ahead { width: f64 },
    /// Scalar input anywhere in `[s0, s_end]`.
    Horizon,
    /// One of the remaining plan inputs, chosen by index.
    Remaining,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Interval for every component of `xi_hat` (or of a mean perturbation).
    pub xi_range: (f64, f64),
    pub input_window: InputWindow,
    pub budget: usize,
    pub seed: u64,
    /// ChaCha stream for the sampler.
    pub stream: u64,
    pub sampler: SamplerKind,
    /// Number of null-space references or via-points per candidate.
    pub refs: usize,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidConfig("search budget must be >= 1".into()));
        }
        if self.refs == 0 {
            return Err(Error::InvalidConfig(
                "at least one reference per candidate is required".into(),
            ));
        }
        let (lo, hi) = self.xi_range;
        if !(lo < hi) {
            return Err(Error::InvalidConfig(format!("degenerate range [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// The replanning problem: remaining plan inputs (the first is the current
/// one), the obstacle, and the continuity threshold.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub inputs: Vec<Vector>,
    pub obstacle: Obstacle,
    pub cont_threshold: f64,
}

impl Scenario {
    pub fn new(inputs: Vec<Vector>, obstacle: Obstacle, cont_threshold: Option<f64>) -> Result<Self> {
        if inputs.len() < 2 {
            return Err(Error::InvalidConfig("a scenario needs >= 2 remaining inputs".into()));
        }
        let cont_threshold = cont_threshold.unwrap_or_else(|| obstacle.default_threshold());
        Ok(Self {
            inputs,
            obstacle,
            cont_threshold,
        })
    }

    fn window_bounds(&self, w: InputWindow) -> Result<(f64, f64)> {
        if w == InputWindow::Remaining {
            return Ok((0.0, self.inputs.len() as f64));
        }
        let scalar = |s: &Vector| -> Result<f64> {
            if s.len() != 1 {
                return Err(Error::InvalidConfig("this input window needs scalar inputs".into()));
            }
            Ok(s[0])
        };
        let s0 = scalar(&self.inputs[0])?;
        let end = scalar(self.inputs.last().expect("non-empty"))?;
        let hi = match w {
            InputWindow::Ahead { width } => (s0 + width).min(end),
            InputWindow::Horizon => end,
            InputWindow::Remaining => unreachable!("handled above"),
        };
        Ok((s0, hi.max(s0 + 1e-9)))
    }

    fn decode_input(&self, w: InputWindow, u: f64) -> Vector {
        match w {
            InputWindow::Remaining => self.inputs[(u.max(0.0) as usize).min(self.inputs.len() - 1)].clone(),
            _ => Vector::from_element(1, u),
        }
    }
}

/// One applied modification: a null-space reference, a via-point, or a mean
/// perturbation (with empty input).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adaptation {
    pub input: Vec<f64>,
    pub value: Vec<f64>,
}

impl Adaptation {
    fn new(input: &Vector, value: &Vector) -> Self {
        Self {
            input: input.iter().copied().collect(),
            value: value.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// First zero-cost trajectory, or the best one seen.
    pub trajectory: Trajectory,
    pub success: bool,
    pub evals: usize,
    pub best_cost: f64,
    pub adaptations: Vec<Adaptation>,
    /// KMP factorizations performed during the search.
    pub fits: usize,
    /// Mixture component perturbed by the GMM baseline.
    pub component: Option<usize>,
    pub wall_time: Duration,
}

struct Candidate {
    points: Vec<Vector>,
    used: Vec<Adaptation>,
}

fn drive(
    scn: &Scenario,
    cfg: &SearchConfig,
    bounds: Vec<(f64, f64)>,
    start: Instant,
    mut eval: impl FnMut(Option<&[f64]>) -> Result<Candidate>,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let fits_before = fit_count();
    let mut sampler = Sampler::new(cfg.sampler, bounds, cfg.seed, cfg.stream)?;
    let nominal = eval(None)?;
    let mut best_cost = points_cost(&nominal.points, &scn.obstacle, scn.cont_threshold);
    let mut best = nominal;
    let mut evals = 1;
    while best_cost > 0.0 && evals < cfg.budget {
        let x = sampler.propose();
        evals += 1;
        let (c, cand) = match eval(Some(&x)) {
            Ok(cand) => (points_cost(&cand.points, &scn.obstacle, scn.cont_threshold), Some(cand)),
            Err(_) => (ERROR_COST, None),
        };
        sampler.update(x, c);
        if c < best_cost {
            best_cost = c;
            best = cand.expect("finite cost comes from a candidate");
        }
    }
    let wall_time = start.elapsed();
    Ok(SearchOutcome {
        trajectory: Trajectory::new(scn.inputs.clone(), best.points)?,
        success: best_cost == 0.0,
        evals,
        best_cost,
        adaptations: best.used,
        fits: fit_count() - fits_before,
        component: None,
        wall_time,
    })
}

fn xi_bounds(cfg: &SearchConfig, window: (f64, f64), per_ref: usize) -> Vec<(f64, f64)> {
    let mut b = Vec::with_capacity(cfg.refs * (1 + per_ref));
    for _ in 0..cfg.refs {
        b.push(window);
        b.extend(std::iter::repeat_n(cfg.xi_range, per_ref));
    }
    b
}

/// Samples `(s_hat, xi_hat)` pairs and evaluates the null-space modulated plan.
/// The model is never refactorized.
pub fn search_nskmp<K: Kernel + Clone>(
    model: &KmpModel<K>,
    scn: &Scenario,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    let start = Instant::now();
    let grid = QueryGrid::new(model, scn.inputs.clone())?;
    nskmp_on_grid(model, &grid, scn, cfg, start)
}

/// Same as [`search_nskmp`] with the kernel rows of the plan computed ahead
/// of time. `grid` must cover exactly the scenario inputs.
pub fn search_nskmp_on_grid<K: Kernel + Clone>(
    model: &KmpModel<K>,
    grid: &QueryGrid,
    scn: &Scenario,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    let start = Instant::now();
    if grid.inputs() != scn.inputs.as_slice() {
        return Err(Error::InvalidConfig(
            "query grid does not match the scenario inputs".into(),
        ));
    }
    nskmp_on_grid(model, grid, scn, cfg, start)
}

fn nskmp_on_grid<K: Kernel + Clone>(
    model: &KmpModel<K>,
    grid: &QueryGrid,
    scn: &Scenario,
    cfg: &SearchConfig,
    start: Instant,
) -> Result<SearchOutcome> {
    let d = model.output_dim();
    let current = grid.base()[0].clone();
    let bounds = xi_bounds(cfg, scn.window_bounds(cfg.input_window)?, d);
    drive(scn, cfg, bounds, start, |x| {
        let Some(x) = x else {
            return Ok(Candidate {
                points: grid.base().to_vec(),
                used: Vec::new(),
            });
        };
        let refs: Vec<NullSpaceReference> = x
            .chunks(1 + d)
            .map(|c| {
                NullSpaceReference::new(
                    scn.decode_input(cfg.input_window, c[0]),
                    Vector::from_column_slice(&c[1..]),
                )
            })
            .collect();
        let m = Modulation::new(model, &refs)?;
        let mut points = grid.modulated(model, &m);
        points[0] = current.clone();
        let used = refs.iter().map(|r| Adaptation::new(&r.input, &r.target)).collect();
        Ok(Candidate { points, used })
    })
}

/// Point on the shell between the obstacle surface and twice its extent:
/// `rho` in `[1, 2]` scales the extent and `dir` (length `D`) gives the
/// direction. For spheres the shell is the annulus `[r, 2r]`; for cubes it is
/// the region between the cube and the cube with doubled edge.
pub fn shell_point(obs: &Obstacle, rho: f64, dir: &[f64]) -> Vector {
    let center = obs.center();
    let mut u = Vector::from_column_slice(dir);
    if u.norm() < 1e-12 {
        u = Vector::zeros(center.len());
        u[0] = 1.0;
    }
    let scale = match obs {
        Obstacle::Sphere { .. } => u.norm(),
        Obstacle::AxisCube { .. } => u.amax(),
    };
    center + u * (rho * obs.extent() / scale)
}

/// Direction parameters: an angle for 2D, `(z, phi)` for 3D, raw components
/// in `[-1, 1]` otherwise.
fn direction_bounds(d: usize) -> Vec<(f64, f64)> {
    use std::f64::consts::TAU;
    match d {
        2 => vec![(0.0, TAU)],
        3 => vec![(-1.0, 1.0), (0.0, TAU)],
        _ => vec![(-1.0, 1.0); d],
    }
}

fn direction(d: usize, p: &[f64]) -> Vec<f64> {
    match d {
        2 => vec![p[0].cos(), p[0].sin()],
        3 => {
            let r = (1.0 - p[0] * p[0]).max(0.0).sqrt();
            vec![r * p[1].cos(), r * p[1].sin(), p[0]]
        }
        _ => p.to_vec(),
    }
}

fn via_bounds(scn: &Scenario, cfg: &SearchConfig, d: usize) -> Result<Vec<(f64, f64)>> {
    let window = scn.window_bounds(cfg.input_window)?;
    let mut b = Vec::new();
    for _ in 0..cfg.refs {
        b.push(window);
        b.push((1.0, 2.0));
        b.extend(direction_bounds(d));
    }
    Ok(b)
}

fn decode_vias(scn: &Scenario, cfg: &SearchConfig, d: usize, x: &[f64]) -> Vec<(Vector, Vector)> {
    let per = 2 + direction_bounds(d).len();
    x.chunks(per)
        .map(|c| {
            let input = scn.decode_input(cfg.input_window, c[0]);
            let mean = shell_point(&scn.obstacle, c[1], &direction(d, &c[2..]));
            (input, mean)
        })
        .collect()
}

/// Samples via-points in the shell around the obstacle and refits the KMP
/// once per evaluated candidate.
pub fn search_kmp_via<K: Kernel + Clone>(
    model: &KmpModel<K>,
    scn: &Scenario,
    cfg: &SearchConfig,
    via_covariance: f64,
) -> Result<SearchOutcome> {
    let start = Instant::now();
    let d = model.output_dim();
    let grid = QueryGrid::new(model, scn.inputs.clone())?;
    let current = grid.base()[0].clone();
    let bounds = via_bounds(scn, cfg, d)?;
    drive(scn, cfg, bounds, start, |x| {
        let Some(x) = x else {
            return Ok(Candidate {
                points: grid.base().to_vec(),
                used: Vec::new(),
            });
        };
        let vias = decode_vias(scn, cfg, d, x);
        let vps = vias
            .iter()
            .map(|(s, m)| ViaPoint::new(s.clone(), m.clone(), Matrix::identity(d, d) * via_covariance))
            .collect::<Result<Vec<_>>>()?;
        let adapted = model.adapt_via_points(&vps)?;
        let mut points = Vec::with_capacity(scn.inputs.len());
        points.push(current.clone());
        for s in &scn.inputs[1..] {
            points.push(adapted.predict(s)?);
        }
        let used = vias.iter().map(|(s, m)| Adaptation::new(s, m)).collect();
        Ok(Candidate { points, used })
    })
}

/// Same sampling scheme as [`search_kmp_via`] using ProMP conditioning.
pub fn search_promp_via(
    promp: &PrompModel,
    scn: &Scenario,
    cfg: &SearchConfig,
    via_covariance: f64,
) -> Result<SearchOutcome> {
    let start = Instant::now();
    let d = promp.output_dim;
    let times: Vec<f64> = scn
        .inputs
        .iter()
        .map(|s| {
            if s.len() == 1 {
                Ok(s[0])
            } else {
                Err(Error::InvalidConfig("ProMP needs scalar inputs".into()))
            }
        })
        .collect::<Result<_>>()?;
    // Basis activations at the plan times, `M x B`; the plan is `phi * W` with
    // `W` the `B x D` weight mean.
    let b = promp.basis_count();
    let mut phi = Matrix::zeros(times.len(), b);
    for (i, t) in times.iter().enumerate() {
        phi.row_mut(i).copy_from(&promp.basis(*t).transpose());
    }
    let plan = |mu_w: &Vector| -> Vec<Vector> {
        let w = nalgebra::DMatrixView::from_slice(mu_w.as_slice(), b, d);
        let x = &phi * w;
        x.row_iter().map(|r| r.transpose()).collect()
    };
    let nominal = plan(&promp.mu_w);
    let sigma = Matrix::identity(d, d) * via_covariance;
    let bounds = via_bounds(scn, cfg, d)?;
    drive(scn, cfg, bounds, start, |x| {
        let Some(x) = x else {
            return Ok(Candidate {
                points: nominal.clone(),
                used: Vec::new(),
            });
        };
        let vias = decode_vias(scn, cfg, d, x);
        let targets: Vec<(f64, Vector)> = vias.iter().map(|(s, m)| (s[0], m.clone())).collect();
        let mut points = plan(&promp.conditioned_mean(&targets, &sigma)?);
        points[0] = nominal[0].clone();
        let used = vias.iter().map(|(s, m)| Adaptation::new(s, m)).collect();
        Ok(Candidate { points, used })
    })
}

/// Optimizes the joint mean of one randomly chosen mixture component within
/// `cfg.xi_range` per dimension; the plan is the GMR mean over the scenario
/// inputs, rebuilt for every candidate.
pub fn search_gmm_baseline(gmm: &GaussianMixture, scn: &Scenario, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream);
    let component = rng.random_range(0..gmm.components());
    let gmr_path = |g: &GaussianMixture| -> Result<Vec<Vector>> {
        let cond = Conditioner::new(g)?;
        scn.inputs.iter().map(|s| cond.query(s).map(|o| o.mean)).collect()
    };
    let nominal = gmr_path(gmm)?;
    let bounds = vec![cfg.xi_range; gmm.joint_dim()];
    let mut out = drive(scn, cfg, bounds, start, |x| {
        let Some(x) = x else {
            return Ok(Candidate {
                points: nominal.clone(),
                used: Vec::new(),
            });
        };
        let delta = Vector::from_column_slice(x);
        let g = perturb_component_mean(gmm, component, &delta)?;
        let mut points = gmr_path(&g)?;
        points[0] = nominal[0].clone();
        let used = vec![Adaptation {
            input: Vec::new(),
            value: x.to_vec(),
        }];
        Ok(Candidate { points, used })
    })?;
    out.component = Some(component);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::cost::cost;
    use crate::planner::experiment::{LetterExperimentConfig, LetterModels};
    use crate::planner::inject::{inject_obstacle, InjectionConfig, ObstacleShape, Placement};
    use crate::refdist::synth::{letter_a, LetterConfig};
    use std::sync::OnceLock;

    fn models() -> &'static LetterModels {
        static M: OnceLock<LetterModels> = OnceLock::new();
        M.get_or_init(|| {
            let demos = letter_a(&LetterConfig::default(), 0).unwrap();
            let cfg = LetterExperimentConfig {
                steps: 100,
                ..Default::default()
            };
            LetterModels::fit(&demos, &cfg).unwrap()
        })
    }

    fn search_cfg(budget: usize) -> SearchConfig {
        SearchConfig {
            xi_range: (-1000.0, 1000.0),
            input_window: InputWindow::Ahead { width: 0.2 },
            budget,
            seed: 3,
            stream: 1,
            sampler: SamplerKind::Tpe,
            refs: 1,
        }
    }

    fn on_path(seed: u64) -> Scenario {
        let m = models();
        let inj = inject_obstacle(
            &m.nominal,
            &m.pool(),
            &InjectionConfig {
                shape: ObstacleShape::Sphere { radius: 0.5 },
                appear_steps: (0, 80),
                lead_min: 5,
                lead_max: Some(20),
                placement: Placement::SinglePass,
                goal_clearance: None,
                max_attempts: 10_000,
            },
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap();
        Scenario::new(m.plan_inputs[inj.appear_step..].to_vec(), inj.obstacle, None).unwrap()
    }

    fn off_path() -> Scenario {
        let m = models();
        let far = Obstacle::sphere(Vector::from_vec(vec![50.0, 50.0]), 0.5).unwrap();
        Scenario::new(m.plan_inputs[10..].to_vec(), far, None).unwrap()
    }

    fn rescore(out: &SearchOutcome, scn: &Scenario) -> f64 {
        cost(&out.trajectory, &scn.obstacle, scn.cont_threshold)
    }

    #[test]
    fn off_path_obstacle_is_solved_by_the_nominal_plan() {
        let m = models();
        let scn = off_path();
        let cfg = search_cfg(50);
        let outs = [
            search_nskmp(&m.kmp, &scn, &cfg).unwrap(),
            search_kmp_via(&m.kmp, &scn, &cfg, 1e-6).unwrap(),
            search_promp_via(&m.promp, &scn, &cfg, 1e-6).unwrap(),
            search_gmm_baseline(&m.gmm, &scn, &cfg).unwrap(),
        ];
        for out in &outs {
            assert!(out.success);
            assert_eq!(out.evals, 1);
            assert_eq!(out.fits, 0);
            assert!(out.adaptations.is_empty());
            assert_eq!(rescore(out, &scn), 0.0);
        }
        assert_eq!(outs[0].trajectory.points, m.grid.tail(10).unwrap().base());
    }

    #[test]
    fn nskmp_finds_a_clear_plan_without_refitting() {
        let m = models();
        for seed in 0..3 {
            let scn = on_path(seed);
            let out = search_nskmp(&m.kmp, &scn, &search_cfg(2000)).unwrap();
            assert!(out.success, "seed {seed}");
            assert!(out.evals > 1);
            assert_eq!(out.fits, 0);
            assert_eq!(out.adaptations.len(), 1);
            assert_eq!(rescore(&out, &scn), 0.0);
            let s = out.adaptations[0].input[0];
            assert!(s >= scn.inputs[0][0] && s <= scn.inputs[0][0] + 0.2);
        }
    }

    #[test]
    fn cached_grid_gives_the_same_search() {
        let m = models();
        let scn = on_path(1);
        let start = m.plan_inputs.len() - scn.inputs.len();
        let cfg = search_cfg(2000);
        let a = search_nskmp(&m.kmp, &scn, &cfg).unwrap();
        let b = search_nskmp_on_grid(&m.kmp, &m.grid.tail(start).unwrap(), &scn, &cfg).unwrap();
        assert_eq!(a.evals, b.evals);
        assert_eq!(a.trajectory, b.trajectory);
        assert!(search_nskmp_on_grid(&m.kmp, &m.grid.tail(start + 1).unwrap(), &scn, &cfg).is_err());
    }

    #[test]
    fn kmp_refits_once_per_candidate_and_meets_its_via_point() {
        let m = models();
        let scn = on_path(2);
        let out = search_kmp_via(&m.kmp, &scn, &search_cfg(2000), 1e-6).unwrap();
        assert!(out.success);
        assert_eq!(out.fits, out.evals - 1);
        assert_eq!(rescore(&out, &scn), 0.0);
        let via = &out.adaptations[0];
        let adapted = m
            .kmp
            .adapt_via_points(&[ViaPoint::new(
                Vector::from_column_slice(&via.input),
                Vector::from_column_slice(&via.value),
                Matrix::identity(2, 2) * 1e-6,
            )
            .unwrap()])
            .unwrap();
        let hit = adapted.predict(&Vector::from_column_slice(&via.input)).unwrap();
        assert!((hit - Vector::from_column_slice(&via.value)).amax() < 1e-2);
        // The via-point sits in the shell around the obstacle.
        let r = (Vector::from_column_slice(&via.value) - scn.obstacle.center()).norm();
        assert!((0.5 - 1e-9..=1.0 + 1e-9).contains(&r));
    }

    #[test]
    fn promp_search_succeeds_without_kmp_fits() {
        let m = models();
        let scn = on_path(0);
        let out = search_promp_via(&m.promp, &scn, &search_cfg(2000), 1e-6).unwrap();
        assert!(out.success);
        assert_eq!(out.fits, 0);
        assert_eq!(rescore(&out, &scn), 0.0);
    }

    #[test]
    fn exhausted_budget_is_reported_not_fatal() {
        let m = models();
        let scn = on_path(0);
        let out = search_nskmp(&m.kmp, &scn, &search_cfg(1)).unwrap();
        assert!(!out.success);
        assert_eq!(out.evals, 1);
        assert!(out.best_cost >= PENALTY);
        assert_eq!(out.best_cost, rescore(&out, &scn));
    }

    #[test]
    fn searches_are_deterministic() {
        let m = models();
        let scn = on_path(1);
        let cfg = search_cfg(2000);
        let a = search_nskmp(&m.kmp, &scn, &cfg).unwrap();
        let b = search_nskmp(&m.kmp, &scn, &cfg).unwrap();
        assert_eq!(
            (a.evals, &a.adaptations, &a.trajectory),
            (b.evals, &b.adaptations, &b.trajectory)
        );
        let g1 = search_gmm_baseline(&m.gmm, &scn, &search_cfg(30)).unwrap();
        let g2 = search_gmm_baseline(&m.gmm, &scn, &search_cfg(30)).unwrap();
        assert_eq!(g1.component, g2.component);
        assert_eq!(g1.trajectory, g2.trajectory);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let m = models();
        let scn = on_path(0);
        let mut cfg = search_cfg(0);
        assert!(search_nskmp(&m.kmp, &scn, &cfg).is_err());
        cfg.budget = 10;
        cfg.xi_range = (1.0, 1.0);
        assert!(search_nskmp(&m.kmp, &scn, &cfg).is_err());
        cfg.xi_range = (-1.0, 1.0);
        cfg.refs = 0;
        assert!(search_kmp_via(&m.kmp, &scn, &cfg, 1e-6).is_err());
    }

    #[test]
    fn shell_points_lie_between_one_and_two_extents() {
        let s = Obstacle::sphere(Vector::from_vec(vec![1.0, -1.0]), 0.5).unwrap();
        for (rho, a) in [(1.0, 0.3), (1.5, 2.0), (2.0, 5.0)] {
            let p = shell_point(&s, rho, &direction(2, &[a]));
            assert!(((p - s.center()).norm() - rho * 0.5).abs() < 1e-12);
        }
        let c = Obstacle::cube(Vector::zeros(3), 3f64.sqrt()).unwrap();
        let p = shell_point(&c, 2.0, &direction(3, &[0.2, 1.0]));
        assert!((p.amax() - 1.0).abs() < 1e-12);
        assert!(!c.contains(&shell_point(&c, 1.01, &direction(3, &[-0.7, 4.0]))));
    }
}
