//! Orchestration of the letter (1D input, 2D output) and handover (3D input,
//! 3D output) replanning experiments.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::inject::{inject_obstacle, InjectionConfig, ObstacleShape, Placement};
use super::obstacle::ObstacleRecord;
use super::sampler::SamplerKind;
use super::search::{
    search_gmm_baseline, search_kmp_via, search_nskmp_on_grid, search_promp_via, Adaptation, InputWindow, Scenario,
    SearchConfig, SearchOutcome,
};
use super::Trajectory;
use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::kmp::KmpModel;
use crate::linalg::{linspace, Vector};
use crate::nskmp::QueryGrid;
use crate::promp::{fit_promp, PrompModel, DEFAULT_RIDGE};
use crate::refdist::{build_reference, default_query_inputs, em_fit, Demonstration, EmOptions, GaussianMixture};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "kmp")]
    Kmp,
    #[serde(rename = "ns-kmp")]
    NsKmp,
    #[serde(rename = "promp")]
    Promp,
    #[serde(rename = "gmm")]
    Gmm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Kmp => "kmp",
            Method::NsKmp => "ns-kmp",
            Method::Promp => "promp",
            Method::Gmm => "gmm",
        }
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    OneVia,
    TwoVia,
    Handover,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::OneVia => "one_via",
            Case::TwoVia => "two_via",
            Case::Handover => "handover",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LetterExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    pub lambda: f64,
    pub length_scale: f64,
    pub components: usize,
    pub basis: usize,
    pub ref_points: usize,
    pub budget: usize,
    pub xi_range: f64,
    pub radius: f64,
    /// Width of the `s_hat` window ahead of the current time.
    pub window: f64,
    /// Plan steps over the input range (the plan has `steps + 1` points).
    pub steps: usize,
    pub lead_min: usize,
    pub lead_max: usize,
    pub via_covariance: f64,
    pub sampler: SamplerKind,
    pub methods: Vec<Method>,
    pub two_via: bool,
    pub two_via_methods: Vec<Method>,
    pub jobs: usize,
}

impl Default for LetterExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 40,
            seed: 0,
            lambda: 0.1,
            length_scale: 0.125,
            components: 8,
            basis: 20,
            ref_points: 100,
            budget: 2000,
            xi_range: 1000.0,
            radius: 0.5,
            window: 0.2,
            steps: 200,
            lead_min: 10,
            lead_max: 40,
            via_covariance: 1e-6,
            sampler: SamplerKind::Tpe,
            methods: vec![Method::Kmp, Method::NsKmp, Method::Promp],
            two_via: true,
            two_via_methods: vec![Method::NsKmp, Method::Promp],
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoverExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    pub lambda: f64,
    pub length_scale: f64,
    pub components: usize,
    pub ref_points: usize,
    pub budget: usize,
    pub xi_range: f64,
    /// Per-dimension bound on the GMM baseline's mean perturbation.
    pub mean_delta: f64,
    pub space_diagonal: f64,
    /// Plan steps along the mean input path (the plan has `steps + 1` points).
    pub steps: usize,
    pub lead_min: usize,
    pub lead_max: usize,
    pub sampler: SamplerKind,
    pub methods: Vec<Method>,
    pub jobs: usize,
}

impl Default for HandoverExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            seed: 0,
            lambda: 0.1,
            length_scale: 0.125,
            components: 8,
            ref_points: 100,
            budget: 2000,
            xi_range: 2000.0,
            mean_delta: 0.1,
            space_diagonal: 0.1,
            steps: 200,
            lead_min: 10,
            lead_max: 40,
            sampler: SamplerKind::Tpe,
            methods: vec![Method::NsKmp, Method::Gmm],
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub case: Case,
    pub method: Method,
    pub trial: usize,
    pub seed: u64,
    pub obstacle: ObstacleRecord,
    pub appear_step: usize,
    pub success: bool,
    pub evals: usize,
    pub best_cost: f64,
    pub fits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    pub adaptations: Vec<Adaptation>,
    pub trajectory_file: String,
}

/// Timing of one trial, kept apart from [`TrialRecord`] so the records are
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTiming {
    pub case: Case,
    pub method: Method,
    pub trial: usize,
    pub wall_time_ms: f64,
    pub per_eval_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        };
        Some(Self {
            n,
            mean,
            std: var.sqrt(),
            median,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub method: Method,
    pub stat: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub row: String,
    pub cells: Vec<SummaryCell>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: u32,
    pub config: serde_json::Value,
    pub records: Vec<TrialRecord>,
    pub timings: Vec<TrialTiming>,
    pub trajectories: Vec<Trajectory>,
    /// Plan step of each trajectory's first point.
    pub first_steps: Vec<usize>,
}

#[derive(Serialize)]
struct TrialsFile<'a> {
    schema: u32,
    experiment: u32,
    config: &'a serde_json::Value,
    success_rates: Vec<SuccessRate>,
    trials: &'a [TrialRecord],
}

#[derive(Serialize)]
struct SuccessRate {
    case: Case,
    method: Method,
    trials: usize,
    successes: usize,
}

#[derive(Serialize)]
struct TimingFile<'a> {
    schema: u32,
    experiment: u32,
    table: Vec<SummaryRow>,
    trials: &'a [TrialTiming],
}

impl ExperimentReport {
    fn records_for(&self, case: Case, method: Method) -> impl Iterator<Item = (&TrialRecord, &TrialTiming)> {
        self.records
            .iter()
            .zip(&self.timings)
            .filter(move |(r, _)| r.case == case && r.method == method)
    }

    pub fn cases(&self) -> Vec<Case> {
        let mut c: Vec<Case> = self.records.iter().map(|r| r.case).collect();
        c.sort();
        c.dedup();
        c
    }

    pub fn methods(&self, case: Case) -> Vec<Method> {
        let mut m: Vec<Method> = self
            .records
            .iter()
            .filter(|r| r.case == case)
            .map(|r| r.method)
            .collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn success_rate(&self, case: Case, method: Method) -> f64 {
        let (n, ok) = self
            .records_for(case, method)
            .fold((0usize, 0usize), |(n, ok), (r, _)| (n + 1, ok + r.success as usize));
        if n == 0 {
            0.0
        } else {
            ok as f64 / n as f64
        }
    }

    /// Wall-time statistics in milliseconds over all trials of a case and method.
    pub fn wall_time(&self, case: Case, method: Method) -> Option<Stat> {
        let xs: Vec<f64> = self.records_for(case, method).map(|(_, t)| t.wall_time_ms).collect();
        Stat::of(&xs)
    }

    pub fn per_eval(&self, case: Case, method: Method) -> Option<Stat> {
        let xs: Vec<f64> = self.records_for(case, method).map(|(_, t)| t.per_eval_ms).collect();
        Stat::of(&xs)
    }

    pub fn all_succeeded(&self) -> bool {
        self.records.iter().all(|r| r.success)
    }

    /// Table with a prediction-time row (ms per evaluation) and one search
    /// wall-time row (s) per case.
    pub fn table(&self) -> Vec<SummaryRow> {
        let cases = self.cases();
        let mut rows = Vec::new();
        if let Some(first) = cases.first() {
            rows.push(SummaryRow {
                row: "Prediction (ms)".into(),
                cells: self
                    .methods(*first)
                    .into_iter()
                    .filter_map(|m| self.per_eval(*first, m).map(|stat| SummaryCell { method: m, stat }))
                    .collect(),
            });
        }
        for case in cases {
            let label = match case {
                Case::OneVia => "1 via-point (s)",
                Case::TwoVia => "2 via-point (s)",
                Case::Handover => "Handover (s)",
            };
            rows.push(SummaryRow {
                row: label.into(),
                cells: self
                    .methods(case)
                    .into_iter()
                    .filter_map(|m| {
                        self.wall_time(case, m).map(|s| SummaryCell {
                            method: m,
                            stat: Stat {
                                n: s.n,
                                mean: s.mean / 1e3,
                                std: s.std / 1e3,
                                median: s.median / 1e3,
                            },
                        })
                    })
                    .collect(),
            });
        }
        rows
    }

    /// Files whose content depends only on seed, configuration and data:
    /// `trials.json` and one CSV per trajectory, as `(relative path, content)`.
    pub fn deterministic_files(&self) -> Result<Vec<(String, String)>> {
        let mut rates = Vec::new();
        for case in self.cases() {
            for method in self.methods(case) {
                let (trials, successes) = self
                    .records_for(case, method)
                    .fold((0, 0), |(n, ok), (r, _)| (n + 1, ok + r.success as usize));
                rates.push(SuccessRate {
                    case,
                    method,
                    trials,
                    successes,
                });
            }
        }
        let trials = TrialsFile {
            schema: REPORT_SCHEMA,
            experiment: self.experiment,
            config: &self.config,
            success_rates: rates,
            trials: &self.records,
        };
        let mut files = vec![("trials.json".to_string(), serde_json::to_string_pretty(&trials)? + "\n")];
        for ((r, t), first) in self.records.iter().zip(&self.trajectories).zip(&self.first_steps) {
            files.push((r.trajectory_file.clone(), t.to_csv(*first)));
        }
        Ok(files)
    }

    /// `timing.json`: per-trial times and the summary table.
    pub fn timing_file(&self) -> Result<(String, String)> {
        let f = TimingFile {
            schema: REPORT_SCHEMA,
            experiment: self.experiment,
            table: self.table(),
            trials: &self.timings,
        };
        Ok(("timing.json".to_string(), serde_json::to_string_pretty(&f)? + "\n"))
    }
}

/// Seed of one trial, derived from the experiment seed on its own stream.
pub fn trial_seed(seed: u64, case: Case, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((case as u64) << 32) | trial as u64);
    rng.next_u64()
}

struct Job {
    case: Case,
    trial: usize,
}

struct JobResult {
    records: Vec<(TrialRecord, TrialTiming, Trajectory, usize)>,
}

/// Runs `f` over the jobs on `jobs` worker threads; results keep job order.
fn run_jobs<F>(jobs: &[Job], workers: usize, f: F) -> Result<Vec<JobResult>>
where
    F: Fn(&Job) -> Result<JobResult> + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<JobResult>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let r = f(&jobs[i]);
                slots.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn finish(experiment: u32, mut config: serde_json::Value, results: Vec<JobResult>) -> ExperimentReport {
    // Worker count does not change results, so reports omit it.
    if let Some(obj) = config.as_object_mut() {
        obj.remove("jobs");
    }
    let mut report = ExperimentReport {
        experiment,
        config,
        records: Vec::new(),
        timings: Vec::new(),
        trajectories: Vec::new(),
        first_steps: Vec::new(),
    };
    for (r, t, traj, first) in results.into_iter().flat_map(|j| j.records) {
        report.records.push(r);
        report.timings.push(t);
        report.trajectories.push(traj);
        report.first_steps.push(first);
    }
    report
}

fn record(
    case: Case,
    method: Method,
    trial: usize,
    seed: u64,
    obstacle: &super::Obstacle,
    appear_step: usize,
    out: SearchOutcome,
) -> (TrialRecord, TrialTiming, Trajectory, usize) {
    let wall_time_ms = out.wall_time.as_secs_f64() * 1e3;
    let rec = TrialRecord {
        case,
        method,
        trial,
        seed,
        obstacle: obstacle.record(),
        appear_step,
        success: out.success,
        evals: out.evals,
        best_cost: out.best_cost,
        fits: out.fits,
        component: out.component,
        adaptations: out.adaptations,
        trajectory_file: format!("trajectories/{}_{}_{:03}.csv", case.name(), method.name(), trial),
    };
    let timing = TrialTiming {
        case,
        method,
        trial,
        wall_time_ms,
        per_eval_ms: wall_time_ms / out.evals as f64,
    };
    (rec, timing, out.trajectory, appear_step)
}

/// Models shared by every letter trial.
pub struct LetterModels {
    pub gmm: GaussianMixture,
    pub kmp: KmpModel,
    pub promp: PrompModel,
    /// Plan inputs `s_0 .. s_steps`.
    pub plan_inputs: Vec<Vector>,
    pub nominal: Trajectory,
    /// Kernel rows over the plan inputs, kept with the plan.
    pub grid: QueryGrid,
}

impl LetterModels {
    pub fn fit(demos: &[Demonstration], cfg: &LetterExperimentConfig) -> Result<Self> {
        let d = demos
            .first()
            .ok_or_else(|| Error::Data("no demonstrations".into()))?
            .output_dim();
        let gmm = em_fit(demos, cfg.components, cfg.seed, &EmOptions::default())?.mixture;
        let queries = default_query_inputs(demos, cfg.ref_points)?;
        let (lo, hi) = (queries[0][0], queries[queries.len() - 1][0]);
        let reference = build_reference(&gmm, &queries)?;
        let kmp = KmpModel::fit(reference, cfg.lambda, KernelConfig::new(cfg.length_scale, d)?)?;
        let promp = fit_promp(demos, cfg.basis, DEFAULT_RIDGE)?;
        let plan_inputs: Vec<Vector> = linspace(lo, hi, cfg.steps + 1)
            .into_iter()
            .map(|t| Vector::from_element(1, t))
            .collect();
        let points = plan_inputs.iter().map(|s| kmp.predict(s)).collect::<Result<_>>()?;
        let nominal = Trajectory::new(plan_inputs.clone(), points)?;
        let grid = QueryGrid::new(&kmp, plan_inputs.clone())?;
        Ok(Self {
            gmm,
            kmp,
            promp,
            plan_inputs,
            nominal,
            grid,
        })
    }

    /// Reference means paired with their nearest plan step.
    pub fn pool(&self) -> Vec<(usize, Vector)> {
        let r = self.kmp.reference();
        let (lo, hi) = (self.plan_inputs[0][0], self.plan_inputs[self.plan_inputs.len() - 1][0]);
        let steps = (self.plan_inputs.len() - 1) as f64;
        r.inputs
            .iter()
            .zip(&r.means)
            .map(|(s, m)| (((s[0] - lo) / (hi - lo) * steps).round() as usize, m.clone()))
            .collect()
    }
}

fn validate_common(trials: usize, budget: usize, xi: f64, methods: &[Method]) -> Result<()> {
    if trials == 0 || budget == 0 {
        return Err(Error::InvalidConfig("trials and budget must be >= 1".into()));
    }
    if !(xi > 0.0) {
        return Err(Error::InvalidConfig(format!("xi range must be positive, got {xi}")));
    }
    if methods.is_empty() {
        return Err(Error::InvalidConfig("at least one method is required".into()));
    }
    Ok(())
}

/// Letter replanning: 1-via-point trials with obstacles away from
/// self-intersections, and optionally 2-via-point trials at intersections.
pub fn run_letter_experiment(demos: &[Demonstration], cfg: &LetterExperimentConfig) -> Result<ExperimentReport> {
    validate_common(cfg.trials, cfg.budget, cfg.xi_range, &cfg.methods)?;
    if cfg.methods.contains(&Method::Gmm) || cfg.two_via_methods.contains(&Method::Gmm) {
        return Err(Error::InvalidConfig(
            "the GMM baseline belongs to the handover experiment".into(),
        ));
    }
    if cfg.steps < cfg.lead_min + 2 || cfg.lead_max < cfg.lead_min {
        return Err(Error::InvalidConfig(
            "plan too short for the obstacle lead window".into(),
        ));
    }
    let models = LetterModels::fit(demos, cfg)?;
    let pool = models.pool();
    let mut jobs = Vec::new();
    for trial in 0..cfg.trials {
        jobs.push(Job {
            case: Case::OneVia,
            trial,
        });
    }
    if cfg.two_via {
        for trial in 0..cfg.trials {
            jobs.push(Job {
                case: Case::TwoVia,
                trial,
            });
        }
    }
    let shape = ObstacleShape::Sphere { radius: cfg.radius };
    let results = run_jobs(&jobs, cfg.jobs, |job| {
        let seed = trial_seed(cfg.seed, job.case, job.trial);
        let (inj_cfg, window, refs, methods) = match job.case {
            Case::OneVia => (
                InjectionConfig {
                    shape,
                    appear_steps: (0, cfg.steps - cfg.lead_min - 1),
                    lead_min: cfg.lead_min,
                    lead_max: Some(cfg.lead_max),
                    placement: Placement::SinglePass,
                    goal_clearance: None,
                    max_attempts: 10_000,
                },
                InputWindow::Ahead { width: cfg.window },
                1,
                &cfg.methods,
            ),
            _ => (
                InjectionConfig {
                    shape,
                    appear_steps: (0, cfg.steps - cfg.lead_min - 1),
                    lead_min: cfg.lead_min,
                    lead_max: None,
                    placement: Placement::Crossing,
                    goal_clearance: None,
                    max_attempts: 10_000,
                },
                InputWindow::Horizon,
                2,
                &cfg.two_via_methods,
            ),
        };
        let inj = inject_obstacle(&models.nominal, &pool, &inj_cfg, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let scn = Scenario::new(
            models.plan_inputs[inj.appear_step..].to_vec(),
            inj.obstacle.clone(),
            None,
        )?;
        let grid = models.grid.tail(inj.appear_step)?;
        let mut records = Vec::new();
        for &method in methods {
            let search = SearchConfig {
                xi_range: (-cfg.xi_range, cfg.xi_range),
                input_window: window,
                budget: cfg.budget,
                seed,
                stream: method.stream(),
                sampler: cfg.sampler,
                refs,
            };
            let out = match method {
                Method::NsKmp => search_nskmp_on_grid(&models.kmp, &grid, &scn, &search)?,
                Method::Kmp => search_kmp_via(&models.kmp, &scn, &search, cfg.via_covariance)?,
                Method::Promp => search_promp_via(&models.promp, &scn, &search, cfg.via_covariance)?,
                Method::Gmm => unreachable!("rejected above"),
            };
            records.push(record(
                job.case,
                method,
                job.trial,
                seed,
                &inj.obstacle,
                inj.appear_step,
                out,
            ));
        }
        Ok(JobResult { records })
    })?;
    Ok(finish(1, serde_json::to_value(cfg)?, results))
}

/// Models shared by every handover trial.
pub struct HandoverModels {
    pub gmm: GaussianMixture,
    pub kmp: KmpModel,
    pub nominal: Trajectory,
    /// Kernel rows over the plan inputs, kept with the plan.
    pub grid: QueryGrid,
}

impl HandoverModels {
    pub fn fit(demos: &[Demonstration], cfg: &HandoverExperimentConfig) -> Result<Self> {
        let d = demos
            .first()
            .ok_or_else(|| Error::Data("no demonstrations".into()))?
            .output_dim();
        let gmm = em_fit(demos, cfg.components, cfg.seed, &EmOptions::default())?.mixture;
        let queries = default_query_inputs(demos, cfg.ref_points)?;
        let reference = build_reference(&gmm, &queries)?;
        let kmp = KmpModel::fit(reference, cfg.lambda, KernelConfig::new(cfg.length_scale, d)?)?;
        let plan = default_query_inputs(demos, cfg.steps + 1)?;
        let points = plan.iter().map(|s| kmp.predict(s)).collect::<Result<_>>()?;
        let grid = QueryGrid::new(&kmp, plan.clone())?;
        let nominal = Trajectory::new(plan, points)?;
        Ok(Self {
            gmm,
            kmp,
            nominal,
            grid,
        })
    }
}

/// Handover replanning with a cube obstacle: NS-KMP against optimizing the
/// mean of one mixture component.
pub fn run_handover_experiment(demos: &[Demonstration], cfg: &HandoverExperimentConfig) -> Result<ExperimentReport> {
    validate_common(cfg.trials, cfg.budget, cfg.xi_range, &cfg.methods)?;
    if cfg.methods.iter().any(|m| matches!(m, Method::Kmp | Method::Promp)) {
        return Err(Error::InvalidConfig(
            "the handover experiment compares ns-kmp and gmm only".into(),
        ));
    }
    if !(cfg.mean_delta > 0.0) {
        return Err(Error::InvalidConfig("mean perturbation bound must be positive".into()));
    }
    let models = HandoverModels::fit(demos, cfg)?;
    let n = models.nominal.len();
    if n < cfg.lead_min + 2 || cfg.lead_max < cfg.lead_min {
        return Err(Error::InvalidConfig(
            "plan too short for the obstacle lead window".into(),
        ));
    }
    let pool: Vec<(usize, Vector)> = models.nominal.points.iter().cloned().enumerate().collect();
    let jobs: Vec<Job> = (0..cfg.trials)
        .map(|trial| Job {
            case: Case::Handover,
            trial,
        })
        .collect();
    let inj_cfg = InjectionConfig {
        shape: ObstacleShape::AxisCube {
            space_diagonal: cfg.space_diagonal,
        },
        appear_steps: (0, n - cfg.lead_min - 2),
        lead_min: cfg.lead_min,
        lead_max: Some(cfg.lead_max),
        placement: Placement::Any,
        goal_clearance: Some(2.0),
        max_attempts: 10_000,
    };
    let results = run_jobs(&jobs, cfg.jobs, |job| {
        let seed = trial_seed(cfg.seed, job.case, job.trial);
        let inj = inject_obstacle(&models.nominal, &pool, &inj_cfg, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let scn = Scenario::new(
            models.nominal.inputs[inj.appear_step..].to_vec(),
            inj.obstacle.clone(),
            None,
        )?;
        let grid = models.grid.tail(inj.appear_step)?;
        let mut records = Vec::new();
        for &method in &cfg.methods {
            let mut search = SearchConfig {
                xi_range: (-cfg.xi_range, cfg.xi_range),
                input_window: InputWindow::Remaining,
                budget: cfg.budget,
                seed,
                stream: method.stream(),
                sampler: cfg.sampler,
                refs: 1,
            };
            let out = match method {
                Method::NsKmp => search_nskmp_on_grid(&models.kmp, &grid, &scn, &search)?,
                _ => {
                    search.xi_range = (-cfg.mean_delta, cfg.mean_delta);
                    search_gmm_baseline(&models.gmm, &scn, &search)?
                }
            };
            records.push(record(
                job.case,
                method,
                job.trial,
                seed,
                &inj.obstacle,
                inj.appear_step,
                out,
            ));
        }
        Ok(JobResult { records })
    })?;
    Ok(finish(2, serde_json::to_value(cfg)?, results))
}
