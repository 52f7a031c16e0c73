//! Finite-horizon replanning around a suddenly appearing obstacle.
//!
//! A nominal plan is predicted over a grid of inputs. When an obstacle
//! appears, a search proposes modifications (null-space references for
//! NS-KMP, via-points for KMP and ProMP, a mixture mean shift for GMM) until
//! the remaining plan is collision-free and continuous.

mod cost;
mod experiment;
mod inject;
mod obstacle;
mod sampler;
mod search;

pub use cost::{collision_cost, continuity_cost, cost, Trajectory, PENALTY};
pub use experiment::{
    run_handover_experiment, run_letter_experiment, trial_seed, Case, ExperimentReport, HandoverExperimentConfig,
    HandoverModels, LetterExperimentConfig, LetterModels, Method, Stat, SummaryCell, SummaryRow, TrialRecord,
    TrialTiming, REPORT_SCHEMA,
};
pub use inject::{inject_obstacle, passes, Injection, InjectionConfig, ObstacleShape, Placement};
pub use obstacle::{Obstacle, ObstacleRecord};
pub use sampler::{Sampler, SamplerKind, TpeConfig};
pub use search::{
    search_gmm_baseline, search_kmp_via, search_nskmp, search_nskmp_on_grid, search_promp_via, shell_point, Adaptation,
    InputWindow, Scenario, SearchConfig, SearchOutcome, ERROR_COST,
};
