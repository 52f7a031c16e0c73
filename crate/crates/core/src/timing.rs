//! Per-query timing of classical via-point adaptation against null-space
//! modulation, over growing reference lengths.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::kmp::{KmpModel, ViaPoint};
use crate::linalg::{linspace, loglog_slope, Matrix, Vector};
use crate::nskmp::{Modulation, NullSpaceReference, QueryGrid};
use crate::planner::Stat;
use crate::refdist::ReferenceTrajectoryDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub output_dim: usize,
    pub lambda: f64,
    pub length_scale: f64,
    /// Points in the predicted trajectory.
    pub queries: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![50, 100, 200, 400, 800],
            reps: 5,
            output_dim: 2,
            lambda: 0.1,
            length_scale: 0.125,
            queries: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// Rebuild and refactorize with one extra via-point, then predict the trajectory.
    pub classical_ms: Stat,
    /// Build the null-space term for one reference and add it to the cached
    /// base trajectory. Kernel rows to the unchanged reference are computed
    /// once per model, like the factorization itself.
    pub ns_ms: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// Log-log slopes of median time against `n`; `None` with fewer than two sizes.
    pub classical_slope: Option<f64>,
    pub ns_slope: Option<f64>,
}

impl SweepReport {
    pub fn speedup_at(&self, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n)
            .map(|r| r.classical_ms.median / r.ns_ms.median)
    }
}

/// Smooth reference of `n` points over `[0, 1]` with isotropic covariances.
pub fn synthetic_reference(n: usize, d: usize) -> Result<ReferenceTrajectoryDistribution> {
    let inputs: Vec<Vector> = linspace(0.0, 1.0, n)
        .into_iter()
        .map(|t| Vector::from_element(1, t))
        .collect();
    let means = inputs
        .iter()
        .map(|s| Vector::from_iterator(d, (0..d).map(|k| (6.0 * s[0] + k as f64).sin() * 5.0)))
        .collect();
    let covs = inputs
        .iter()
        .map(|s| Matrix::identity(d, d) * (0.05 + 0.1 * (3.0 * s[0]).sin().powi(2)))
        .collect();
    ReferenceTrajectoryDistribution::new(inputs, means, covs)
}

/// Minimum duration of one timed batch.
const MIN_BATCH_MS: f64 = 2.0;

/// Per-call time in ms: `f` is repeated until a batch lasts at least
/// [`MIN_BATCH_MS`], and the batch time is divided by the repetitions.
fn time_ms(mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut calls = 1usize;
    loop {
        let t = Instant::now();
        for _ in 0..calls {
            f()?;
        }
        let ms = t.elapsed().as_secs_f64() * 1e3;
        if ms >= MIN_BATCH_MS || calls >= 1 << 20 {
            return Ok(ms / calls as f64);
        }
        calls = (calls * 2).max((calls as f64 * MIN_BATCH_MS / ms.max(1e-6) * 1.2) as usize);
    }
}

pub fn complexity_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.sizes.is_empty() || cfg.reps == 0 || cfg.queries < 2 || cfg.sizes.iter().any(|&n| n < 2) {
        return Err(Error::InvalidConfig(
            "sweep needs sizes >= 2, queries >= 2 and reps >= 1".into(),
        ));
    }
    let d = cfg.output_dim;
    let kernel = KernelConfig::new(cfg.length_scale, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let queries: Vec<Vector> = linspace(0.0, 1.0, cfg.queries)
        .into_iter()
        .map(|t| Vector::from_element(1, t))
        .collect();
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let model = KmpModel::fit(synthetic_reference(n, d)?, cfg.lambda, kernel)?;
        let grid = QueryGrid::new(&model, queries.clone())?;
        let mut classical = Vec::with_capacity(cfg.reps);
        let mut ns = Vec::with_capacity(cfg.reps);
        for _ in 0..cfg.reps {
            let s_hat = Vector::from_element(1, rng.random_range(0.0..1.0));
            let target = Vector::from_iterator(d, (0..d).map(|_| rng.random_range(-1000.0..1000.0)));
            let via = ViaPoint::new(s_hat.clone(), target.clone() * 1e-3, Matrix::identity(d, d) * 1e-6)?;
            classical.push(time_ms(|| {
                let adapted = model.adapt_via_point(&via)?;
                for s in &queries {
                    std::hint::black_box(adapted.predict(s)?);
                }
                Ok(())
            })?);
            let r = [NullSpaceReference::new(s_hat, target)];
            ns.push(time_ms(|| {
                let m = Modulation::new(&model, &r)?;
                std::hint::black_box(grid.modulated(&model, &m));
                Ok(())
            })?);
        }
        rows.push(SweepRow {
            n,
            classical_ms: Stat::of(&classical).expect("reps >= 1"),
            ns_ms: Stat::of(&ns).expect("reps >= 1"),
        });
    }
    let slope = |f: &dyn Fn(&SweepRow) -> f64| {
        (rows.len() >= 2).then(|| {
            let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
            let ys: Vec<f64> = rows.iter().map(f).collect();
            loglog_slope(&xs, &ys)
        })
    };
    let classical_slope = slope(&|r| r.classical_ms.median);
    let ns_slope = slope(&|r| r.ns_ms.median);
    Ok(SweepReport {
        config: cfg.clone(),
        rows,
        classical_slope,
        ns_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_size_gives_one_row_and_no_slope() {
        let cfg = SweepConfig {
            sizes: vec![20],
            reps: 1,
            ..SweepConfig::default()
        };
        let r = complexity_sweep(&cfg).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.ns_slope.is_none());
        assert!(r.speedup_at(20).unwrap() > 0.0);
    }

    #[test]
    fn rejects_empty_sweep() {
        let cfg = SweepConfig {
            sizes: vec![],
            ..SweepConfig::default()
        };
        assert!(complexity_sweep(&cfg).is_err());
    }
}
