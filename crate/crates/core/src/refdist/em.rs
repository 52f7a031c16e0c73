use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Demonstration, GaussianMixture};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{floor_covariance, log_gaussian, Factor, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Relative log-likelihood change below which EM stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub mixture: GaussianMixture,
    /// Log-likelihood after initialization and after every M-step.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of empty-component reinitializations.
    pub reinitialized: usize,
}

/// Fits a `components`-component mixture to the joint samples of `demos`.
pub fn em_fit(demos: &[Demonstration], components: usize, seed: u64, opts: &EmOptions) -> Result<EmFit> {
    let first = demos.first().ok_or_else(|| Error::Data("no demonstrations".into()))?;
    let input_dim = first.input_dim();
    let mut points = Vec::new();
    for d in demos {
        check_dim("demonstration input", input_dim, d.input_dim())?;
        check_dim("demonstration output", first.output_dim(), d.output_dim())?;
        points.extend(d.joint_points());
    }
    em_fit_points(&points, input_dim, components, seed, opts)
}

pub fn em_fit_points(
    points: &[Vector],
    input_dim: usize,
    components: usize,
    seed: u64,
    opts: &EmOptions,
) -> Result<EmFit> {
    if components == 0 {
        return Err(Error::InvalidConfig("component count must be >= 1".into()));
    }
    let dim = points.first().map_or(0, |p| p.len());
    if dim <= input_dim || input_dim == 0 {
        return Err(Error::Data("joint samples must contain inputs and outputs".into()));
    }
    let needed = components * (dim + 1);
    if points.len() < needed {
        return Err(Error::Data(format!(
            "{} samples are too few for {components} components in {dim} dimensions (need {needed})",
            points.len()
        )));
    }
    for p in points {
        check_dim("joint sample", dim, p.len())?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let global_cov = sample_covariance(points, &mean_of(points), None);
    let mut state = init_kmeans_pp(points, components, &global_cov, &mut rng);
    let n = points.len();
    let mut resp = vec![0.0; n * components];

    let mut ll = state.e_step(points, &mut resp);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut reinitialized = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        reinitialized += state.m_step(points, &resp, &global_cov, &mut rng);
        let next = state.e_step(points, &mut resp);
        history.push(next);
        let rel = (next - ll).abs() / ll.abs().max(1e-300);
        ll = next;
        if rel < opts.tol {
            converged = true;
            break;
        }
    }

    Ok(EmFit {
        mixture: GaussianMixture {
            input_dim,
            priors: state.priors,
            means: state.means,
            covariances: state.covariances,
        },
        log_likelihood: history,
        iterations,
        converged,
        reinitialized,
    })
}

struct EmState {
    priors: Vec<f64>,
    means: Vec<Vector>,
    covariances: Vec<Matrix>,
    factors: Vec<Factor>,
}

impl EmState {
    fn new(priors: Vec<f64>, means: Vec<Vector>, covariances: Vec<Matrix>) -> Self {
        let mut s = Self {
            priors,
            means,
            covariances: Vec::new(),
            factors: Vec::new(),
        };
        for c in covariances {
            s.push_cov(c);
        }
        s
    }

    fn push_cov(&mut self, c: Matrix) {
        let (c, f) = floor_covariance(c);
        self.covariances.push(c);
        self.factors.push(f);
    }

    /// Fills responsibilities (row-major, point by component) and returns the log-likelihood.
    fn e_step(&self, points: &[Vector], resp: &mut [f64]) -> f64 {
        let k = self.priors.len();
        let mut total = 0.0;
        for (i, x) in points.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            for (c, r) in row.iter_mut().enumerate() {
                *r = self.priors[c].ln() + log_gaussian(x, &self.means[c], &self.factors[c]);
            }
            total += normalize_log_row(row);
        }
        total
    }

    fn m_step(&mut self, points: &[Vector], resp: &[f64], global_cov: &Matrix, rng: &mut ChaCha8Rng) -> usize {
        let k = self.priors.len();
        let n = points.len();
        let mut reinit = 0;
        let mut priors = Vec::with_capacity(k);
        let mut means = Vec::with_capacity(k);
        let mut covs = Vec::with_capacity(k);
        for c in 0..k {
            let weights: Vec<f64> = (0..n).map(|i| resp[i * k + c]).collect();
            let nk: f64 = weights.iter().sum();
            if nk < 1e-8 * n as f64 {
                reinit += 1;
                let p = &points[rng.random_range(0..n)];
                priors.push(1.0 / n as f64);
                means.push(p.clone());
                covs.push(global_cov.clone());
                continue;
            }
            let mut mean = Vector::zeros(points[0].len());
            for (w, x) in weights.iter().zip(points) {
                mean.axpy(*w, x, 1.0);
            }
            mean /= nk;
            let cov = sample_covariance(points, &mean, Some(&weights));
            priors.push(nk / n as f64);
            means.push(mean);
            covs.push(cov);
        }
        let total: f64 = priors.iter().sum();
        for p in &mut priors {
            *p /= total;
        }
        *self = EmState::new(priors, means, covs);
        reinit
    }
}

/// Converts log-weights in place to probabilities; returns log-sum-exp.
fn normalize_log_row(row: &mut [f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
    let lse = max + sum.ln();
    for v in row.iter_mut() {
        *v = (*v - lse).exp();
    }
    lse
}

fn mean_of(points: &[Vector]) -> Vector {
    let mut m = Vector::zeros(points[0].len());
    for p in points {
        m += p;
    }
    m / points.len() as f64
}

/// Weighted (or plain) covariance around `mean`, normalized by the weight sum.
fn sample_covariance(points: &[Vector], mean: &Vector, weights: Option<&[f64]>) -> Matrix {
    let d = mean.len();
    let mut cov = Matrix::zeros(d, d);
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        if w == 0.0 {
            continue;
        }
        let diff = p - mean;
        cov.ger(w, &diff, &diff, 1.0);
        total += w;
    }
    cov / total.max(f64::MIN_POSITIVE)
}

fn init_kmeans_pp(points: &[Vector], k: usize, global_cov: &Matrix, rng: &mut ChaCha8Rng) -> EmState {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| (p - &centers[0]).norm_squared()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if u < *w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = points[idx].clone();
        for (dist, p) in d2.iter_mut().zip(points) {
            *dist = dist.min((p - &c).norm_squared());
        }
        centers.push(c);
    }

    let mut members: Vec<Vec<Vector>> = vec![Vec::new(); k];
    for p in points {
        let best = (0..k)
            .min_by(|&a, &b| {
                (p - &centers[a])
                    .norm_squared()
                    .total_cmp(&(p - &centers[b]).norm_squared())
            })
            .expect("k >= 1");
        members[best].push(p.clone());
    }
    let mut priors = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut covs = Vec::with_capacity(k);
    for (c, m) in centers.into_iter().zip(&members) {
        priors.push(m.len().max(1) as f64);
        if m.len() >= 2 {
            let mean = mean_of(m);
            covs.push(sample_covariance(m, &mean, None));
            means.push(mean);
        } else {
            covs.push(global_cov.clone());
            means.push(c);
        }
    }
    let total: f64 = priors.iter().sum();
    priors.iter_mut().for_each(|p| *p /= total);
    EmState::new(priors, means, covs)
}

/// Posterior component probabilities per point.
pub fn responsibilities(gmm: &GaussianMixture, points: &[Vector]) -> Vec<Vec<f64>> {
    let state = EmState::new(gmm.priors.clone(), gmm.means.clone(), gmm.covariances.clone());
    let k = gmm.components();
    let mut resp = vec![0.0; points.len() * k];
    state.e_step(points, &mut resp);
    resp.chunks(k).map(|c| c.to_vec()).collect()
}

pub fn log_likelihood(gmm: &GaussianMixture, points: &[Vector]) -> f64 {
    let state = EmState::new(gmm.priors.clone(), gmm.means.clone(), gmm.covariances.clone());
    let mut resp = vec![0.0; points.len() * gmm.components()];
    state.e_step(points, &mut resp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_samples(mean: &Vector, chol_l: &Matrix, n: usize, seed: u64) -> Vec<Vector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z = Vector::from_iterator(mean.len(), (0..mean.len()).map(|_| StandardNormal.sample(&mut rng)));
                mean + chol_l * z
            })
            .collect()
    }

    #[test]
    fn single_component_recovers_moments() {
        let mean = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let l = Matrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.5, 0.8, 0.0, -0.3, 0.2, 0.6]);
        let s = &l * l.transpose();
        let pts = gaussian_samples(&mean, &l, 1000, 7);
        let fit = em_fit_points(&pts, 1, 1, 0, &EmOptions::default()).unwrap();
        let m = &fit.mixture;
        for i in 0..3 {
            let stderr = (s[(i, i)] / 1000.0).sqrt();
            assert!((m.means[0][i] - mean[i]).abs() < 3.0 * stderr, "dim {i}");
        }
        let rel = (&m.covariances[0] - &s).norm() / s.norm();
        assert!(rel < 0.2, "relative covariance error {rel}");
    }

    #[test]
    fn separated_clusters_get_hard_assignments() {
        let l = Matrix::identity(2, 2) * 0.3;
        let mut pts = gaussian_samples(&Vector::from_vec(vec![0.0, 0.0]), &l, 200, 1);
        pts.extend(gaussian_samples(&Vector::from_vec(vec![20.0, 20.0]), &l, 200, 2));
        let fit = em_fit_points(&pts, 1, 2, 3, &EmOptions::default()).unwrap();
        let resp = responsibilities(&fit.mixture, &pts);
        for r in &resp {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(r.iter().copied().fold(0.0, f64::max) > 0.99);
        }
        // Brute-force check against direct density evaluation for one point.
        let x = &pts[0];
        let dens: Vec<f64> = (0..2)
            .map(|c| {
                let (_, f) = floor_covariance(fit.mixture.covariances[c].clone());
                fit.mixture.priors[c] * log_gaussian(x, &fit.mixture.means[c], &f).exp()
            })
            .collect();
        let z: f64 = dens.iter().sum();
        for c in 0..2 {
            assert!((dens[c] / z - resp[0][c]).abs() < 1e-9);
        }
    }

    #[test]
    fn log_likelihood_is_monotone() {
        let demos = crate::refdist::synth::letter_a(&Default::default(), 11).unwrap();
        let fit = em_fit(&demos, 8, 5, &EmOptions::default()).unwrap();
        assert_eq!(fit.reinitialized, 0);
        for w in fit.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - 1e-8 * w[0].abs(), "{} -> {}", w[0], w[1]);
        }
        fit.mixture.validate().unwrap();
    }

    #[test]
    fn deterministic_under_seed() {
        let demos = crate::refdist::synth::letter_a(&Default::default(), 1).unwrap();
        let a = em_fit(&demos, 4, 9, &EmOptions::default()).unwrap();
        let b = em_fit(&demos, 4, 9, &EmOptions::default()).unwrap();
        assert_eq!(a.mixture, b.mixture);
    }

    #[test]
    fn too_few_points_rejected() {
        let pts: Vec<Vector> = (0..5).map(|i| Vector::from_vec(vec![i as f64, 1.0])).collect();
        assert!(em_fit_points(&pts, 1, 2, 0, &EmOptions::default()).is_err());
    }

    #[test]
    fn collapsed_component_is_reinitialized() {
        // Many identical points plus a spread: a component seeded on the duplicate
        // stays valid because of the covariance floor.
        let mut pts: Vec<Vector> = (0..40).map(|_| Vector::from_vec(vec![0.0, 0.0])).collect();
        pts.extend((0..40).map(|i| Vector::from_vec(vec![i as f64, (i * 7 % 5) as f64])));
        let fit = em_fit_points(&pts, 1, 3, 2, &EmOptions::default()).unwrap();
        fit.mixture.validate().unwrap();
    }
}
