//! Probabilistic movement primitives for scalar (time) inputs.
//!
//! Trajectories are `xi(t) = Phi(t)^T w` with `B` normalized Gaussian basis
//! functions per output dimension and `w ~ N(mu_w, Sigma_w)` estimated from
//! per-demonstration ridge fits. Via-points are imposed by Gaussian
//! conditioning.

use nalgebra::Cholesky;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{floor_covariance, linspace, symmetrize, Matrix, Vector};
use crate::refdist::Demonstration;

pub const DEFAULT_RIDGE: f64 = 1e-6;
pub const WEIGHT_COVARIANCE_FLOOR: f64 = 1e-8;
/// Basis bandwidth as a fraction of the center spacing.
pub const BANDWIDTH_FACTOR: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct PrompModel {
    pub centers: Vec<f64>,
    pub bandwidth: f64,
    pub mu_w: Vector,
    pub sigma_w: Matrix,
    pub output_dim: usize,
}

pub fn basis_centers(count: usize) -> (Vec<f64>, f64) {
    let centers = linspace(0.0, 1.0, count);
    let spacing = 1.0 / (count - 1) as f64;
    (centers, spacing * BANDWIDTH_FACTOR)
}

pub fn fit_promp(demos: &[Demonstration], basis_count: usize, ridge: f64) -> Result<PrompModel> {
    if basis_count < 2 {
        return Err(Error::InvalidConfig("ProMP needs at least 2 basis functions".into()));
    }
    if demos.len() < 2 {
        return Err(Error::Data(
            "ProMP needs at least 2 demonstrations to estimate a covariance".into(),
        ));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidConfig("ridge must be non-negative".into()));
    }
    let d = demos[0].output_dim();
    let (centers, bandwidth) = basis_centers(basis_count);
    let mut model = PrompModel {
        centers,
        bandwidth,
        mu_w: Vector::zeros(basis_count * d),
        sigma_w: Matrix::zeros(basis_count * d, basis_count * d),
        output_dim: d,
    };

    let mut samples = Vec::with_capacity(demos.len());
    for demo in demos {
        check_dim("ProMP demonstration input", 1, demo.input_dim())?;
        check_dim("ProMP demonstration output", d, demo.output_dim())?;
        if demo.len() < basis_count {
            return Err(Error::Data(format!(
                "demonstration has {} samples, fewer than {basis_count} basis functions",
                demo.len()
            )));
        }
        let rows: Vec<_> = demo.inputs.iter().map(|s| model.basis(s[0]).transpose()).collect();
        let design = Matrix::from_rows(&rows);
        let gram = design.transpose() * &design + Matrix::identity(basis_count, basis_count) * ridge;
        let factor = Cholesky::new(gram).ok_or(Error::Factorization {
            what: "ProMP ridge system",
            size: basis_count,
            mean_diag: 0.0,
            jitter: ridge,
        })?;
        let mut w = Vector::zeros(basis_count * d);
        for k in 0..d {
            let target = Vector::from_iterator(demo.len(), demo.outputs.iter().map(|x| x[k]));
            let wk = factor.solve(&(design.transpose() * target));
            w.rows_mut(k * basis_count, basis_count).copy_from(&wk);
        }
        samples.push(w);
    }

    let n = samples.len() as f64;
    let mean = samples.iter().fold(Vector::zeros(basis_count * d), |acc, w| acc + w) / n;
    let mut cov = Matrix::zeros(basis_count * d, basis_count * d);
    for w in &samples {
        let diff = w - &mean;
        cov.ger(1.0 / n, &diff, &diff, 1.0);
    }
    for i in 0..cov.nrows() {
        cov[(i, i)] += WEIGHT_COVARIANCE_FLOOR;
    }
    model.mu_w = mean;
    model.sigma_w = symmetrize(cov);
    Ok(model)
}

impl PrompModel {
    pub fn basis_count(&self) -> usize {
        self.centers.len()
    }

    /// Normalized basis activations at `t`; they sum to one.
    pub fn basis(&self, t: f64) -> Vector {
        let h2 = 2.0 * self.bandwidth * self.bandwidth;
        let raw = Vector::from_iterator(
            self.centers.len(),
            self.centers.iter().map(|c| (-(t - c) * (t - c) / h2).exp()),
        );
        let z = raw.sum();
        raw / z
    }

    /// `Phi(t)`, shape `BD x D`.
    pub fn block(&self, t: f64) -> Matrix {
        let b = self.basis_count();
        let phi = self.basis(t);
        let mut m = Matrix::zeros(b * self.output_dim, self.output_dim);
        for k in 0..self.output_dim {
            m.view_mut((k * b, k), (b, 1)).copy_from(&phi);
        }
        m
    }

    pub fn mean(&self, t: f64) -> Vector {
        let b = self.basis_count();
        let phi = self.basis(t);
        Vector::from_iterator(
            self.output_dim,
            (0..self.output_dim).map(|k| phi.dot(&self.mu_w.rows(k * b, b))),
        )
    }

    pub fn predict(&self, t: f64) -> (Vector, Matrix) {
        let block = self.block(t);
        let cov = block.transpose() * &self.sigma_w * &block;
        (self.mean(t), symmetrize(cov))
    }

    /// Conditions the weight distribution on observing `xi_bar` at `t_bar`
    /// with noise covariance `sigma_bar`.
    pub fn condition(&self, t_bar: f64, xi_bar: &Vector, sigma_bar: &Matrix) -> Result<Self> {
        check_dim("ProMP via-point", self.output_dim, xi_bar.len())?;
        check_dim("ProMP via-point covariance", self.output_dim, sigma_bar.nrows())?;
        if !(0.0..=1.0).contains(&t_bar) {
            return Err(Error::InvalidConfig(format!("ProMP input {t_bar} outside [0, 1]")));
        }
        let block = self.block(t_bar);
        let sphi = &self.sigma_w * &block;
        let innovation = block.transpose() * &sphi + sigma_bar;
        let factor = match Cholesky::new(innovation.clone()) {
            Some(f) => f,
            None => floor_covariance(innovation).1,
        };
        // gain = sphi * innovation^-1
        let gain = factor.solve(&sphi.transpose()).transpose();
        let mu_w = &self.mu_w + &gain * (xi_bar - block.transpose() * &self.mu_w);
        let n = self.sigma_w.nrows();
        let a = Matrix::identity(n, n) - &gain * block.transpose();
        let sigma_w = symmetrize(&a * &self.sigma_w * a.transpose() + &gain * sigma_bar * gain.transpose());
        Ok(Self {
            mu_w,
            sigma_w,
            ..self.clone()
        })
    }

    /// Weight mean after conditioning on all `vias` jointly. Equals the mean
    /// reached by conditioning on them one at a time, without updating
    /// `sigma_w`.
    pub fn conditioned_mean(&self, vias: &[(f64, Vector)], sigma_bar: &Matrix) -> Result<Vector> {
        let d = self.output_dim;
        check_dim("ProMP via-point covariance", d, sigma_bar.nrows())?;
        if vias.is_empty() {
            return Ok(self.mu_w.clone());
        }
        let p = vias.len();
        let mut phi = Matrix::zeros(self.mu_w.len(), p * d);
        let mut target = Vector::zeros(p * d);
        for (j, (t, xi)) in vias.iter().enumerate() {
            check_dim("ProMP via-point", d, xi.len())?;
            if !(0.0..=1.0).contains(t) {
                return Err(Error::InvalidConfig(format!("ProMP input {t} outside [0, 1]")));
            }
            phi.view_mut((0, j * d), (self.mu_w.len(), d))
                .copy_from(&self.block(*t));
            target.rows_mut(j * d, d).copy_from(xi);
        }
        let sphi = &self.sigma_w * &phi;
        let mut innovation = phi.transpose() * &sphi;
        for j in 0..p {
            let mut blk = innovation.view_mut((j * d, j * d), (d, d));
            blk += sigma_bar;
        }
        let factor = match Cholesky::new(innovation.clone()) {
            Some(f) => f,
            None => floor_covariance(innovation).1,
        };
        let residual = target - phi.transpose() * &self.mu_w;
        Ok(&self.mu_w + sphi * factor.solve(&residual))
    }
}
