//! Dense weight-space reference computations with explicit features.
//!
//! These are independent of the kernelized code paths: they build the
//! feature matrix `Phi` (`BD x DN`) from an explicit feature map and invert
//! dense matrices with LU. Tests use them to check the kernel-trick forms.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{Matrix, Vector};

/// Normalized radial-basis features `phi(s)`, `|phi(s)| = 1`. As a kernel it
/// evaluates `phi(a)^T phi(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub centers: Vec<Vector>,
    pub width: f64,
    pub output_dim: usize,
}

impl FeatureMap {
    pub fn new(centers: Vec<Vector>, width: f64, output_dim: usize) -> Result<Self> {
        if centers.is_empty() || !(width > 0.0) || output_dim == 0 {
            return Err(Error::InvalidConfig(
                "feature map needs centers, width > 0 and D >= 1".into(),
            ));
        }
        Ok(Self {
            centers,
            width,
            output_dim,
        })
    }

    pub fn basis_count(&self) -> usize {
        self.centers.len()
    }

    pub fn phi(&self, s: &Vector) -> Vector {
        let raw = Vector::from_iterator(
            self.centers.len(),
            self.centers
                .iter()
                .map(|c| (-(s - c).norm_squared() / (self.width * self.width)).exp()),
        );
        let norm = raw.norm();
        raw / norm
    }

    /// `Phi(s)` = blockdiag(phi(s), ..., phi(s)), shape `BD x D`.
    pub fn block(&self, s: &Vector) -> Matrix {
        let b = self.basis_count();
        let d = self.output_dim;
        let phi = self.phi(s);
        let mut m = Matrix::zeros(b * d, d);
        for k in 0..d {
            m.view_mut((k * b, k), (b, 1)).copy_from(&phi);
        }
        m
    }

    /// `Phi = [Phi(s_1) ... Phi(s_N)]`, shape `BD x DN`.
    pub fn features(&self, inputs: &[Vector]) -> Matrix {
        let d = self.output_dim;
        let mut m = Matrix::zeros(self.basis_count() * d, inputs.len() * d);
        for (i, s) in inputs.iter().enumerate() {
            m.view_mut((0, i * d), (self.basis_count() * d, d))
                .copy_from(&self.block(s));
        }
        m
    }
}

impl Kernel for FeatureMap {
    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn eval(&self, a: &Vector, b: &Vector) -> f64 {
        self.phi(a).dot(&self.phi(b))
    }
}

fn inverse(m: Matrix, what: &str) -> Result<Matrix> {
    m.try_inverse()
        .ok_or_else(|| Error::Data(format!("{what} is singular")))
}

/// `Phi (Phi^T Phi + lambda Sigma)^-1`, the regularized right pseudo-inverse of `Phi^T`.
pub fn pseudo_inverse(features: &Matrix, sigma_block: &Matrix, lambda: f64) -> Result<Matrix> {
    let inner = features.transpose() * features + sigma_block * lambda;
    Ok(features * inverse(inner, "Phi^T Phi + lambda Sigma")?)
}

/// `N = I - Phi (Phi^T Phi + lambda Sigma)^-1 Phi^T`.
pub fn null_projector(features: &Matrix, sigma_block: &Matrix, lambda: f64) -> Result<Matrix> {
    let pinv = pseudo_inverse(features, sigma_block, lambda)?;
    let n = features.nrows();
    Ok(Matrix::identity(n, n) - pinv * features.transpose())
}

/// Optimal weights `Phi (Phi^T Phi + lambda Sigma)^-1 mu + N w_hat`, with the
/// secondary-cost weight equal to `lambda`.
pub fn project_weights_primal(
    features: &Matrix,
    sigma_block: &Matrix,
    lambda: f64,
    mu_stack: &Vector,
    w_hat: &Vector,
) -> Result<Vector> {
    let pinv = pseudo_inverse(features, sigma_block, lambda)?;
    let n = features.nrows();
    let proj = Matrix::identity(n, n) - &pinv * features.transpose();
    Ok(pinv * mu_stack + proj * w_hat)
}

/// Left side of the Woodbury step: `(Phi Sigma^-1 Phi^T + lambda I)^-1`.
pub fn woodbury_direct(features: &Matrix, sigma_block: &Matrix, lambda: f64) -> Result<Matrix> {
    let sigma_inv = inverse(sigma_block.clone(), "Sigma")?;
    let n = features.nrows();
    let m = features * sigma_inv * features.transpose() + Matrix::identity(n, n) * lambda;
    inverse(m, "Phi Sigma^-1 Phi^T + lambda I")
}

/// Right side of the Woodbury step: `(1 / lambda) N`.
pub fn woodbury_projector(features: &Matrix, sigma_block: &Matrix, lambda: f64) -> Result<Matrix> {
    Ok(null_projector(features, sigma_block, lambda)? / lambda)
}

/// Weight vector in the span of the target features: `Phi_hat (Phi_hat^T Phi_hat)^-1 xi_hat`.
pub fn weights_from_targets(target_features: &Matrix, xi_hat: &Vector) -> Result<Vector> {
    let gram = target_features.transpose() * target_features;
    Ok(target_features * (inverse(gram, "Phi_hat^T Phi_hat")? * xi_hat))
}

/// `Phi(s*)^T w`.
pub fn predict_primal(map: &FeatureMap, s_star: &Vector, weights: &Vector) -> Vector {
    map.block(s_star).transpose() * weights
}
