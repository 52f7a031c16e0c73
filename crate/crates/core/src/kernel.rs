//! Squared-exponential kernel and the block kernel matrices built from it.
//!
//! Every scalar kernel value `k(a, b)` is lifted to a `D x D` block
//! `k(a, b) * I_D`, so a set of `N` inputs yields a `DN x DN` Gram matrix.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Vector};

/// A scalar kernel lifted to blocks of size `output_dim`.
pub trait Kernel {
    fn output_dim(&self) -> usize;

    /// Scalar kernel value. Callers guarantee matching input dimensions.
    fn eval(&self, a: &Vector, b: &Vector) -> f64;
}

/// `k(a, b) = exp(-|a - b|^2 / l^2)`, unit amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub length_scale: f64,
    pub output_dim: usize,
}

impl KernelConfig {
    pub fn new(length_scale: f64, output_dim: usize) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "length scale must be positive, got {length_scale}"
            )));
        }
        if output_dim == 0 {
            return Err(Error::InvalidConfig("output dimension must be >= 1".into()));
        }
        Ok(Self {
            length_scale,
            output_dim,
        })
    }
}

impl Kernel for KernelConfig {
    fn output_dim(&self) -> usize {
        self.output_dim
    }

    #[inline]
    fn eval(&self, a: &Vector, b: &Vector) -> f64 {
        let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
        (-d2 / (self.length_scale * self.length_scale)).exp()
    }
}

pub fn kernel_eval(a: &Vector, b: &Vector, cfg: &KernelConfig) -> Result<f64> {
    check_dim("kernel_eval", a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::InvalidConfig("inputs must have dimension >= 1".into()));
    }
    Ok(cfg.eval(a, b))
}

fn check_inputs(inputs: &[Vector]) -> Result<usize> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::InvalidConfig("at least one input is required".into()))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidConfig("inputs must have dimension >= 1".into()));
    }
    for s in inputs {
        check_dim("kernel inputs", dim, s.len())?;
    }
    Ok(dim)
}

/// Scalar `N x N` kernel matrix.
pub fn scalar_gram<K: Kernel>(inputs: &[Vector], kernel: &K) -> Matrix {
    let n = inputs.len();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = kernel.eval(&inputs[i], &inputs[i]);
        for j in (i + 1)..n {
            let v = kernel.eval(&inputs[i], &inputs[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Expands a scalar matrix into blocks `a[(i, j)] * I_d`.
pub fn expand_blocks(scalar: &Matrix, d: usize) -> Matrix {
    let (r, c) = scalar.shape();
    let mut out = Matrix::zeros(r * d, c * d);
    for i in 0..r {
        for j in 0..c {
            let v = scalar[(i, j)];
            if v != 0.0 {
                for k in 0..d {
                    out[(i * d + k, j * d + k)] = v;
                }
            }
        }
    }
    out
}

/// Block Gram matrix `K` (`DN x DN`).
pub fn gram_matrix<K: Kernel>(inputs: &[Vector], kernel: &K) -> Result<Matrix> {
    check_inputs(inputs)?;
    Ok(expand_blocks(&scalar_gram(inputs, kernel), kernel.output_dim()))
}

/// Scalar kernel values `[k(s*, s_1), ..., k(s*, s_N)]`.
pub fn cross_scalars<K: Kernel>(s_star: &Vector, inputs: &[Vector], kernel: &K) -> Vec<f64> {
    inputs.iter().map(|s| kernel.eval(s_star, s)).collect()
}

/// Block cross-covariance `k*` (`D x DN`).
pub fn cross_vector<K: Kernel>(s_star: &Vector, inputs: &[Vector], kernel: &K) -> Result<Matrix> {
    let dim = check_inputs(inputs)?;
    check_dim("cross_vector query", dim, s_star.len())?;
    let row = Matrix::from_row_slice(1, inputs.len(), &cross_scalars(s_star, inputs, kernel));
    Ok(expand_blocks(&row, kernel.output_dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_eigenvalue, min_eigenvalue};
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn identical_inputs_give_one() {
        let cfg = KernelConfig::new(0.3, 2).unwrap();
        assert_eq!(kernel_eval(&v(&[0.4, -2.0]), &v(&[0.4, -2.0]), &cfg).unwrap(), 1.0);
    }

    #[test]
    fn one_length_scale_apart_gives_inverse_e() {
        let cfg = KernelConfig::new(0.125, 1).unwrap();
        let k = kernel_eval(&v(&[0.0]), &v(&[0.125]), &cfg).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
        assert!((k - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let cfg = KernelConfig::new(1.0, 1).unwrap();
        assert!(matches!(
            kernel_eval(&v(&[0.0]), &v(&[0.0, 1.0]), &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(cross_vector(&v(&[0.0, 1.0]), &[v(&[0.0])], &cfg).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(KernelConfig::new(0.0, 1).is_err());
        assert!(KernelConfig::new(-1.0, 1).is_err());
        assert!(KernelConfig::new(1.0, 0).is_err());
    }

    #[test]
    fn single_input_gram_is_identity() {
        let cfg = KernelConfig::new(0.5, 3).unwrap();
        let k = gram_matrix(&[v(&[1.0])], &cfg).unwrap();
        assert_eq!(k, Matrix::identity(3, 3));
    }

    #[test]
    fn two_point_gram() {
        let cfg = KernelConfig::new(0.125, 1).unwrap();
        let k = gram_matrix(&[v(&[0.0]), v(&[0.125])], &cfg).unwrap();
        let e = (-1.0f64).exp();
        let want = Matrix::from_row_slice(2, 2, &[1.0, e, e, 1.0]);
        assert!((k - want).abs().max() < 1e-15);
    }

    #[test]
    fn cross_vector_matches_gram_row() {
        let cfg = KernelConfig::new(0.2, 2).unwrap();
        let inputs = vec![v(&[0.0]), v(&[0.1]), v(&[0.35])];
        let k = gram_matrix(&inputs, &cfg).unwrap();
        let c = cross_vector(&inputs[0], &inputs, &cfg).unwrap();
        assert_eq!(c, k.rows(0, 2).into_owned());
        let single = cross_vector(&inputs[0], &inputs[..1], &cfg).unwrap();
        assert_eq!(single, Matrix::identity(2, 2));
    }

    #[test]
    fn far_query_decays() {
        let cfg = KernelConfig::new(0.125, 2).unwrap();
        let inputs = vec![v(&[0.0]), v(&[0.5]), v(&[1.0])];
        let c = cross_vector(&v(&[10.0]), &inputs, &cfg).unwrap();
        assert!(c.iter().all(|x| x.abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric_and_bounded(
            a in prop::collection::vec(-5.0f64..5.0, 3),
            b in prop::collection::vec(-5.0f64..5.0, 3),
            l in 0.05f64..3.0,
        ) {
            let cfg = KernelConfig::new(l, 1).unwrap();
            let (a, b) = (v(&a), v(&b));
            let kab = kernel_eval(&a, &b, &cfg).unwrap();
            let kba = kernel_eval(&b, &a, &cfg).unwrap();
            prop_assert_eq!(kab, kba);
            prop_assert!(kab > 0.0 || (&a - &b).norm() / l > 25.0);
            prop_assert!(kab <= 1.0);
        }

        #[test]
        fn gram_is_psd(
            pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 1..50),
            l in 0.05f64..2.0,
        ) {
            let cfg = KernelConfig::new(l, 2).unwrap();
            let inputs: Vec<Vector> = pts.iter().map(|p| v(p)).collect();
            let k = gram_matrix(&inputs, &cfg).unwrap();
            prop_assert!((&k - k.transpose()).abs().max() == 0.0);
            let lo = min_eigenvalue(&k);
            let hi = max_eigenvalue(&k);
            prop_assert!(lo >= -1e-8 * hi, "min eig {} vs max {}", lo, hi);
        }
    }
}
