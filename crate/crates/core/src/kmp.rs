//! Classical kernelized movement primitive.
//!
//! The model stores a Cholesky factor of `K + lambda * Sigma` and the vector
//! `psi_mu = (K + lambda * Sigma)^-1 mu`; predictions are `k* psi_mu`. Via-point
//! adaptation appends a point to the reference and refits from scratch.

use std::cell::Cell;

use crate::error::{check_dim, Error, Result};
use crate::kernel::{cross_scalars, expand_blocks, scalar_gram, Kernel, KernelConfig};
use crate::linalg::{cholesky_jittered, is_spd, Factor, Matrix, Vector};
use crate::refdist::ReferenceTrajectoryDistribution;

thread_local! {
    static FITS: Cell<usize> = const { Cell::new(0) };
}

/// Number of `(K + lambda * Sigma)` factorizations performed on this thread.
pub fn fit_count() -> usize {
    FITS.with(|f| f.get())
}

/// A desired `(input, mean)` pair with covariance expressing its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ViaPoint {
    pub input: Vector,
    pub mean: Vector,
    pub covariance: Matrix,
}

impl ViaPoint {
    pub fn new(input: Vector, mean: Vector, covariance: Matrix) -> Result<Self> {
        check_dim("via-point covariance", mean.len(), covariance.nrows())?;
        check_dim("via-point covariance", mean.len(), covariance.ncols())?;
        if !is_spd(&covariance) {
            return Err(Error::InvalidConfig(
                "via-point covariance must be positive definite".into(),
            ));
        }
        Ok(Self {
            input,
            mean,
            covariance,
        })
    }
}

#[derive(Debug, Clone)]
pub struct KmpModel<K = KernelConfig> {
    kernel: K,
    lambda: f64,
    reference: ReferenceTrajectoryDistribution,
    mu_stack: Vector,
    factor: Factor,
    jitter: f64,
    psi_mu: Vector,
}

impl<K: Kernel + Clone> KmpModel<K> {
    pub fn fit(reference: ReferenceTrajectoryDistribution, lambda: f64, kernel: K) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
        }
        reference.validate()?;
        let d = kernel.output_dim();
        check_dim("reference output", d, reference.output_dim())?;

        let n = reference.len();
        let mut system = expand_blocks(&scalar_gram(&reference.inputs, &kernel), d);
        let mut mu_stack = Vector::zeros(n * d);
        for (i, (m, s)) in reference.means.iter().zip(&reference.covariances).enumerate() {
            mu_stack.rows_mut(i * d, d).copy_from(m);
            let mut block = system.view_mut((i * d, i * d), (d, d));
            block += s * lambda;
        }
        let (factor, jitter) = cholesky_jittered(system, "K + lambda * Sigma")?;
        FITS.with(|f| f.set(f.get() + 1));
        let psi_mu = factor.solve(&mu_stack);
        Ok(Self {
            kernel,
            lambda,
            reference,
            mu_stack,
            factor,
            jitter,
            psi_mu,
        })
    }

    pub fn predict(&self, s_star: &Vector) -> Result<Vector> {
        check_dim("predict input", self.input_dim(), s_star.len())?;
        Ok(self.predict_unchecked(s_star))
    }

    pub(crate) fn predict_unchecked(&self, s_star: &Vector) -> Vector {
        let k = cross_scalars(s_star, &self.reference.inputs, &self.kernel);
        self.apply_cross(&k, &self.psi_mu)
    }

    /// `k* v` for a `DN` vector `v`, given the scalar kernel row `k`.
    pub(crate) fn apply_cross(&self, k: &[f64], v: &Vector) -> Vector {
        let d = self.output_dim();
        let mut out = vec![0.0; d];
        for (kj, block) in k.iter().zip(v.as_slice().chunks_exact(d)) {
            for (o, b) in out.iter_mut().zip(block) {
                *o += kj * b;
            }
        }
        Vector::from_vec(out)
    }

    /// Refits over the reference extended with `vp`.
    pub fn adapt_via_point(&self, vp: &ViaPoint) -> Result<Self> {
        check_dim("via-point input", self.input_dim(), vp.input.len())?;
        check_dim("via-point mean", self.output_dim(), vp.mean.len())?;
        let mut reference = self.reference.clone();
        reference.push(vp.input.clone(), vp.mean.clone(), vp.covariance.clone());
        Self::fit(reference, self.lambda, self.kernel.clone())
    }

    /// Refits once over the reference extended with every point in `vps`.
    pub fn adapt_via_points(&self, vps: &[ViaPoint]) -> Result<Self> {
        let mut reference = self.reference.clone();
        for vp in vps {
            check_dim("via-point input", self.input_dim(), vp.input.len())?;
            check_dim("via-point mean", self.output_dim(), vp.mean.len())?;
            reference.push(vp.input.clone(), vp.mean.clone(), vp.covariance.clone());
        }
        Self::fit(reference, self.lambda, self.kernel.clone())
    }

    /// `(K + lambda * Sigma)^-1 b` by forward and back substitution on the cached factor.
    pub fn solve(&self, b: &Vector) -> Vector {
        self.factor.solve(b)
    }
}

impl<K> KmpModel<K> {
    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn reference(&self) -> &ReferenceTrajectoryDistribution {
        &self.reference
    }

    pub fn inputs(&self) -> &[Vector] {
        &self.reference.inputs
    }

    pub fn mu_stack(&self) -> &Vector {
        &self.mu_stack
    }

    pub fn psi_mu(&self) -> &Vector {
        &self.psi_mu
    }

    /// Diagonal jitter the factorization needed (0 when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.reference.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.reference.output_dim()
    }

    /// Block-diagonal `Sigma` as a dense matrix.
    pub fn sigma_block(&self) -> Matrix {
        let d = self.output_dim();
        let n = self.len();
        let mut m = Matrix::zeros(n * d, n * d);
        for (i, s) in self.reference.covariances.iter().enumerate() {
            m.view_mut((i * d, i * d), (d, d)).copy_from(s);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gram_matrix;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn line_reference(n: usize, d: usize, var: f64) -> ReferenceTrajectoryDistribution {
        let inputs: Vec<Vector> = (0..n).map(|i| v(&[i as f64 / (n.max(2) - 1) as f64])).collect();
        let means = inputs
            .iter()
            .map(|s| Vector::from_iterator(d, (0..d).map(|k| (3.0 * s[0] + k as f64).sin() * 2.0)))
            .collect();
        let covs = vec![Matrix::identity(d, d) * var; n];
        ReferenceTrajectoryDistribution::new(inputs, means, covs).unwrap()
    }

    #[test]
    fn scalar_closed_form() {
        let r = ReferenceTrajectoryDistribution::new(
            vec![v(&[0.3])],
            vec![v(&[2.0])],
            vec![Matrix::from_element(1, 1, 0.5)],
        )
        .unwrap();
        let m = KmpModel::fit(r, 0.1, KernelConfig::new(0.125, 1).unwrap()).unwrap();
        assert!((m.psi_mu()[0] - 2.0 / (1.0 + 0.1 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn tiny_covariance_interpolates() {
        let sigma = 1e-6;
        let lambda = 0.1;
        let r = ReferenceTrajectoryDistribution::new(
            vec![v(&[0.0])],
            vec![v(&[4.0])],
            vec![Matrix::from_element(1, 1, sigma)],
        )
        .unwrap();
        let m = KmpModel::fit(r, lambda, KernelConfig::new(0.125, 1).unwrap()).unwrap();
        let p = m.predict(&v(&[0.0])).unwrap();
        assert!(((p[0] - 4.0) / 4.0).abs() <= 2.0 * lambda * sigma);
    }

    #[test]
    fn far_query_returns_zero_mean() {
        let m = KmpModel::fit(line_reference(20, 2, 0.01), 0.1, KernelConfig::new(0.125, 2).unwrap()).unwrap();
        let p = m.predict(&v(&[30.0])).unwrap();
        assert!(p.norm() < 1e-10 * m.mu_stack().norm());
    }

    #[test]
    fn psi_mu_residual_is_small() {
        let n = 10;
        let d = 2;
        let mut r = line_reference(n, d, 0.1);
        // random SPD blocks
        for (i, c) in r.covariances.iter_mut().enumerate() {
            let a = Matrix::from_fn(d, d, |p, q| ((i * 7 + p * 3 + q) as f64).sin());
            *c = &a * a.transpose() + Matrix::identity(d, d) * 0.05;
        }
        let kern = KernelConfig::new(0.2, d).unwrap();
        let m = KmpModel::fit(r.clone(), 0.1, kern).unwrap();
        let mut sys = gram_matrix(&r.inputs, &kern).unwrap();
        sys += m.sigma_block() * 0.1;
        // Dense LU solve as an independent check.
        let dense = sys.clone().lu().solve(m.mu_stack()).unwrap();
        let res = (&sys * m.psi_mu() - m.mu_stack()).norm() / m.mu_stack().norm();
        assert!(res <= 1e-8, "residual {res}");
        assert!((dense - m.psi_mu()).norm() < 1e-8 * m.psi_mu().norm());
    }

    #[test]
    fn shrinking_covariance_pulls_towards_means() {
        let kern = KernelConfig::new(0.125, 2).unwrap();
        let loose = line_reference(25, 2, 0.5);
        let mut tight = loose.clone();
        tight.covariances.iter_mut().for_each(|c| *c *= 0.01);
        let a = KmpModel::fit(loose.clone(), 0.1, kern).unwrap();
        let b = KmpModel::fit(tight, 0.1, kern).unwrap();
        for (s, mu) in loose.inputs.iter().zip(&loose.means) {
            let ea = (a.predict(s).unwrap() - mu).norm();
            let eb = (b.predict(s).unwrap() - mu).norm();
            assert!(eb < ea, "{eb} !< {ea}");
        }
    }

    #[test]
    fn via_point_is_reached() {
        let kern = KernelConfig::new(0.125, 2).unwrap();
        let m = KmpModel::fit(line_reference(30, 2, 0.05), 0.1, kern).unwrap();
        let s = v(&[0.43]);
        let target = m.predict(&s).unwrap() + v(&[1.5, -1.0]);
        let mut errs = Vec::new();
        for var in [1e-2, 1e-4, 1e-6] {
            let vp = ViaPoint::new(s.clone(), target.clone(), Matrix::identity(2, 2) * var).unwrap();
            let adapted = m.adapt_via_point(&vp).unwrap();
            assert_eq!(adapted.len(), 31);
            errs.push((adapted.predict(&s).unwrap() - &target).norm());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        // 1e-2 of the trajectory scale (amplitude 2).
        assert!(errs[2] < 2e-2 * 2.0);
    }

    #[test]
    fn duplicated_point_only_reweights() {
        let kern = KernelConfig::new(0.125, 2).unwrap();
        let r = line_reference(30, 2, 0.05);
        let m = KmpModel::fit(r.clone(), 0.1, kern).unwrap();
        let vp = ViaPoint::new(r.inputs[12].clone(), r.means[12].clone(), r.covariances[12].clone()).unwrap();
        let a = m.adapt_via_point(&vp).unwrap();
        let grid: Vec<Vector> = (0..200).map(|i| v(&[i as f64 / 199.0])).collect();
        let scale = grid.iter().map(|s| m.predict(s).unwrap().amax()).fold(0.0, f64::max);
        let diff = grid
            .iter()
            .map(|s| (a.predict(s).unwrap() - m.predict(s).unwrap()).amax())
            .fold(0.0, f64::max);
        assert!(diff < 0.05 * scale, "sup diff {diff} vs scale {scale}");
    }

    #[test]
    fn fit_counter_counts() {
        let before = fit_count();
        let kern = KernelConfig::new(0.125, 1).unwrap();
        let m = KmpModel::fit(line_reference(5, 1, 0.1), 0.1, kern).unwrap();
        let vp = ViaPoint::new(v(&[0.5]), v(&[0.0]), Matrix::identity(1, 1) * 1e-6).unwrap();
        let _ = m.adapt_via_point(&vp).unwrap();
        assert_eq!(fit_count() - before, 2);
        let two = [
            vp.clone(),
            ViaPoint::new(v(&[0.9]), v(&[1.0]), Matrix::identity(1, 1) * 1e-6).unwrap(),
        ];
        let a = m.adapt_via_points(&two).unwrap();
        assert_eq!(fit_count() - before, 3);
        assert_eq!(a.len(), 7);
        assert!((a.predict(&v(&[0.9])).unwrap()[0] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_input() {
        let kern = KernelConfig::new(0.125, 2).unwrap();
        let r = line_reference(5, 2, 0.1);
        assert!(KmpModel::fit(r.clone(), 0.0, kern).is_err());
        assert!(KmpModel::fit(r.clone(), 0.1, KernelConfig::new(0.125, 3).unwrap()).is_err());
        let m = KmpModel::fit(r, 0.1, kern).unwrap();
        assert!(m.predict(&v(&[0.0, 1.0])).is_err());
        assert!(ViaPoint::new(v(&[0.0]), v(&[0.0, 0.0]), -Matrix::identity(2, 2)).is_err());
    }
}
