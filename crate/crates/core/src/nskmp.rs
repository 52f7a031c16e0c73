//! Null-space modulation of a fitted KMP.
//!
//! For secondary targets `xi_hat_p` at inputs `s_hat_p` the expectation is
//!
//! ```text
//! E[xi(s*)] = k* Psi mu + [k_hat* - k* Psi K_hat] K_low^-1 xi_hat
//! ```
//!
//! with `Psi = (K + lambda Sigma)^-1` taken from the model's cached factor.
//! The bracket is evaluated as `k_hat* v - k* (Psi (K_hat v))` where
//! `v = K_low^-1 xi_hat`, so one pair of triangular solves serves every query
//! input for a given set of targets. Nothing is refactorized.

use crate::error::{check_dim, Error, Result};
use crate::kernel::{cross_scalars, expand_blocks, scalar_gram, Kernel};
use crate::kmp::{KmpModel, ViaPoint};
use crate::linalg::{Matrix, Vector};
use nalgebra::Cholesky;

/// Covariance used for the via-point equivalent to a null-space target.
pub const DEFAULT_EQUIVALENT_VIA_COVARIANCE: f64 = 1e-6;
/// Ridge added to `K_low` when targets share an input.
pub const DUPLICATE_TARGET_RIDGE: f64 = 1e-8;

/// A secondary target `xi_hat` applied at input `s_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceReference {
    pub input: Vector,
    pub target: Vector,
}

impl NullSpaceReference {
    pub fn new(input: Vector, target: Vector) -> Self {
        Self { input, target }
    }
}

/// Precomputed null-space term for a fixed set of targets.
#[derive(Debug, Clone)]
pub struct Modulation {
    inputs: Vec<Vector>,
    /// `K_low^-1 xi_hat`, length `DP`.
    weights: Vector,
    /// `Psi K_hat weights`, length `DN`.
    correction: Vector,
    ridged: bool,
}

impl Modulation {
    pub fn new<K: Kernel + Clone>(model: &KmpModel<K>, refs: &[NullSpaceReference]) -> Result<Self> {
        let d = model.output_dim();
        let p = refs.len();
        for r in refs {
            check_dim("null-space reference input", model.input_dim(), r.input.len())?;
            check_dim("null-space reference target", d, r.target.len())?;
        }
        let inputs: Vec<Vector> = refs.iter().map(|r| r.input.clone()).collect();
        let mut xi_hat = Vector::zeros(d * p);
        for (i, r) in refs.iter().enumerate() {
            xi_hat.rows_mut(i * d, d).copy_from(&r.target);
        }

        let mut ridged = false;
        let weights = if p == 0 {
            Vector::zeros(0)
        } else {
            let low = expand_blocks(&scalar_gram(&inputs, model.kernel()), d);
            let factor = match Cholesky::new(low.clone()) {
                Some(f) => f,
                None => {
                    ridged = true;
                    let ridge = Matrix::identity(d * p, d * p) * DUPLICATE_TARGET_RIDGE;
                    Cholesky::new(low + ridge).ok_or(Error::Factorization {
                        what: "null-space target Gram matrix",
                        size: d * p,
                        mean_diag: 1.0,
                        jitter: DUPLICATE_TARGET_RIDGE,
                    })?
                }
            };
            factor.solve(&xi_hat)
        };

        // K_hat weights: block n is sum_p k(s_n, s_hat_p) weights_p.
        let n = model.len();
        let mut k_hat_w = vec![0.0; n * d];
        for (s_hat, wj) in inputs.iter().zip(weights.as_slice().chunks_exact(d)) {
            let col = cross_scalars(s_hat, model.inputs(), model.kernel());
            for (k, block) in col.iter().zip(k_hat_w.chunks_exact_mut(d)) {
                for (b, w) in block.iter_mut().zip(wj) {
                    *b += k * w;
                }
            }
        }
        let k_hat_w = Vector::from_vec(k_hat_w);
        let correction = model.solve(&k_hat_w);
        Ok(Self {
            inputs,
            weights,
            correction,
            ridged,
        })
    }

    /// True when duplicate target inputs forced a ridge on `K_low`.
    pub fn ridged(&self) -> bool {
        self.ridged
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Null-space term at `s_star`, given the scalar row `k(s_star, s_n)`.
    pub fn term_with_row<K: Kernel + Clone>(&self, model: &KmpModel<K>, s_star: &Vector, row: &[f64]) -> Vector {
        let d = model.output_dim();
        let mut out = Vector::zeros(d);
        for (p, s_hat) in self.inputs.iter().enumerate() {
            out.axpy(model.kernel().eval(s_star, s_hat), &self.weights.rows(p * d, d), 1.0);
        }
        out - model.apply_cross(row, &self.correction)
    }

    pub fn term<K: Kernel + Clone>(&self, model: &KmpModel<K>, s_star: &Vector) -> Vector {
        let row = cross_scalars(s_star, model.inputs(), model.kernel());
        self.term_with_row(model, s_star, &row)
    }

    pub fn predict<K: Kernel + Clone>(&self, model: &KmpModel<K>, s_star: &Vector) -> Result<Vector> {
        check_dim("ns_predict input", model.input_dim(), s_star.len())?;
        let row = cross_scalars(s_star, model.inputs(), model.kernel());
        let base = model.apply_cross(&row, model.psi_mu());
        if self.is_empty() {
            return Ok(base);
        }
        Ok(base + self.term_with_row(model, s_star, &row))
    }
}

pub fn ns_predict<K: Kernel + Clone>(
    model: &KmpModel<K>,
    s_star: &Vector,
    refs: &[NullSpaceReference],
) -> Result<Vector> {
    if refs.is_empty() {
        return model.predict(s_star);
    }
    Modulation::new(model, refs)?.predict(model, s_star)
}

/// Via-point that reproduces the modulation of a single target when added to
/// the reference with a small covariance.
pub fn equivalent_via_point<K: Kernel + Clone>(
    model: &KmpModel<K>,
    reference: &NullSpaceReference,
    covariance: f64,
) -> Result<ViaPoint> {
    let mean = ns_predict(model, &reference.input, std::slice::from_ref(reference))?;
    let d = model.output_dim();
    ViaPoint::new(reference.input.clone(), mean, Matrix::identity(d, d) * covariance)
}

/// Scalar kernel rows and base predictions over a fixed grid of query inputs,
/// so repeated modulations only pay for the null-space term.
#[derive(Debug, Clone)]
pub struct QueryGrid {
    inputs: Vec<Vector>,
    /// `M x N` scalar kernel values between grid and reference inputs.
    rows: Matrix,
    base: Vec<Vector>,
}

impl QueryGrid {
    pub fn new<K: Kernel + Clone>(model: &KmpModel<K>, inputs: Vec<Vector>) -> Result<Self> {
        for s in &inputs {
            check_dim("query grid input", model.input_dim(), s.len())?;
        }
        let n = model.len();
        let mut rows = Matrix::zeros(inputs.len(), n);
        let mut base = Vec::with_capacity(inputs.len());
        for (i, s) in inputs.iter().enumerate() {
            let r = cross_scalars(s, model.inputs(), model.kernel());
            base.push(model.apply_cross(&r, model.psi_mu()));
            rows.row_mut(i).copy_from_slice(&r);
        }
        Ok(Self { inputs, rows, base })
    }

    pub fn inputs(&self) -> &[Vector] {
        &self.inputs
    }

    pub fn base(&self) -> &[Vector] {
        &self.base
    }

    /// The grid restricted to the query inputs from index `start` on.
    pub fn tail(&self, start: usize) -> Result<Self> {
        let m = self.inputs.len();
        if start >= m {
            return Err(Error::InvalidConfig(format!(
                "grid tail start {start} out of range for {m} inputs"
            )));
        }
        Ok(Self {
            inputs: self.inputs[start..].to_vec(),
            rows: self.rows.rows(start, m - start).into_owned(),
            base: self.base[start..].to_vec(),
        })
    }

    pub fn modulated<K: Kernel + Clone>(&self, model: &KmpModel<K>, m: &Modulation) -> Vec<Vector> {
        if m.is_empty() {
            return self.base.clone();
        }
        let d = model.output_dim();
        // Column-wise axpy: `rows` is column-major, so each update is contiguous.
        let rows = self.rows.nrows();
        let mut shift = vec![0.0; rows * d];
        for (col, c) in self
            .rows
            .as_slice()
            .chunks_exact(rows)
            .zip(m.correction.as_slice().chunks_exact(d))
        {
            for (q, &cq) in c.iter().enumerate() {
                for (o, k) in shift[q * rows..(q + 1) * rows].iter_mut().zip(col) {
                    *o += k * cq;
                }
            }
        }
        let mut ks = vec![0.0; m.inputs.len()];
        self.inputs
            .iter()
            .zip(&self.base)
            .enumerate()
            .map(|(i, (s, b))| {
                for (k, s_hat) in ks.iter_mut().zip(&m.inputs) {
                    *k = model.kernel().eval(s, s_hat);
                }
                Vector::from_fn(d, |q, _| {
                    let lift: f64 = ks.iter().enumerate().map(|(p, k)| k * m.weights[p * d + q]).sum();
                    b[q] - shift[q * rows + i] + lift
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelConfig;
    use crate::refdist::ReferenceTrajectoryDistribution;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn model(n: usize, var: [f64; 2]) -> KmpModel {
        let inputs: Vec<Vector> = (0..n).map(|i| v(&[i as f64 / (n - 1) as f64])).collect();
        let means = inputs
            .iter()
            .map(|s| v(&[(4.0 * s[0]).sin() * 3.0, (3.0 * s[0]).cos() * 2.0]))
            .collect();
        let cov = Matrix::from_diagonal(&v(&var));
        let r = ReferenceTrajectoryDistribution::new(inputs, means, vec![cov; n]).unwrap();
        KmpModel::fit(r, 0.1, KernelConfig::new(0.125, 2).unwrap()).unwrap()
    }

    #[test]
    fn empty_refs_reduce_to_predict() {
        let m = model(40, [0.1, 0.1]);
        for i in 0..30 {
            let s = v(&[i as f64 / 29.0]);
            assert_eq!(ns_predict(&m, &s, &[]).unwrap(), m.predict(&s).unwrap());
        }
    }

    #[test]
    fn zero_target_reduces_to_predict() {
        let m = model(40, [0.1, 0.1]);
        let r = [NullSpaceReference::new(v(&[0.4]), v(&[0.0, 0.0]))];
        for i in 0..30 {
            let s = v(&[i as f64 / 29.0]);
            assert_eq!(ns_predict(&m, &s, &r).unwrap(), m.predict(&s).unwrap());
        }
    }

    #[test]
    fn single_target_gram_is_identity() {
        let m = model(10, [0.1, 0.1]);
        let s = vec![v(&[0.3])];
        let low = expand_blocks(&scalar_gram(&s, m.kernel()), 2);
        assert_eq!(low, Matrix::identity(2, 2));
    }

    #[test]
    fn duplicate_targets_are_ridged() {
        let m = model(30, [0.1, 0.1]);
        let refs = [
            NullSpaceReference::new(v(&[0.5]), v(&[100.0, 0.0])),
            NullSpaceReference::new(v(&[0.5]), v(&[100.0, 0.0])),
        ];
        let md = Modulation::new(&m, &refs).unwrap();
        assert!(md.ridged());
        assert!(md.predict(&m, &v(&[0.5])).unwrap().iter().all(|x| x.is_finite()));
        let single = Modulation::new(&m, &refs[..1]).unwrap();
        assert!(!single.ridged());
    }

    #[test]
    fn query_grid_matches_pointwise() {
        let m = model(30, [0.2, 0.05]);
        let refs = [
            NullSpaceReference::new(v(&[0.2]), v(&[300.0, -50.0])),
            NullSpaceReference::new(v(&[0.7]), v(&[-80.0, 400.0])),
        ];
        let md = Modulation::new(&m, &refs).unwrap();
        let grid: Vec<Vector> = (0..25).map(|i| v(&[i as f64 / 24.0])).collect();
        let g = QueryGrid::new(&m, grid.clone()).unwrap();
        let traj = g.modulated(&m, &md);
        for (s, x) in grid.iter().zip(&traj) {
            let direct = ns_predict(&m, s, &refs).unwrap();
            assert!((direct - x).amax() < 1e-12);
        }
    }

    #[test]
    fn larger_variance_deforms_more() {
        let m = model(50, [1.0, 0.01]);
        let s_hat = v(&[0.5]);
        let r = [NullSpaceReference::new(s_hat.clone(), v(&[500.0, 500.0]))];
        let delta = ns_predict(&m, &s_hat, &r).unwrap() - m.predict(&s_hat).unwrap();
        assert!(delta[0].abs() > delta[1].abs(), "{delta}");
    }

    #[test]
    fn soft_idempotence_trend() {
        let far = v(&[0.05]);
        let r = [NullSpaceReference::new(v(&[0.6]), v(&[200.0, -200.0]))];
        let defs: Vec<f64> = [1e-1, 1e-3, 1e-5]
            .iter()
            .map(|&e| {
                let m = model(40, [e, e]);
                (ns_predict(&m, &far, &r).unwrap() - m.predict(&far).unwrap()).norm()
            })
            .collect();
        assert!(defs[0] > defs[1] && defs[1] > defs[2], "{defs:?}");
    }

    #[test]
    fn equivalent_via_point_reproduces_modulation() {
        let m = model(60, [0.2, 0.1]);
        let r = NullSpaceReference::new(v(&[0.37]), v(&[400.0, -250.0]));
        let vp = equivalent_via_point(&m, &r, DEFAULT_EQUIVALENT_VIA_COVARIANCE).unwrap();
        assert!((&vp.mean - &r.target).norm() > 1.0);
        let refit = m.adapt_via_point(&vp).unwrap();
        for i in 0..50 {
            let s = v(&[i as f64 / 49.0]);
            let a = refit.predict(&s).unwrap();
            let b = ns_predict(&m, &s, std::slice::from_ref(&r)).unwrap();
            assert!((a - b).amax() < 1e-2);
        }
        let zero = NullSpaceReference::new(v(&[0.37]), v(&[0.0, 0.0]));
        let vp0 = equivalent_via_point(&m, &zero, 1e-6).unwrap();
        assert_eq!(vp0.mean, m.predict(&zero.input).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let m = model(10, [0.1, 0.1]);
        let bad = [NullSpaceReference::new(v(&[0.1, 0.2]), v(&[1.0, 1.0]))];
        assert!(ns_predict(&m, &v(&[0.1]), &bad).is_err());
        let bad = [NullSpaceReference::new(v(&[0.1]), v(&[1.0]))];
        assert!(ns_predict(&m, &v(&[0.1]), &bad).is_err());
    }
}
