//! Small dense helpers shared by the model modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;
pub type Factor = Cholesky<f64, Dyn>;

pub(crate) fn mean_diag(m: &Matrix) -> f64 {
    let n = m.nrows().max(1);
    m.diagonal().sum() / n as f64
}

/// Cholesky with the jitter schedule used for kernel systems: first try the
/// matrix as is, then add `1e-10 * mean(diag)` to the diagonal and grow it
/// tenfold, at most three retries.
pub fn cholesky_jittered(m: Matrix, what: &'static str) -> Result<(Factor, f64)> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok((c, 0.0));
    }
    let md = mean_diag(&m).abs().max(f64::MIN_POSITIVE);
    let mut jitter = 1e-10 * md;
    for _ in 0..3 {
        let mut j = m.clone();
        for i in 0..j.nrows() {
            j[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(j) {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::Factorization {
        what,
        size: m.nrows(),
        mean_diag: md,
        jitter: jitter / 10.0,
    })
}

/// Covariance floor: add `1e-6 * mean(diag)` to the diagonal until the
/// Cholesky factorization succeeds. Returns the repaired matrix and its factor.
pub fn floor_covariance(m: Matrix) -> (Matrix, Factor) {
    let mut m = symmetrize(m);
    if let Some(c) = Cholesky::new(m.clone()) {
        return (m, c);
    }
    let md = mean_diag(&m).abs();
    let step = if md > 0.0 { 1e-6 * md } else { 1e-12 };
    let mut added = step;
    loop {
        for i in 0..m.nrows() {
            m[(i, i)] += step;
        }
        if let Some(c) = Cholesky::new(m.clone()) {
            return (m, c);
        }
        added += step;
        // Pathological input (NaN or hugely indefinite): fall back to a scaled identity.
        if !added.is_finite() || added > 1e6 * md.max(1.0) {
            let id = Matrix::identity(m.nrows(), m.nrows()) * md.max(1e-12);
            let c = Cholesky::new(id.clone()).expect("identity is SPD");
            return (id, c);
        }
    }
}

pub fn symmetrize(mut m: Matrix) -> Matrix {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Log-density of a Gaussian given the Cholesky factor of its covariance.
pub fn log_gaussian(x: &Vector, mean: &Vector, factor: &Factor) -> f64 {
    let diff = x - mean;
    let l = factor.l_dirty();
    let z = l
        .solve_lower_triangular(&diff)
        .expect("cholesky factor has a nonzero diagonal");
    let log_det: f64 = (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    let d = x.len() as f64;
    -0.5 * (z.norm_squared() + log_det + d * (2.0 * std::f64::consts::PI).ln())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    symmetrize(m.clone())
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(m: &Matrix) -> f64 {
    symmetrize(m.clone())
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_spd(m: &Matrix) -> bool {
    Cholesky::new(m.clone()).is_some()
}

/// Evenly spaced values on `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
