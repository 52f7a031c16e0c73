use super::{GaussianMixture, ReferenceTrajectoryDistribution};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{floor_covariance, log_gaussian, symmetrize, Factor, Matrix, Vector};

#[derive(Debug, Clone)]
pub struct GmrOutput {
    pub mean: Vector,
    pub covariance: Matrix,
    /// Set when every component weight underflowed and uniform weights were used.
    pub uniform_fallback: bool,
}

struct Part {
    log_prior: f64,
    in_mean: Vector,
    in_factor: Factor,
    out_mean: Vector,
    /// `Sigma_out,in * Sigma_in^-1`
    gain: Matrix,
    cond_cov: Matrix,
}

/// Per-component conditioning terms of a mixture, reusable across queries.
pub struct Conditioner {
    input_dim: usize,
    output_dim: usize,
    parts: Vec<Part>,
}

impl Conditioner {
    pub fn new(gmm: &GaussianMixture) -> Result<Self> {
        gmm.validate()?;
        let i = gmm.input_dim;
        let d = gmm.output_dim();
        let parts = gmm
            .priors
            .iter()
            .zip(&gmm.means)
            .zip(&gmm.covariances)
            .map(|((p, m), s)| {
                let s_in = s.view((0, 0), (i, i)).into_owned();
                let s_oi = s.view((i, 0), (d, i)).into_owned();
                let s_oo = s.view((i, i), (d, d)).into_owned();
                let (_, in_factor) = floor_covariance(s_in);
                // gain = s_oi * s_in^-1  <=>  s_in * gain^T = s_oi^T
                let gain = in_factor.solve(&s_oi.transpose()).transpose();
                let cond_cov = symmetrize(&s_oo - &gain * s_oi.transpose());
                Part {
                    log_prior: p.ln(),
                    in_mean: m.rows(0, i).into_owned(),
                    in_factor,
                    out_mean: m.rows(i, d).into_owned(),
                    gain,
                    cond_cov,
                }
            })
            .collect();
        Ok(Self {
            input_dim: i,
            output_dim: d,
            parts,
        })
    }

    pub fn query(&self, s: &Vector) -> Result<GmrOutput> {
        check_dim("gmr query", self.input_dim, s.len())?;
        let mut logw: Vec<f64> = self
            .parts
            .iter()
            .map(|p| p.log_prior + log_gaussian(s, &p.in_mean, &p.in_factor))
            .collect();
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let uniform_fallback = !(max >= f64::MIN_POSITIVE.ln());
        if uniform_fallback {
            let u = 1.0 / logw.len() as f64;
            logw.iter_mut().for_each(|w| *w = u);
        } else {
            let z: f64 = logw.iter().map(|w| (w - max).exp()).sum();
            logw.iter_mut().for_each(|w| *w = (*w - max).exp() / z);
        }
        let weights = logw;

        let d = self.output_dim;
        let mut mean = Vector::zeros(d);
        let mut second = Matrix::zeros(d, d);
        for (w, p) in weights.iter().zip(&self.parts) {
            let m = &p.out_mean + &p.gain * (s - &p.in_mean);
            mean.axpy(*w, &m, 1.0);
            second += (&p.cond_cov + &m * m.transpose()) * *w;
        }
        let cov = second - &mean * mean.transpose();
        let (covariance, _) = floor_covariance(cov);
        Ok(GmrOutput {
            mean,
            covariance,
            uniform_fallback,
        })
    }
}

pub fn gmr(gmm: &GaussianMixture, s: &Vector) -> Result<GmrOutput> {
    Conditioner::new(gmm)?.query(s)
}

pub fn build_reference(gmm: &GaussianMixture, query_inputs: &[Vector]) -> Result<ReferenceTrajectoryDistribution> {
    if query_inputs.is_empty() {
        return Err(Error::InvalidConfig("at least one query input is required".into()));
    }
    let cond = Conditioner::new(gmm)?;
    let mut means = Vec::with_capacity(query_inputs.len());
    let mut covs = Vec::with_capacity(query_inputs.len());
    for s in query_inputs {
        let out = cond.query(s)?;
        means.push(out.mean);
        covs.push(out.covariance);
    }
    ReferenceTrajectoryDistribution::new(query_inputs.to_vec(), means, covs)
}

pub fn perturb_component_mean(gmm: &GaussianMixture, component: usize, delta: &Vector) -> Result<GaussianMixture> {
    if component >= gmm.components() {
        return Err(Error::InvalidConfig(format!(
            "component index {component} out of range for {} components",
            gmm.components()
        )));
    }
    check_dim("mean perturbation", gmm.joint_dim(), delta.len())?;
    let mut out = gmm.clone();
    out.means[component] += delta;
    Ok(out)
}
