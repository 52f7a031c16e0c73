//! Reference trajectory distributions built from demonstrations.
//!
//! Demonstrations are fitted with a Gaussian mixture over the joint
//! `(input, output)` space; Gaussian mixture regression then yields one
//! output Gaussian per query input.

mod data;
mod em;
mod gmr;
pub mod synth;

pub use data::{read_demos_csv, write_demos_csv};
pub use em::{em_fit, em_fit_points, log_likelihood, responsibilities, EmFit, EmOptions};
pub use gmr::{build_reference, gmr, perturb_component_mean, Conditioner, GmrOutput};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{is_spd, linspace, Matrix, Vector};

/// One demonstrated trajectory as paired input/output samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub inputs: Vec<Vector>,
    pub outputs: Vec<Vector>,
}

impl Demonstration {
    pub fn new(inputs: Vec<Vector>, outputs: Vec<Vector>) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(Error::Data(format!(
                "demonstration has {} inputs but {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        if inputs.len() < 2 {
            return Err(Error::Data("a demonstration needs at least 2 samples".into()));
        }
        let (i, d) = (inputs[0].len(), outputs[0].len());
        if i == 0 || d == 0 {
            return Err(Error::Data("empty input or output vectors".into()));
        }
        for (s, x) in inputs.iter().zip(&outputs) {
            check_dim("demonstration input", i, s.len())?;
            check_dim("demonstration output", d, x.len())?;
        }
        Ok(Self { inputs, outputs })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs[0].len()
    }

    /// Joint `(s, xi)` sample vectors.
    pub fn joint_points(&self) -> Vec<Vector> {
        self.inputs
            .iter()
            .zip(&self.outputs)
            .map(|(s, x)| {
                let mut v = Vector::zeros(s.len() + x.len());
                v.rows_mut(0, s.len()).copy_from(s);
                v.rows_mut(s.len(), x.len()).copy_from(x);
                v
            })
            .collect()
    }
}

/// Mixture over the joint `(input, output)` space; the first `input_dim`
/// coordinates of every mean are inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub input_dim: usize,
    pub priors: Vec<f64>,
    pub means: Vec<Vector>,
    pub covariances: Vec<Matrix>,
}

impl GaussianMixture {
    pub fn components(&self) -> usize {
        self.priors.len()
    }

    pub fn joint_dim(&self) -> usize {
        self.means.first().map_or(0, |m| m.len())
    }

    pub fn output_dim(&self) -> usize {
        self.joint_dim() - self.input_dim
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.priors.len();
        if c == 0 || self.means.len() != c || self.covariances.len() != c {
            return Err(Error::Data("mixture component lists disagree in length".into()));
        }
        let total: f64 = self.priors.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.priors.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Data(format!(
                "mixture priors must be positive and sum to 1, got {total}"
            )));
        }
        let dim = self.joint_dim();
        if self.input_dim == 0 || self.input_dim >= dim {
            return Err(Error::Data("mixture input dimension out of range".into()));
        }
        for (m, s) in self.means.iter().zip(&self.covariances) {
            check_dim("mixture mean", dim, m.len())?;
            check_dim("mixture covariance", dim, s.nrows())?;
            if !is_spd(s) {
                return Err(Error::Data("mixture covariance is not positive definite".into()));
            }
        }
        Ok(())
    }
}

/// `N` triples `(s_n, mu_n, Sigma_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectoryDistribution {
    pub inputs: Vec<Vector>,
    pub means: Vec<Vector>,
    pub covariances: Vec<Matrix>,
}

impl ReferenceTrajectoryDistribution {
    pub fn new(inputs: Vec<Vector>, means: Vec<Vector>, covariances: Vec<Matrix>) -> Result<Self> {
        let r = Self {
            inputs,
            means,
            covariances,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.inputs.len();
        if n == 0 {
            return Err(Error::InvalidConfig("reference distribution is empty".into()));
        }
        if self.means.len() != n || self.covariances.len() != n {
            return Err(Error::Data("reference lists disagree in length".into()));
        }
        let (i, d) = (self.inputs[0].len(), self.means[0].len());
        for ((s, m), c) in self.inputs.iter().zip(&self.means).zip(&self.covariances) {
            check_dim("reference input", i, s.len())?;
            check_dim("reference mean", d, m.len())?;
            check_dim("reference covariance", d, c.nrows())?;
            check_dim("reference covariance", d, c.ncols())?;
            if !is_spd(c) {
                return Err(Error::Data("reference covariance is not positive definite".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.means[0].len()
    }

    /// Appends one point, used for via-point adaptation.
    pub fn push(&mut self, input: Vector, mean: Vector, covariance: Matrix) {
        self.inputs.push(input);
        self.means.push(mean);
        self.covariances.push(covariance);
    }
}

/// Default GMR query inputs: for scalar inputs, `n` evenly spaced values over
/// the demonstrated range; for vector inputs, the demonstrations' mean input
/// path sampled at `n` evenly spaced phases.
pub fn default_query_inputs(demos: &[Demonstration], n: usize) -> Result<Vec<Vector>> {
    let first = demos.first().ok_or_else(|| Error::Data("no demonstrations".into()))?;
    if n == 0 {
        return Err(Error::InvalidConfig("number of reference points must be >= 1".into()));
    }
    if first.input_dim() == 1 {
        let (lo, hi) = demos
            .iter()
            .flat_map(|d| d.inputs.iter().map(|s| s[0]))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        return Ok(linspace(lo, hi, n)
            .into_iter()
            .map(|t| Vector::from_element(1, t))
            .collect());
    }
    let phases = linspace(0.0, 1.0, n);
    Ok(phases
        .iter()
        .map(|&f| {
            let mut acc = Vector::zeros(first.input_dim());
            for d in demos {
                let x = f * (d.len() - 1) as f64;
                let i = (x.floor() as usize).min(d.len() - 2);
                let w = x - i as f64;
                acc += &d.inputs[i] * (1.0 - w) + &d.inputs[i + 1] * w;
            }
            acc / demos.len() as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demonstration_validation() {
        let s = vec![Vector::from_element(1, 0.0), Vector::from_element(1, 1.0)];
        let x = vec![Vector::zeros(2), Vector::zeros(2)];
        assert!(Demonstration::new(s.clone(), x.clone()).is_ok());
        assert!(Demonstration::new(s[..1].to_vec(), x[..1].to_vec()).is_err());
        assert!(Demonstration::new(s.clone(), x[..1].to_vec()).is_err());
        let bad = vec![Vector::zeros(2), Vector::zeros(3)];
        assert!(Demonstration::new(s, bad).is_err());
    }

    #[test]
    fn scalar_queries_span_the_range() {
        let demos = synth::letter_a(&synth::LetterConfig::default(), 3).unwrap();
        let q = default_query_inputs(&demos, 100).unwrap();
        assert_eq!(q.len(), 100);
        assert_eq!(q[0][0], 0.0);
        assert_eq!(q[99][0], 1.0);
    }

    #[test]
    fn vector_queries_follow_the_mean_path() {
        let demos = synth::handover(&synth::HandoverConfig::default(), 3).unwrap();
        let q = default_query_inputs(&demos, 50).unwrap();
        assert_eq!(q.len(), 50);
        let start: Vector = demos.iter().map(|d| d.inputs[0].clone()).sum::<Vector>() / demos.len() as f64;
        assert!((&q[0] - start).norm() < 1e-12);
    }
}
