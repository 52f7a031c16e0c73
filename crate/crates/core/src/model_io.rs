//! Versioned JSON model files.
//!
//! KMP files store the reference distribution and hyperparameters only; the
//! factorization is recomputed on load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::kmp::KmpModel;
use crate::linalg::{Matrix, Vector};
use crate::promp::PrompModel;
use crate::refdist::{GaussianMixture, ReferenceTrajectoryDistribution};

pub const SCHEMA_VERSION: u32 = 1;

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: u32,
    #[serde(flatten)]
    pub model: StoredModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StoredModel {
    Kmp {
        lambda: f64,
        length_scale: f64,
        inputs: Rows,
        means: Rows,
        covariances: Vec<Rows>,
    },
    Promp {
        centers: Vec<f64>,
        bandwidth: f64,
        output_dim: usize,
        mu_w: Vec<f64>,
        sigma_w: Rows,
    },
    Gmm {
        input_dim: usize,
        priors: Vec<f64>,
        means: Rows,
        covariances: Vec<Rows>,
    },
}

fn vec_out(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn vec_in(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

fn mat_out(m: &Matrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn mat_in(rows: &Rows) -> Result<Matrix> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(Error::Data("ragged matrix in model file".into()));
    }
    Ok(Matrix::from_fn(n, c, |i, j| rows[i][j]))
}

impl ModelFile {
    pub fn from_kmp(model: &KmpModel) -> Self {
        let r = model.reference();
        Self {
            schema: SCHEMA_VERSION,
            model: StoredModel::Kmp {
                lambda: model.lambda(),
                length_scale: model.kernel().length_scale,
                inputs: r.inputs.iter().map(vec_out).collect(),
                means: r.means.iter().map(vec_out).collect(),
                covariances: r.covariances.iter().map(mat_out).collect(),
            },
        }
    }

    pub fn from_promp(model: &PrompModel) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            model: StoredModel::Promp {
                centers: model.centers.clone(),
                bandwidth: model.bandwidth,
                output_dim: model.output_dim,
                mu_w: vec_out(&model.mu_w),
                sigma_w: mat_out(&model.sigma_w),
            },
        }
    }

    pub fn from_gmm(gmm: &GaussianMixture) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            model: StoredModel::Gmm {
                input_dim: gmm.input_dim,
                priors: gmm.priors.clone(),
                means: gmm.means.iter().map(vec_out).collect(),
                covariances: gmm.covariances.iter().map(mat_out).collect(),
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.model {
            StoredModel::Kmp { .. } => "kmp",
            StoredModel::Promp { .. } => "promp",
            StoredModel::Gmm { .. } => "gmm",
        }
    }

    pub fn to_kmp(&self) -> Result<KmpModel> {
        match &self.model {
            StoredModel::Kmp {
                lambda,
                length_scale,
                inputs,
                means,
                covariances,
            } => {
                let reference = ReferenceTrajectoryDistribution::new(
                    inputs.iter().map(|v| vec_in(v)).collect(),
                    means.iter().map(|v| vec_in(v)).collect(),
                    covariances.iter().map(mat_in).collect::<Result<_>>()?,
                )?;
                let kernel = KernelConfig::new(*length_scale, reference.output_dim())?;
                KmpModel::fit(reference, *lambda, kernel)
            }
            _ => Err(Error::Data(format!("expected a kmp model, found {}", self.kind()))),
        }
    }

    pub fn to_promp(&self) -> Result<PrompModel> {
        match &self.model {
            StoredModel::Promp {
                centers,
                bandwidth,
                output_dim,
                mu_w,
                sigma_w,
            } => Ok(PrompModel {
                centers: centers.clone(),
                bandwidth: *bandwidth,
                output_dim: *output_dim,
                mu_w: vec_in(mu_w),
                sigma_w: mat_in(sigma_w)?,
            }),
            _ => Err(Error::Data(format!("expected a promp model, found {}", self.kind()))),
        }
    }

    pub fn to_gmm(&self) -> Result<GaussianMixture> {
        match &self.model {
            StoredModel::Gmm {
                input_dim,
                priors,
                means,
                covariances,
            } => {
                let g = GaussianMixture {
                    input_dim: *input_dim,
                    priors: priors.clone(),
                    means: means.iter().map(|v| vec_in(v)).collect(),
                    covariances: covariances.iter().map(mat_in).collect::<Result<_>>()?,
                };
                g.validate()?;
                Ok(g)
            }
            _ => Err(Error::Data(format!("expected a gmm model, found {}", self.kind()))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.schema != SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "unsupported model schema {} (expected {SCHEMA_VERSION})",
                file.schema
            )));
        }
        Ok(file)
    }
}
