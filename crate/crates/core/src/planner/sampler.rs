//! Candidate samplers for the replanning search.
//!
//! `Random` draws uniformly in the bounds. `Tpe` is a tree-structured Parzen
//! estimator: after a few uniform startup trials it splits the history at the
//! `gamma` quantile of cost, fits one Parzen estimator per dimension to the
//! good and bad sets, and proposes the best of `candidates` draws from the good
//! estimator under the ratio `l(x) / g(x)`. The good set holds at most
//! `max_good` observations, and ties in cost are ordered randomly. The uniform
//! prior carries `prior_weight` observations' worth of mass, which keeps the
//! search exploring when the landscape is mostly flat.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Random,
    #[default]
    Tpe,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "tpe" => Ok(Self::Tpe),
            other => Err(Error::InvalidConfig(format!("unknown sampler '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpeConfig {
    pub gamma: f64,
    pub candidates: usize,
    pub startup: usize,
    /// Upper bound on the size of the good set.
    pub max_good: usize,
    /// Weight of the uniform prior, in units of one observation.
    pub prior_weight: f64,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            candidates: 24,
            startup: 10,
            max_good: 25,
            prior_weight: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
    tpe: TpeConfig,
    bounds: Vec<(f64, f64)>,
    rng: ChaCha8Rng,
    history: Vec<(Vec<f64>, f64)>,
}

impl Sampler {
    /// `stream` selects an independent ChaCha stream under the same seed.
    pub fn new(kind: SamplerKind, bounds: Vec<(f64, f64)>, seed: u64, stream: u64) -> Result<Self> {
        Self::with_tpe(kind, TpeConfig::default(), bounds, seed, stream)
    }

    pub fn with_tpe(
        kind: SamplerKind,
        tpe: TpeConfig,
        bounds: Vec<(f64, f64)>,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidConfig("sampler needs at least one dimension".into()));
        }
        if let Some((lo, hi)) = bounds
            .iter()
            .find(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::InvalidConfig(format!("degenerate sampler bounds [{lo}, {hi}]")));
        }
        if !(tpe.gamma > 0.0 && tpe.gamma < 1.0) || tpe.candidates == 0 {
            return Err(Error::InvalidConfig(
                "TPE needs gamma in (0, 1) and >= 1 candidate".into(),
            ));
        }
        if !(tpe.prior_weight > 0.0 && tpe.prior_weight.is_finite()) {
            return Err(Error::InvalidConfig("TPE prior weight must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            kind,
            tpe,
            bounds,
            rng,
            history: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn observations(&self) -> usize {
        self.history.len()
    }

    pub fn propose(&mut self) -> Vec<f64> {
        if self.kind == SamplerKind::Random || self.history.len() < self.tpe.startup.max(2) {
            return self.uniform();
        }
        self.tpe_next()
    }

    pub fn update(&mut self, x: Vec<f64>, cost: f64) {
        self.history.push((x, cost));
    }

    fn uniform(&mut self) -> Vec<f64> {
        let rng = &mut self.rng;
        self.bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect()
    }

    fn tpe_next(&mut self) -> Vec<f64> {
        // Equal costs are common (the replanning cost takes three values), so
        // ties are ordered randomly rather than by trial number.
        let keys: Vec<u64> = (0..self.history.len()).map(|_| self.rng.random()).collect();
        let mut order: Vec<usize> = (0..self.history.len()).collect();
        order.sort_by(|&a, &b| {
            self.history[a]
                .1
                .total_cmp(&self.history[b].1)
                .then(keys[a].cmp(&keys[b]))
        });
        let n_good = ((self.tpe.gamma * order.len() as f64).ceil() as usize)
            .min(self.tpe.max_good)
            .clamp(1, order.len() - 1);
        let (good, bad) = order.split_at(n_good);
        let dims = self.dim();
        let pw = self.tpe.prior_weight;
        let good_est: Vec<Parzen> = (0..dims)
            .map(|k| Parzen::new(good.iter().map(|&i| self.history[i].0[k]), self.bounds[k], pw))
            .collect();
        let bad_est: Vec<Parzen> = (0..dims)
            .map(|k| Parzen::new(bad.iter().map(|&i| self.history[i].0[k]), self.bounds[k], pw))
            .collect();

        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..self.tpe.candidates {
            let x: Vec<f64> = good_est.iter().map(|e| e.sample(&mut self.rng)).collect();
            let score: f64 = x
                .iter()
                .zip(good_est.iter().zip(&bad_est))
                .map(|(v, (l, g))| l.pdf(*v) / g.pdf(*v))
                .product();
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, x));
            }
        }
        best.expect("at least one candidate").1
    }
}

/// One-dimensional Parzen estimator: truncated Gaussians at the observations
/// plus a uniform prior component of weight `p / (n + p)`.
#[derive(Debug, Clone)]
struct Parzen {
    lo: f64,
    hi: f64,
    mus: Vec<f64>,
    sigmas: Vec<f64>,
    inv_sigmas: Vec<f64>,
    /// `w / (sigma sqrt(2 pi) Z)` with `Z` the mass of the Gaussian inside `[lo, hi]`.
    coefs: Vec<f64>,
    prior: f64,
    prior_weight: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Beyond this squared standardized distance a component is below 1e-9 of
/// the prior density and is skipped.
const FAR: f64 = 100.0;

impl Parzen {
    fn new(points: impl Iterator<Item = f64>, (lo, hi): (f64, f64), prior_weight: f64) -> Self {
        let mut mus: Vec<f64> = points.collect();
        mus.sort_by(f64::total_cmp);
        let n = mus.len();
        let range = hi - lo;
        let min_sigma = range / (100.0f64).min(1.0 + n as f64);
        // Bandwidth from the gap to the farther neighbor, bounds included.
        let sigmas: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i == 0 { mus[i] - lo } else { mus[i] - mus[i - 1] };
                let right = if i + 1 == n { hi - mus[i] } else { mus[i + 1] - mus[i] };
                left.max(right).clamp(min_sigma, range)
            })
            .collect();
        let w = 1.0 / (n as f64 + prior_weight);
        let root = (2.0 * std::f64::consts::PI).sqrt();
        let coefs = mus
            .iter()
            .zip(&sigmas)
            .map(|(m, s)| {
                let (a, b) = ((lo - m) / s, (hi - m) / s);
                // The mass outside 8 sigma is below 1e-15.
                let z = if a < -8.0 && b > 8.0 {
                    1.0
                } else {
                    (std_normal_cdf(b) - std_normal_cdf(a)).max(1e-300)
                };
                w / (s * root * z)
            })
            .collect();
        Self {
            lo,
            hi,
            mus,
            inv_sigmas: sigmas.iter().map(|s| 1.0 / s).collect(),
            sigmas,
            coefs,
            prior: prior_weight * w / range,
            prior_weight,
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let mut p = self.prior;
        for ((m, a), c) in self.mus.iter().zip(&self.inv_sigmas).zip(&self.coefs) {
            let u = (x - m) * a;
            let u2 = u * u;
            if u2 < FAR {
                p += c * (-0.5 * u2).exp();
            }
        }
        p
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let n = self.mus.len() as f64;
        let pick = rng.random_range(0.0..n + self.prior_weight);
        if pick >= n {
            return rng.random_range(self.lo..self.hi);
        }
        let (m, s) = (self.mus[pick as usize], self.sigmas[pick as usize]);
        let normal = rand_distr::Normal::new(m, s).expect("positive bandwidth");
        for _ in 0..64 {
            let x = rand_distr::Distribution::sample(&normal, rng);
            if x >= self.lo && x < self.hi {
                return x;
            }
        }
        m.clamp(self.lo, self.hi)
    }
}
