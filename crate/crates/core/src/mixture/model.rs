use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Model feature order. Metric vectors are always fed in this order.
pub const FEATURES: [&str; 3] = ["prox", "di_theta", "di_d"];

const SCHEMA: &str = "seapartners.gmm";
const VERSION: u32 = 1;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

static BUNDLED: &str = include_str!("../../models/pair_trawlers.json");

/// One trivariate Gaussian component with its cached Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: Vector3<f64>,
    pub cov: Matrix3<f64>,
    /// Lower Cholesky factor of `cov` and its inverse.
    l: Matrix3<f64>,
    l_inv: Matrix3<f64>,
    /// ln π - ½ (3 ln 2π + ln |Σ|)
    log_norm: f64,
}

impl Component {
    pub fn new(weight: f64, mean: Vector3<f64>, cov: Matrix3<f64>) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::numeric(format!("component weight {weight} is not positive")));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::numeric("component parameters are not finite"));
        }
        let cov = (cov + cov.transpose()) * 0.5;
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::numeric("covariance is not positive definite"))?;
        let l = chol.l();
        let log_det = 2.0 * (0..3).map(|i| l[(i, i)].ln()).sum::<f64>();
        let l_inv = l
            .try_inverse()
            .ok_or_else(|| Error::numeric("singular Cholesky factor"))?;
        Ok(Component {
            weight,
            mean,
            cov,
            l,
            l_inv,
            log_norm: weight.ln() - 0.5 * (3.0 * LN_2PI + log_det),
        })
    }

    /// ln f(x) without the weight.
    pub fn log_pdf(&self, x: &[f64; 3]) -> f64 {
        self.log_weighted_pdf(x) - self.weight.ln()
    }

    /// ln π + ln f(x).
    #[inline]
    pub fn log_weighted_pdf(&self, x: &[f64; 3]) -> f64 {
        let d0 = x[0] - self.mean[0];
        let d1 = x[1] - self.mean[1];
        let d2 = x[2] - self.mean[2];
        let m = &self.l_inv;
        let z0 = m[(0, 0)] * d0;
        let z1 = m[(1, 0)] * d0 + m[(1, 1)] * d1;
        let z2 = m[(2, 0)] * d0 + m[(2, 1)] * d1 + m[(2, 2)] * d2;
        self.log_norm - 0.5 * (z0 * z0 + z1 * z1 + z2 * z2)
    }

    pub fn with_weight(&self, weight: f64) -> Result<Self> {
        Component::new(weight, self.mean, self.cov)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        let z = Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let x = self.mean + self.l * z;
        [x[0], x[1], x[2]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.cov.symmetric_eigenvalues().min()
    }
}

/// Fit provenance stored alongside fitted parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub n: usize,
    pub seed: u64,
    pub restarts: usize,
    pub restarts_discarded: usize,
    pub selected_restart: usize,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub icl: f64,
}

/// Gaussian mixture over (Prox, DI_θ, DI_d).
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub components: Vec<Component>,
    pub fit: Option<FitMetadata>,
}

/// Posterior cluster probabilities of one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub dyad: usize,
    pub posteriors: Vec<f64>,
    /// Zero-based component index of the maximum posterior.
    pub label: usize,
    pub max_posterior: f64,
}

impl Assignment {
    /// One-based cluster number as reported in outputs.
    pub fn cluster(&self) -> usize {
        self.label + 1
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentFile {
    weight: f64,
    mean: [f64; 3],
    covariance: [[f64; 3]; 3],
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    version: u32,
    features: Vec<String>,
    components: Vec<ComponentFile>,
    fit: Option<FitMetadata>,
}

impl GmmModel {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::config("a mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::numeric(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(GmmModel { components, fit: None })
    }

    /// Builds from raw parameter arrays.
    pub fn from_parts(weights: &[f64], means: &[[f64; 3]], covs: &[[[f64; 3]; 3]]) -> Result<Self> {
        if weights.len() != means.len() || weights.len() != covs.len() {
            return Err(Error::config("weights, means and covariances differ in length"));
        }
        let components = weights
            .iter()
            .zip(means)
            .zip(covs)
            .map(|((&w, m), c)| {
                let cov = Matrix3::from_fn(|i, j| c[i][j]);
                Component::new(w, Vector3::from(*m), cov)
            })
            .collect::<Result<Vec<_>>>()?;
        GmmModel::new(components)
    }

    /// The fixture model fitted to pelagic pair trawlers.
    pub fn bundled() -> Self {
        GmmModel::from_json(BUNDLED).expect("bundled model is valid")
    }

    pub fn g(&self) -> usize {
        self.components.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::config(format!("unreadable model file: {e}")))?;
        if file.schema != SCHEMA {
            return Err(Error::config(format!("model schema `{}` is not `{SCHEMA}`", file.schema)));
        }
        if file.version != VERSION {
            return Err(Error::config(format!(
                "model schema version {} is not supported (expected {VERSION})",
                file.version
            )));
        }
        if file.features.iter().map(String::as_str).ne(FEATURES) {
            return Err(Error::config(format!(
                "model feature order [{}] does not match the metric order [{}]; \
                 permute the mean entries and covariance rows/columns of every component \
                 into [{}] order and update `features`",
                file.features.join(", "),
                FEATURES.join(", "),
                FEATURES.join(", ")
            )));
        }
        let weights: Vec<f64> = file.components.iter().map(|c| c.weight).collect();
        let means: Vec<[f64; 3]> = file.components.iter().map(|c| c.mean).collect();
        let covs: Vec<[[f64; 3]; 3]> = file.components.iter().map(|c| c.covariance).collect();
        let mut model = GmmModel::from_parts(&weights, &means, &covs)?;
        model.fit = file.fit;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema: SCHEMA.to_string(),
            version: VERSION,
            features: FEATURES.iter().map(|s| s.to_string()).collect(),
            components: self
                .components
                .iter()
                .map(|c| ComponentFile {
                    weight: c.weight,
                    mean: [c.mean[0], c.mean[1], c.mean[2]],
                    covariance: std::array::from_fn(|i| std::array::from_fn(|j| c.cov[(i, j)])),
                })
                .collect(),
            fit: self.fit.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serialises");
        s.push('\n');
        s
    }

    /// ln φ(x) by log-sum-exp over components.
    pub fn log_density(&self, x: &[f64; 3]) -> Result<f64> {
        check_finite(x)?;
        let mut buf = vec![0.0; self.g()];
        Ok(self.log_joint(x, &mut buf))
    }

    /// φ(x) = Σ π_g f_g(x).
    pub fn density(&self, x: &[f64; 3]) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }

    /// Fills `out[g] = ln π_g f_g(x)` and returns their log-sum-exp.
    #[inline]
    pub(crate) fn log_joint(&self, x: &[f64; 3], out: &mut [f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.log_weighted_pdf(x);
            max = max.max(*o);
        }
        if !max.is_finite() {
            return max;
        }
        max + out.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }

    pub fn posterior(&self, x: &[f64; 3]) -> Result<Assignment> {
        check_finite(x)?;
        let mut lj = vec![0.0; self.g()];
        let total = self.log_joint(x, &mut lj);
        if !total.is_finite() {
            return Err(Error::Outlier { index: 0 });
        }
        let posteriors: Vec<f64> = lj.iter().map(|v| (v - total).exp()).collect();
        let mut label = 0;
        for (g, &p) in posteriors.iter().enumerate() {
            if p > posteriors[label] {
                label = g;
            }
        }
        Ok(Assignment {
            dyad: 0,
            max_posterior: posteriors[label],
            posteriors,
            label,
        })
    }

    /// `n` draws with their generating component index.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<([f64; 3], usize)> {
        let mut cum = Vec::with_capacity(self.g());
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight;
            cum.push(acc);
        }
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let g = cum.iter().position(|&c| u < c).unwrap_or(self.g() - 1);
                (self.components[g].sample(rng), g)
            })
            .collect()
    }

    /// Reorders components; `order[new] = old`.
    pub fn permuted(&self, order: &[usize]) -> GmmModel {
        GmmModel {
            components: order.iter().map(|&o| self.components[o].clone()).collect(),
            fit: self.fit.clone(),
        }
    }
}

fn check_finite(x: &[f64; 3]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::numeric(format!("metric vector {x:?} is not finite")))
    }
}

/// Standard normal density at the mode in three dimensions.
pub fn std_normal_peak() -> f64 {
    (2.0 * PI).powf(-1.5)
}
