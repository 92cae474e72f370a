use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{LocoError, Result};
use crate::seed::{self, tag};

/// Covariance of the Gaussian covariate rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Covariance {
    Identity,
    /// `Sigma_ij = rho^|i-j|`
    Ar1 { rho: f64 },
    /// `Sigma_ij = rho` off the diagonal, 1 on it.
    Equicorr { rho: f64 },
}

impl Covariance {
    pub fn rho(&self) -> f64 {
        match *self {
            Self::Identity => 0.0,
            Self::Ar1 { rho } | Self::Equicorr { rho } => rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rho = self.rho();
        if !(0.0..1.0).contains(&rho) {
            return Err(LocoError::InvalidConfig(format!("correlation {rho} not in [0, 1)")));
        }
        Ok(())
    }
}

impl fmt::Display for Covariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::Ar1 { rho } => write!(f, "ar1:{rho}"),
            Self::Equicorr { rho } => write!(f, "equicorr:{rho}"),
        }
    }
}

impl FromStr for Covariance {
    type Err = LocoError;

    /// `identity`, `ar1:<rho>` or `equicorr:<rho>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || LocoError::InvalidConfig(format!("unrecognized covariance {s:?}"));
        let cov = match s.split_once(':') {
            None if s == "identity" || s == "i" => Self::Identity,
            Some((kind, rho)) => {
                let rho: f64 = rho.trim().parse().map_err(|_| bad())?;
                match kind {
                    "ar1" => Self::Ar1 { rho },
                    "equicorr" | "cs" => Self::Equicorr { rho },
                    _ => return Err(bad()),
                }
            }
            None => return Err(bad()),
        };
        cov.validate()?;
        Ok(cov)
    }
}

/// A simulation design: `y = X beta + sigma * z` with Gaussian rows of `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub cov: Covariance,
    pub reps: usize,
    pub seed: u64,
}

impl SimDesign {
    /// Coefficients equal to `value` on the first `k` covariates and zero elsewhere.
    pub fn leading(n: usize, p: usize, k: usize, value: f64, cov: Covariance, reps: usize, seed: u64) -> Self {
        let mut beta = vec![0.0; p];
        beta.iter_mut().take(k).for_each(|b| *b = value);
        Self { n, p, beta, sigma: 1.0, cov, reps, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 || self.reps < 1 {
            return Err(LocoError::InvalidConfig("need n >= 2, p >= 1 and reps >= 1".into()));
        }
        if self.beta.len() != self.p {
            return Err(LocoError::DimensionMismatch(format!(
                "{} coefficients for p = {}",
                self.beta.len(),
                self.p
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(LocoError::InvalidConfig(format!("noise sd {} must be positive", self.sigma)));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(LocoError::NonFinite("coefficients"));
        }
        self.cov.validate()
    }

    /// Indices with nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        (0..self.p).filter(|&j| self.beta[j] != 0.0).collect()
    }
}

/// Draws an `n x p` Gaussian design with the given covariance.
///
/// AR(1) rows use the stationary recursion `x_k = rho x_{k-1} + sqrt(1-rho^2) z_k`;
/// equicorrelated rows use one common factor per row.
pub fn gaussian_design<R: rand::Rng + ?Sized>(n: usize, p: usize, cov: Covariance, rng: &mut R) -> Array2<f64> {
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        match cov {
            Covariance::Identity => {
                for v in row.iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
            }
            Covariance::Ar1 { rho } => {
                let innov = (1.0 - rho * rho).sqrt();
                let mut prev: f64 = StandardNormal.sample(rng);
                row[0] = prev;
                for v in row.iter_mut().skip(1) {
                    let z: f64 = StandardNormal.sample(rng);
                    prev = rho * prev + innov * z;
                    *v = prev;
                }
            }
            Covariance::Equicorr { rho } => {
                let g: f64 = StandardNormal.sample(rng);
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                for v in row.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *v = a * g + b * z;
                }
            }
        }
    }
    x
}

/// Replicate `rep_index` of a design. The covariates and the noise depend only
/// on `(seed, rep_index, n, p, cov)`, so designs differing only in `beta`
/// share them.
pub fn gen_dataset(design: &SimDesign, rep_index: usize) -> Result<Dataset> {
    design.validate()?;
    let mut rng = seed::stream(design.seed, &[tag::DATASET, rep_index as u64]);
    let x = gaussian_design(design.n, design.p, design.cov, &mut rng);
    let noise: Array1<f64> = (0..design.n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let beta = Array1::from(design.beta.clone());
    let y = x.dot(&beta) + noise * design.sigma;
    Dataset::with_default_names(x, y)
}
