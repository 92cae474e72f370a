//! Residual-bootstrap calibration of LOCO path statistics.
//!
//! An initial estimate `beta_tilde` is fitted once. Each replicate resamples
//! its residuals with replacement, rebuilds a response that satisfies the
//! null by construction, and recomputes the observed statistic on it: the
//! distance between the unconstrained path and the null-constrained path of
//! the offset response.

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Hypothesis};
use crate::error::{LocoError, Result};
use crate::metric::{loco_statistics, null_statistic, path_distance, NormSpec};
use crate::path::{adaptive_lasso, AdaptiveFit, Design};
use crate::seed::{self, tag};

/// How the residual-generating initial estimate is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialEstimator {
    #[default]
    AdaptiveLasso,
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub folds: usize,
    pub center_residuals: bool,
    pub initial: InitialEstimator,
    /// Keep the replicate statistics in the outcome.
    pub store_replicates: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            b: 500,
            alpha: 0.05,
            seed: 0,
            folds: 10,
            center_residuals: true,
            initial: InitialEstimator::AdaptiveLasso,
            store_replicates: true,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b < 1 {
            return Err(LocoError::InvalidConfig("need at least one bootstrap replicate".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(LocoError::InvalidConfig(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub pvalue: f64,
    /// The `floor(B (1 - alpha))`-th smallest replicate.
    pub critical: f64,
    pub reject: bool,
    pub b: usize,
    pub alpha: f64,
    pub replicates: Option<Vec<f64>>,
}

/// One-based rank of the critical order statistic, `floor(B (1 - alpha))`,
/// clamped to `[1, B]`.
pub fn critical_rank(b: usize, alpha: f64) -> usize {
    // guard against 0.95 * 200 landing a hair below 190
    let r = ((b as f64) * (1.0 - alpha) + 1e-9).floor() as usize;
    r.clamp(1, b)
}

/// Assembles the decision from the observed statistic and its replicates.
pub fn decide(statistic: f64, replicates: Vec<f64>, alpha: f64, keep: bool) -> TestOutcome {
    let b = replicates.len();
    let mut sorted = replicates.clone();
    sorted.sort_by(f64::total_cmp);
    let critical = sorted[critical_rank(b, alpha) - 1];
    let exceed = replicates.iter().filter(|&&t| t > statistic).count();
    TestOutcome {
        statistic,
        pvalue: exceed as f64 / b as f64,
        critical,
        reject: statistic > critical,
        b,
        alpha,
        replicates: keep.then_some(replicates),
    }
}

/// `y - X beta_tilde`, optionally mean-centered.
pub fn residuals_from_initial(data: &Dataset, fit: &AdaptiveFit, center: bool) -> Result<Array1<f64>> {
    if fit.beta_tilde.len() != data.p() {
        return Err(LocoError::DimensionMismatch(format!(
            "initial estimate has {} coefficients for {} covariates",
            fit.beta_tilde.len(),
            data.p()
        )));
    }
    let mut r = data.y() - &data.x().dot(&fit.beta_tilde);
    if center {
        let m = r.mean().unwrap_or(0.0);
        r.mapv_inplace(|v| v - m);
    }
    Ok(r)
}

/// Fixed pieces shared by every replicate of one test.
struct ReplicateContext<'a> {
    design: Design<'a>,
    /// `X_{-A} beta_tilde_{-A} + X_A beta_{0,A}`, the mean response under the null.
    base: Array1<f64>,
    /// `X_A beta_{0,A}`
    offset: Array1<f64>,
    residuals: &'a Array1<f64>,
    constrained: &'a [usize],
    spec: NormSpec,
}

impl<'a> ReplicateContext<'a> {
    fn new(
        data: &'a Dataset,
        fit: &AdaptiveFit,
        residuals: &'a Array1<f64>,
        h: &'a Hypothesis,
        spec: NormSpec,
    ) -> Result<Self> {
        h.validate_for(data.p())?;
        if residuals.len() != data.n() {
            return Err(LocoError::DimensionMismatch(format!(
                "{} residuals for {} rows",
                residuals.len(),
                data.n()
            )));
        }
        if fit.beta_tilde.len() != data.p() {
            return Err(LocoError::DimensionMismatch("initial estimate length".into()));
        }
        let mut shifted = fit.beta_tilde.clone();
        for (&j, &v) in h.constrained().iter().zip(h.values()) {
            shifted[j] = v;
        }
        let base = data.x().dot(&shifted);
        Ok(Self {
            design: Design::auto(data.x().view()),
            base,
            offset: h.offset(data)?,
            residuals,
            constrained: h.constrained(),
            spec,
        })
    }

    fn replicate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let n = self.base.len();
        let y: Array1<f64> = self
            .base
            .iter()
            .map(|&b| b + self.residuals[rng.random_range(0..n)])
            .collect();
        // Same statistic as the observed one, on a response drawn under the null.
        let full = self.design.path(y.view(), &[])?;
        let y0 = &y - &self.offset;
        let constrained = self.design.path(y0.view(), self.constrained)?;
        path_distance(&full, &constrained, self.spec)
    }
}

/// One bootstrap draw `T*` of the null statistic.
pub fn bootstrap_replicate<R: Rng + ?Sized>(
    data: &Dataset,
    fit: &AdaptiveFit,
    residuals: &Array1<f64>,
    h: &Hypothesis,
    spec: NormSpec,
    rng: &mut R,
) -> Result<f64> {
    ReplicateContext::new(data, fit, residuals, h, spec)?.replicate(rng)
}

/// Fits the configured initial estimator.
pub fn initial_fit(data: &Dataset, cfg: &BootstrapConfig) -> Result<AdaptiveFit> {
    match cfg.initial {
        InitialEstimator::AdaptiveLasso => {
            adaptive_lasso(data, cfg.folds, seed::derive_seed(cfg.seed, &[tag::INITIAL_FIT]))
        }
        InitialEstimator::LeastSquares => AdaptiveFit::least_squares(data),
    }
}

/// Residual-bootstrap test of `h`.
///
/// Replicate `b` draws from its own generator derived from `cfg.seed`, so the
/// outcome does not depend on how replicates are scheduled across threads.
pub fn bootstrap_test(
    data: &Dataset,
    h: &Hypothesis,
    spec: NormSpec,
    cfg: &BootstrapConfig,
) -> Result<TestOutcome> {
    cfg.validate()?;
    h.validate_for(data.p())?;
    let statistic = null_statistic(data, h, spec)?;
    let fit = initial_fit(data, cfg)?;
    let residuals = residuals_from_initial(data, &fit, cfg.center_residuals)?;
    let ctx = ReplicateContext::new(data, &fit, &residuals, h, spec)?;
    let replicates = (0..cfg.b)
        .into_par_iter()
        .map(|b| ctx.replicate(&mut seed::stream(cfg.seed, &[tag::REPLICATE, b as u64])))
        .collect::<Result<Vec<f64>>>()?;
    Ok(decide(statistic, replicates, cfg.alpha, cfg.store_replicates))
}

/// Test of `beta_j = 0`.
pub fn single_coefficient_test(
    data: &Dataset,
    j: usize,
    spec: NormSpec,
    cfg: &BootstrapConfig,
) -> Result<TestOutcome> {
    data.check_index(j)?;
    bootstrap_test(data, &Hypothesis::single_zero(j), spec, cfg)
}

/// Empirical quantile interval of permutation importances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationInterval {
    pub j: usize,
    pub level: f64,
    pub m: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Linear-interpolation quantile of sorted data (R type 7).
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn validate_permutation(m: usize, level: f64) -> Result<()> {
    if m < 2 {
        return Err(LocoError::InvalidConfig(format!("need at least 2 permutations, got {m}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(LocoError::InvalidConfig(format!("level {level} not in (0, 1)")));
    }
    Ok(())
}

/// Raw statistics of the full path against paths refitted with column `j`
/// permuted, one per permutation.
fn permutation_statistics(data: &Dataset, j: usize, spec: NormSpec, m: usize, seed: u64) -> Result<Vec<f64>> {
    let full = Design::new(data.x().view()).path(data.y().view(), &[])?;
    (0..m)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::stream(seed, &[tag::PERMUTATION, j as u64, r as u64]);
            let mut col = data.column(j).to_vec();
            col.shuffle(&mut rng);
            let mut x = data.x().clone();
            x.column_mut(j).assign(&Array1::from(col));
            let permuted = Design::new(x.view()).path(data.y().view(), &[])?;
            path_distance(&full, &permuted, spec)
        })
        .collect()
}

fn interval_from(j: usize, raw: Vec<f64>, total: f64, m: usize, level: f64) -> PermutationInterval {
    let mut scaled: Vec<f64> = raw
        .iter()
        .map(|t| if total > 0.0 { t / total } else { 0.0 })
        .collect();
    scaled.sort_by(f64::total_cmp);
    PermutationInterval {
        j,
        level,
        m,
        lo: quantile_sorted(&scaled, (1.0 - level) / 2.0),
        hi: quantile_sorted(&scaled, (1.0 + level) / 2.0),
    }
}

/// Permutation interval for the importance of covariate `j`, on the
/// normalized scale (divided by the sum of all LOCO statistics).
pub fn permutation_interval(
    data: &Dataset,
    j: usize,
    spec: NormSpec,
    m: usize,
    level: f64,
    seed: u64,
) -> Result<PermutationInterval> {
    data.check_index(j)?;
    validate_permutation(m, level)?;
    let total: f64 = loco_statistics(data, spec)?.iter().sum();
    let raw = permutation_statistics(data, j, spec, m, seed)?;
    Ok(interval_from(j, raw, total, m, level))
}

/// Permutation intervals for every covariate against a known importance total.
pub fn permutation_intervals(
    data: &Dataset,
    spec: NormSpec,
    total: f64,
    m: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<PermutationInterval>> {
    validate_permutation(m, level)?;
    (0..data.p())
        .map(|j| Ok(interval_from(j, permutation_statistics(data, j, spec, m, seed)?, total, m, level)))
        .collect()
}
