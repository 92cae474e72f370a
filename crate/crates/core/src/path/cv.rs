//! Cross-validated LASSO and the adaptive LASSO initial estimator.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::homotopy::Design;
use crate::data::Dataset;
use crate::error::{LocoError, Result};
use crate::linalg::least_squares;
use crate::seed::{self, tag};

/// Number of penalty values scanned by cross validation.
pub const CV_GRID_SIZE: usize = 100;
/// Ratio between the smallest and the largest grid value.
const GRID_SPAN: f64 = 1e-3;

/// Outcome of [`cv_lasso`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvLasso {
    pub lambda_cv: f64,
    pub beta: Array1<f64>,
    pub grid: Vec<f64>,
    /// Mean held-out squared error per grid value.
    pub cv_error: Vec<f64>,
}

/// Initial estimator used to generate bootstrap residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveFit {
    pub beta_tilde: Array1<f64>,
    pub lambda_cv: f64,
    pub gamma_cv: f64,
    /// `1 / |beta_L|`, infinite where the first-stage LASSO is zero.
    pub weights: Array1<f64>,
}

impl AdaptiveFit {
    /// Ordinary least squares in place of the adaptive LASSO (unit weights,
    /// no penalties). Requires a full-column-rank design with `p < n`.
    pub fn least_squares(data: &Dataset) -> Result<Self> {
        let fit = least_squares(&data.x().view(), data.y()).ok_or_else(|| {
            LocoError::RankDeficient("least-squares initial estimator needs full column rank".into())
        })?;
        Ok(Self {
            beta_tilde: fit.coef,
            lambda_cv: 0.0,
            gamma_cv: 0.0,
            weights: Array1::ones(data.p()),
        })
    }
}

/// Geometric grid from `lambda_max` down to `lambda_max * 1e-3`.
pub fn lambda_grid(lambda_max: f64, size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![lambda_max],
        _ => (0..size)
            .map(|i| lambda_max * GRID_SPAN.powf(i as f64 / (size - 1) as f64))
            .collect(),
    }
}

fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seed::stream(seed, &[tag::FOLDS]);
    order.shuffle(&mut rng);
    let mut fold = vec![0; n];
    for (i, &row) in order.iter().enumerate() {
        fold[row] = i % folds;
    }
    fold
}

fn cv_on(x: ArrayView2<f64>, y: &Array1<f64>, folds: usize, grid_size: usize, seed: u64) -> Result<CvLasso> {
    let (n, p) = x.dim();
    if folds < 2 {
        return Err(LocoError::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(LocoError::InvalidConfig(format!("{n} observations cannot fill {folds} folds")));
    }
    if grid_size == 0 {
        return Err(LocoError::InvalidConfig("empty lambda grid".into()));
    }
    let lambda_max = x.t().dot(y).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if lambda_max <= 0.0 {
        return Ok(CvLasso {
            lambda_cv: 0.0,
            beta: Array1::zeros(p),
            grid: vec![0.0],
            cv_error: vec![y.dot(y) / n as f64],
        });
    }
    let grid = lambda_grid(lambda_max, grid_size);
    let fold = fold_assignment(n, folds, seed);

    let mut cv_error = vec![0.0; grid.len()];
    for f in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold[i] == f).collect();
        let x_train = x.select(Axis(0), &train);
        let y_train = y.select(Axis(0), &train);
        let x_test = x.select(Axis(0), &test);
        let y_test = y.select(Axis(0), &test);
        let path = Design::new(x_train.view()).path(y_train.view(), &[])?;
        // Penalties act on sums over observations; rescale to the fold size.
        let scale = train.len() as f64 / n as f64;
        for (g, &lam) in grid.iter().enumerate() {
            let beta = path.eval(lam * scale)?;
            let resid = &y_test - &x_test.dot(&beta);
            cv_error[g] += resid.dot(&resid) / test.len() as f64;
        }
    }
    cv_error.iter_mut().for_each(|e| *e /= folds as f64);

    let best = cv_error
        .iter()
        .enumerate()
        .fold(0, |b, (i, e)| if *e < cv_error[b] { i } else { b });
    let lambda_cv = grid[best];
    let beta = Design::new(x).path(y.view(), &[])?.eval(lambda_cv)?;
    Ok(CvLasso { lambda_cv, beta, grid, cv_error })
}

/// K-fold cross-validated LASSO over a geometric penalty grid.
///
/// Folds come from a seeded shuffle followed by round-robin assignment. Each
/// training fold is fitted on the grid scaled by `n_train / n`, so that grid
/// values mean the same per-observation penalty in every fold.
pub fn cv_lasso(data: &Dataset, folds: usize, grid_size: usize, seed: u64) -> Result<CvLasso> {
    cv_on(data.x().view(), data.y(), folds, grid_size, seed)
}

/// Two-stage adaptive LASSO with weights `1 / |beta_L|` from a cross-validated
/// LASSO. Columns with infinite weight are dropped; the rest are rescaled by
/// `|beta_L_j|`, the second-stage penalty is cross validated on the rescaled
/// design, and coefficients are mapped back to the original scale.
pub fn adaptive_lasso(data: &Dataset, folds: usize, seed: u64) -> Result<AdaptiveFit> {
    let first = cv_lasso(data, folds, CV_GRID_SIZE, seed)?;
    let p = data.p();
    let weights = first.beta.mapv(|b| if b == 0.0 { f64::INFINITY } else { 1.0 / b.abs() });
    let kept: Vec<usize> = (0..p).filter(|&j| weights[j].is_finite()).collect();
    let mut beta_tilde = Array1::zeros(p);
    if kept.is_empty() {
        return Ok(AdaptiveFit { beta_tilde, lambda_cv: first.lambda_cv, gamma_cv: 0.0, weights });
    }
    let mut scaled = Array2::zeros((data.n(), kept.len()));
    for (c, &j) in kept.iter().enumerate() {
        let s = first.beta[j].abs();
        scaled.column_mut(c).assign(&data.column(j).mapv(|v| v * s));
    }
    let second = cv_on(scaled.view(), data.y(), folds, CV_GRID_SIZE, seed)?;
    for (c, &j) in kept.iter().enumerate() {
        beta_tilde[j] = second.beta[c] * first.beta[j].abs();
    }
    Ok(AdaptiveFit { beta_tilde, lambda_cv: first.lambda_cv, gamma_cv: second.lambda_cv, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn grid_is_geometric() {
        let g = lambda_grid(10.0, 100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 10.0);
        assert!((g[99] - 0.01).abs() < 1e-12);
        let r = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
    }

    #[test]
    fn folds_are_balanced() {
        let f = fold_assignment(23, 5, 3);
        for k in 0..5 {
            let c = f.iter().filter(|&&v| v == k).count();
            assert!(c == 4 || c == 5);
        }
        assert_eq!(f, fold_assignment(23, 5, 3));
    }

    #[test]
    fn cv_validates_inputs() {
        let x = array![[1.0], [2.0], [3.0]];
        let d = Dataset::with_default_names(x, array![1.0, 2.0, 3.0]).unwrap();
        assert!(cv_lasso(&d, 1, 10, 0).is_err());
        assert!(cv_lasso(&d, 4, 10, 0).is_err());
        assert!(cv_lasso(&d, 3, 0, 0).is_err());
    }

    #[test]
    fn zero_response_gives_zero_fit() {
        let x = array![[1.0, 0.5], [2.0, -1.0], [3.0, 0.0], [0.0, 1.0]];
        let d = Dataset::with_default_names(x, array![0.0, 0.0, 0.0, 0.0]).unwrap();
        let cv = cv_lasso(&d, 2, 10, 1).unwrap();
        assert!(cv.beta.iter().all(|&b| b == 0.0));
        let ada = adaptive_lasso(&d, 2, 1).unwrap();
        assert!(ada.beta_tilde.iter().all(|&b| b == 0.0));
        assert!(ada.weights.iter().all(|w| w.is_infinite()));
    }
}
