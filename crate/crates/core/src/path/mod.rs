//! Exact LASSO solution paths.
//!
//! Paths use the scale on which stationarity reads `X^T (y - X b) = lambda * sign(b)`
//! on the active set, so an orthonormal design gives `b_k(lambda) = S_lambda(b_k^LS)`.

mod cv;
mod homotopy;

pub use cv::{adaptive_lasso, cv_lasso, lambda_grid, AdaptiveFit, CvLasso, CV_GRID_SIZE};
pub use homotopy::{lasso_path, Design};

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{LocoError, Result};

/// Piecewise-linear coefficient path stored at its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPath {
    knots: Vec<f64>,
    /// `p x K`; column `k` is the solution at `knots[k]`.
    coefs: Array2<f64>,
    excluded: Vec<usize>,
    terminated_early: bool,
}

impl SolutionPath {
    /// Assembles a path from knots (strictly decreasing, non-negative) and the
    /// matching coefficient columns. The first column must be zero, as must
    /// every row listed in `excluded`.
    pub fn from_parts(
        knots: Vec<f64>,
        coefs: Array2<f64>,
        excluded: Vec<usize>,
        terminated_early: bool,
    ) -> Result<Self> {
        if knots.is_empty() {
            return Err(LocoError::InvalidConfig("path needs at least one knot".into()));
        }
        if coefs.ncols() != knots.len() {
            return Err(LocoError::DimensionMismatch(format!(
                "{} knots but {} coefficient columns",
                knots.len(),
                coefs.ncols()
            )));
        }
        if knots.iter().any(|k| !k.is_finite() || *k < 0.0) || coefs.iter().any(|v| !v.is_finite())
        {
            return Err(LocoError::NonFinite("solution path"));
        }
        if knots.windows(2).any(|w| w[0] <= w[1]) {
            return Err(LocoError::InvalidConfig("knots must be strictly decreasing".into()));
        }
        if coefs.column(0).iter().any(|&v| v != 0.0) {
            return Err(LocoError::InvalidConfig("path must start at the zero vector".into()));
        }
        let mut excluded = excluded;
        excluded.sort_unstable();
        excluded.dedup();
        for &j in &excluded {
            if j >= coefs.nrows() {
                return Err(LocoError::IndexOutOfRange { index: j, len: coefs.nrows() });
            }
            if coefs.row(j).iter().any(|&v| v != 0.0) {
                return Err(LocoError::InvalidConfig(format!("excluded coefficient {j} is nonzero")));
            }
        }
        Ok(Self { knots, coefs, excluded, terminated_early })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn coefs(&self) -> &Array2<f64> {
        &self.coefs
    }

    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub fn terminated_early(&self) -> bool {
        self.terminated_early
    }

    pub fn p(&self) -> usize {
        self.coefs.nrows()
    }

    /// Entry value of the first variable; the path is zero above it.
    pub fn lambda_max(&self) -> f64 {
        self.knots[0]
    }

    pub fn knot_coefs(&self, k: usize) -> ArrayView1<'_, f64> {
        self.coefs.column(k)
    }

    /// Locates `lambda` as `(k, w)` with the solution equal to
    /// `(1 - w) * col_k + w * col_{k+1}`; `w = 0` at and beyond the ends.
    fn locate(&self, lambda: f64) -> (usize, f64) {
        let last = self.knots.len() - 1;
        if lambda >= self.knots[0] {
            return (0, 0.0);
        }
        if lambda <= self.knots[last] {
            return (last, 0.0);
        }
        // first index with knot < lambda; knots[k-1] >= lambda > knots[k]
        let k = self.knots.partition_point(|&kn| kn >= lambda);
        let (hi, lo) = (self.knots[k - 1], self.knots[k]);
        (k - 1, (hi - lambda) / (hi - lo))
    }

    /// Coefficient `j` at `lambda`.
    pub fn coef_at(&self, j: usize, lambda: f64) -> f64 {
        let (k, w) = self.locate(lambda);
        if w == 0.0 {
            self.coefs[[j, k]]
        } else {
            (1.0 - w) * self.coefs[[j, k]] + w * self.coefs[[j, k + 1]]
        }
    }

    /// The solution at `lambda`: linear interpolation between knots, zero above
    /// the first knot and constant below the last.
    pub fn eval(&self, lambda: f64) -> Result<Array1<f64>> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(LocoError::NonFinite("lambda"));
        }
        let (k, w) = self.locate(lambda);
        if w == 0.0 {
            return Ok(self.coefs.column(k).to_owned());
        }
        let a = self.coefs.column(k);
        let b = self.coefs.column(k + 1);
        Ok(ndarray::Zip::from(&a).and(&b).map_collect(|&u, &v| (1.0 - w) * u + w * v))
    }

    /// Same coefficients with every knot multiplied by `c > 0`.
    pub fn rescale_lambda(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LocoError::InvalidConfig(format!("scale {c} must be positive")));
        }
        let knots = self.knots.iter().map(|k| k * c).collect();
        Self::from_parts(knots, self.coefs.clone(), self.excluded.clone(), self.terminated_early)
    }
}

/// Free-function form of [`SolutionPath::eval`].
pub fn eval_path(path: &SolutionPath, lambda: f64) -> Result<Array1<f64>> {
    path.eval(lambda)
}

/// `S_lambda(x) = sign(x) * max(|x| - lambda, 0)`.
pub fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}
