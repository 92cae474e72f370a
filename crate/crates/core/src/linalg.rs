//! Small dense linear-algebra kernels: an incrementally grown Cholesky factor
//! for active-set solves, plus least squares through the normal equations.

use ndarray::{Array1, Array2, ArrayView2, Axis};

/// Pivots whose squared value falls below this fraction of the original
/// diagonal are treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor grown one column at a time.
#[derive(Debug, Clone, Default)]
pub struct GrowingCholesky {
    /// Row `i` holds `L[i][0..=i]`.
    rows: Vec<Vec<f64>>,
}

impl GrowingCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Appends a variable with cross products `cross` against the current set
    /// and squared norm `diag`. Returns `false` (leaving the factor unchanged)
    /// when the new column is numerically in the span of the current ones.
    pub fn push(&mut self, cross: &[f64], diag: f64) -> bool {
        debug_assert_eq!(cross.len(), self.dim());
        if diag <= 0.0 {
            return false;
        }
        let z = self.forward(cross);
        let rem = diag - z.iter().map(|v| v * v).sum::<f64>();
        if rem <= RANK_TOL * diag {
            return false;
        }
        let mut row = z;
        row.push(rem.sqrt());
        self.rows.push(row);
        true
    }

    /// Solves `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut z = Vec::with_capacity(b.len());
        for (i, row) in self.rows.iter().enumerate() {
            let s: f64 = row[..i].iter().zip(&z).map(|(l, v)| l * v).sum();
            z.push((b[i] - s) / row[i]);
        }
        z
    }

    /// Solves `L L^T x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.forward(b);
        let k = self.dim();
        for i in (0..k).rev() {
            let mut s = x[i];
            for (r, row) in self.rows.iter().enumerate().skip(i + 1) {
                s -= row[i] * x[r];
            }
            x[i] = s / self.rows[i][i];
        }
        x
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix; `None`
/// when a pivot is numerically zero.
pub fn cholesky(a: &ArrayView2<f64>) -> Option<GrowingCholesky> {
    let k = a.nrows();
    let mut chol = GrowingCholesky::new();
    for j in 0..k {
        let cross: Vec<f64> = (0..j).map(|i| a[[i, j]]).collect();
        if !chol.push(&cross, a[[j, j]]) {
            return None;
        }
    }
    Some(chol)
}

/// Least-squares fit through the normal equations.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: Array1<f64>,
    pub rss: f64,
    /// Diagonal of `(X^T X)^{-1}`.
    pub inv_diag: Array1<f64>,
}

/// Solves `min ||y - X b||^2`; `None` for a rank-deficient design.
pub fn least_squares(x: &ArrayView2<f64>, y: &Array1<f64>) -> Option<LeastSquares> {
    let p = x.ncols();
    let gram = x.t().dot(x);
    let chol = cholesky(&gram.view())?;
    let xty = x.t().dot(y);
    let coef = Array1::from(chol.solve(xty.as_slice()?));
    let resid = y - &x.dot(&coef);
    let rss = resid.dot(&resid);
    let mut inv_diag = Array1::zeros(p);
    let mut e = vec![0.0; p];
    for j in 0..p {
        e[j] = 1.0;
        inv_diag[j] = chol.solve(&e)[j];
        e[j] = 0.0;
    }
    Some(LeastSquares { coef, rss, inv_diag })
}

/// Orthonormalizes the columns of `x` with two passes of modified Gram-Schmidt.
/// Returns `None` if the columns are linearly dependent.
pub fn orthonormal_columns(x: &Array2<f64>) -> Option<Array2<f64>> {
    let mut q = x.clone();
    let p = q.ncols();
    for j in 0..p {
        let orig = q.column(j).dot(&q.column(j)).sqrt();
        for _ in 0..2 {
            for k in 0..j {
                let (left, mut right) = q.view_mut().split_at(Axis(1), j);
                let qk = left.column(k);
                let proj = qk.dot(&right.column(0));
                right.column_mut(0).scaled_add(-proj, &qk);
            }
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        if !(norm > 1e-10 * orig.max(f64::MIN_POSITIVE)) {
            return None;
        }
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Some(q)
}
