//! Least-angle regression with the lasso modification.
//!
//! Tracks the active set from the entry of the first variable down to
//! `lambda = 0`, recording a knot whenever a variable enters or leaves.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::SolutionPath;
use crate::data::Dataset;
use crate::error::{LocoError, Result};
use crate::linalg::GrowingCholesky;

/// Relative gap (in units of the first knot) under which two events are
/// treated as simultaneous.
const TIE_TOL: f64 = 1e-12;
/// Denominators of entry times smaller than this are treated as "never".
const DEN_TOL: f64 = 1e-12;

/// A fixed design matrix, optionally with its Gram matrix precomputed so that
/// many paths over different responses (bootstrap replicates, LOCO fits)
/// share the `O(n p^2)` setup.
#[derive(Debug, Clone)]
pub struct Design<'a> {
    x: ArrayView2<'a, f64>,
    gram: Option<Array2<f64>>,
}

impl<'a> Design<'a> {
    pub fn new(x: ArrayView2<'a, f64>) -> Self {
        Self { x, gram: None }
    }

    pub fn with_gram(x: ArrayView2<'a, f64>) -> Self {
        let gram = x.t().dot(&x);
        Self { x, gram: Some(gram) }
    }

    /// Precomputes the Gram matrix when `p` is small enough for it to pay off.
    pub fn auto(x: ArrayView2<'a, f64>) -> Self {
        if x.ncols() <= 2000 {
            Self::with_gram(x)
        } else {
            Self::new(x)
        }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> ArrayView2<'a, f64> {
        self.x
    }

    fn cross(&self, i: usize, j: usize) -> f64 {
        match &self.gram {
            Some(g) => g[[i, j]],
            None => self.x.column(i).dot(&self.x.column(j)),
        }
    }

    /// `X^T X_A w`.
    fn equiangular_correlations(&self, active: &[usize], w: &[f64]) -> Array1<f64> {
        match &self.gram {
            Some(g) => {
                let mut a = Array1::zeros(self.p());
                for (&k, &wk) in active.iter().zip(w) {
                    a.scaled_add(wk, &g.row(k));
                }
                a
            }
            None => {
                let mut u = Array1::zeros(self.n());
                for (&k, &wk) in active.iter().zip(w) {
                    u.scaled_add(wk, &self.x.column(k));
                }
                self.x.t().dot(&u)
            }
        }
    }

    /// Exact homotopy path for response `y` with the coefficients in
    /// `excluded` held at zero.
    pub fn path(&self, y: ArrayView1<f64>, excluded: &[usize]) -> Result<SolutionPath> {
        let (n, p) = (self.n(), self.p());
        if y.len() != n {
            return Err(LocoError::DimensionMismatch(format!(
                "response length {} for {n} rows",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(LocoError::NonFinite("response"));
        }
        let mut is_excluded = vec![false; p];
        for &j in excluded {
            if j >= p {
                return Err(LocoError::IndexOutOfRange { index: j, len: p });
            }
            is_excluded[j] = true;
        }
        let n_free = is_excluded.iter().filter(|e| !**e).count();
        let excluded_list: Vec<usize> = (0..p).filter(|&j| is_excluded[j]).collect();

        let mut corr = self.x.t().dot(&y);
        let lam_max = (0..p)
            .filter(|&j| !is_excluded[j])
            .map(|j| corr[j].abs())
            .fold(0.0_f64, f64::max);
        if lam_max <= 0.0 {
            return SolutionPath::from_parts(vec![0.0], Array2::zeros((p, 1)), excluded_list, false);
        }

        let tie = TIE_TOL * lam_max;
        let cap = (n - 1).min(n_free);
        let max_steps = 8 * (n + p) + 64;

        let mut tracker = ActiveSet::new(p);
        let mut beta = Array1::<f64>::zeros(p);
        let mut lambda = lam_max;
        let mut knots = vec![lam_max];
        let mut cols: Vec<Array1<f64>> = vec![beta.clone()];
        let mut terminated_early = false;
        let mut just_dropped: Option<usize> = None;

        // Variables tied at the first knot enter together, lowest index first.
        let first: Vec<usize> = (0..p)
            .filter(|&j| !is_excluded[j] && corr[j].abs() >= lam_max - tie)
            .collect();
        for j in first {
            if tracker.len() < cap {
                tracker.try_enter(self, j, corr[j].signum());
            }
        }

        let mut steps = 0;
        loop {
            steps += 1;
            if tracker.is_empty() || steps > max_steps {
                terminated_early = true;
                break;
            }
            let w = tracker.chol.solve(&tracker.signs);
            let a = self.equiangular_correlations(&tracker.vars, &w);

            // Earliest sign change among active coefficients.
            let mut gamma_drop = f64::INFINITY;
            let mut drops: Vec<usize> = Vec::new();
            for (pos, &k) in tracker.vars.iter().enumerate() {
                if beta[k] == 0.0 || w[pos] == 0.0 || beta[k] * w[pos] > 0.0 {
                    continue;
                }
                let g = -beta[k] / w[pos];
                if g < gamma_drop - tie {
                    gamma_drop = g;
                    drops.clear();
                    drops.push(pos);
                } else if (g - gamma_drop).abs() <= tie {
                    gamma_drop = gamma_drop.min(g);
                    drops.push(pos);
                }
            }

            // Earliest entry of an inactive variable.
            let mut gamma_entry = f64::INFINITY;
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for j in 0..p {
                if is_excluded[j] || tracker.contains(j) || tracker.skipped[j] {
                    continue;
                }
                // A variable that just left the set may re-enter later, not at once.
                let floor = if just_dropped == Some(j) { tie } else { f64::NEG_INFINITY };
                let mut g = f64::INFINITY;
                for (num, den) in [(lambda - corr[j], 1.0 - a[j]), (lambda + corr[j], 1.0 + a[j])] {
                    if den > DEN_TOL {
                        let root = (num / den).max(0.0);
                        if root > floor {
                            g = g.min(root);
                        }
                    }
                }
                if !g.is_finite() {
                    continue;
                }
                if g < gamma_entry - tie {
                    gamma_entry = g;
                    entries.clear();
                    entries.push((j, g));
                } else if (g - gamma_entry).abs() <= tie {
                    entries.push((j, g));
                }
            }
            entries.retain(|&(_, g)| g <= gamma_entry + tie);

            let gamma_end = lambda;
            let ends = gamma_end <= gamma_drop.min(gamma_entry) + tie;
            let drop_first = !ends && gamma_drop <= gamma_entry + tie;

            let gamma = if ends {
                gamma_end
            } else if drop_first {
                gamma_drop
            } else {
                gamma_entry
            };
            if !gamma.is_finite() || gamma < 0.0 {
                terminated_early = true;
                break;
            }
            // Snap negligible moves to zero so knots stay strictly decreasing.
            let gamma = if gamma <= tie && !ends { 0.0 } else { gamma };

            if gamma > 0.0 {
                for (&k, &wk) in tracker.vars.iter().zip(&w) {
                    beta[k] += gamma * wk;
                }
                corr.scaled_add(-gamma, &a);
                lambda = if ends { 0.0 } else { lambda - gamma };
            }
            just_dropped = None;

            if ends {
                push_knot(&mut knots, &mut cols, lambda, &beta);
                break;
            }

            if drop_first {
                let mut dropped: Vec<usize> = drops.iter().map(|&pos| tracker.vars[pos]).collect();
                dropped.sort_unstable();
                for &k in &dropped {
                    beta[k] = 0.0;
                }
                tracker.remove(self, &dropped);
                just_dropped = dropped.first().copied().filter(|_| dropped.len() == 1);
                push_knot(&mut knots, &mut cols, lambda, &beta);
                continue;
            }

            if tracker.len() >= cap {
                // Another variable would enter a saturated active set.
                push_knot(&mut knots, &mut cols, lambda, &beta);
                terminated_early = true;
                break;
            }
            entries.sort_unstable_by_key(|&(j, _)| j);
            for (j, _) in entries {
                if tracker.len() >= cap {
                    break;
                }
                let sign = if corr[j] != 0.0 { corr[j].signum() } else { 1.0 };
                tracker.try_enter(self, j, sign);
            }
            push_knot(&mut knots, &mut cols, lambda, &beta);
        }

        let k = knots.len();
        let mut coefs = Array2::zeros((p, k));
        for (c, col) in cols.iter().enumerate() {
            coefs.column_mut(c).assign(col);
        }
        SolutionPath::from_parts(knots, coefs, excluded_list, terminated_early)
    }
}

/// Appends a knot, or overwrites the last one when no progress in `lambda`
/// was made (simultaneous events).
fn push_knot(knots: &mut Vec<f64>, cols: &mut Vec<Array1<f64>>, lambda: f64, beta: &Array1<f64>) {
    let last = knots.len() - 1;
    if lambda < knots[last] {
        knots.push(lambda);
        cols.push(beta.clone());
    } else if last > 0 {
        cols[last].assign(beta);
    }
}

struct ActiveSet {
    vars: Vec<usize>,
    signs: Vec<f64>,
    member: Vec<bool>,
    /// Variables refused for numerical rank deficiency since the last drop.
    skipped: Vec<bool>,
    chol: GrowingCholesky,
}

impl ActiveSet {
    fn new(p: usize) -> Self {
        Self {
            vars: Vec::new(),
            signs: Vec::new(),
            member: vec![false; p],
            skipped: vec![false; p],
            chol: GrowingCholesky::new(),
        }
    }

    fn len(&self) -> usize {
        self.vars.len()
    }

    fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    fn contains(&self, j: usize) -> bool {
        self.member[j]
    }

    fn try_enter(&mut self, design: &Design, j: usize, sign: f64) -> bool {
        let cross: Vec<f64> = self.vars.iter().map(|&k| design.cross(k, j)).collect();
        if self.chol.push(&cross, design.cross(j, j)) {
            self.vars.push(j);
            self.signs.push(sign);
            self.member[j] = true;
            true
        } else {
            self.skipped[j] = true;
            false
        }
    }

    fn remove(&mut self, design: &Design, dropped: &[usize]) {
        let kept: Vec<(usize, f64)> = self
            .vars
            .iter()
            .zip(&self.signs)
            .filter(|(k, _)| !dropped.contains(k))
            .map(|(&k, &s)| (k, s))
            .collect();
        for &k in dropped {
            self.member[k] = false;
        }
        self.skipped.iter_mut().for_each(|s| *s = false);
        self.vars.clear();
        self.signs.clear();
        self.chol = GrowingCholesky::new();
        for (k, s) in kept {
            let cross: Vec<f64> = self.vars.iter().map(|&v| design.cross(v, k)).collect();
            if self.chol.push(&cross, design.cross(k, k)) {
                self.vars.push(k);
                self.signs.push(s);
            } else {
                self.member[k] = false;
                self.skipped[k] = true;
            }
        }
    }
}

/// Exact LASSO homotopy path of `data` with coefficients in `excluded` fixed
/// at zero, fitted to `y - offset` when an offset is given.
pub fn lasso_path(
    data: &Dataset,
    excluded: &[usize],
    offset: Option<&Array1<f64>>,
) -> Result<SolutionPath> {
    let design = Design::new(data.x().view());
    match offset {
        None => design.path(data.y().view(), excluded),
        Some(off) => {
            if off.len() != data.n() {
                return Err(LocoError::DimensionMismatch(format!(
                    "offset length {} for {} rows",
                    off.len(),
                    data.n()
                )));
            }
            if off.iter().any(|v| !v.is_finite()) {
                return Err(LocoError::NonFinite("offset"));
            }
            let y = data.y() - off;
            design.path(y.view(), excluded)
        }
    }
}
