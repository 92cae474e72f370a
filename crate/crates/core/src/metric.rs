//! Exact `||.||_{s,t}` functionals of differences between piecewise-linear
//! paths, and the LOCO statistics built on them.
//!
//! For a path difference `d(lambda)` in `R^p`, the inner norm integrates
//! `|d_k|^s` over `lambda in (0, inf)` (or takes the supremum for `s = inf`),
//! and the outer norm combines the `p` inner values with exponent `t`.
//! Both paths are affine on every interval of their merged knot set, so each
//! piece integrates in closed form.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Hypothesis};
use crate::error::{LocoError, Result};
use crate::path::{Design, SolutionPath};

/// Supported norm exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exponent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl FromStr for Exponent {
    type Err = LocoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "inf" | "infinity" | "∞" => Ok(Self::Inf),
            other => Err(LocoError::InvalidNorm(format!(
                "unsupported exponent {other:?} (expected 1, 2 or inf)"
            ))),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::One => "1",
            Self::Two => "2",
            Self::Inf => "inf",
        })
    }
}

/// Inner (`s`, over lambda) and outer (`t`, over coordinates) exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: Exponent,
    pub t: Exponent,
}

impl NormSpec {
    pub const fn new(s: Exponent, t: Exponent) -> Self {
        Self { s, t }
    }

    pub const L11: NormSpec = NormSpec::new(Exponent::One, Exponent::One);
    pub const L22: NormSpec = NormSpec::new(Exponent::Two, Exponent::Two);
    pub const LINF: NormSpec = NormSpec::new(Exponent::Inf, Exponent::Inf);
}

impl Default for NormSpec {
    fn default() -> Self {
        Self::L11
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.s, self.t)
    }
}

/// Power of the integrand in [`segment_abs_power_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Power {
    Abs,
    Square,
}

/// Integral of `|f|^q` for `f` affine on an interval of length `h` with end
/// values `f0` and `f1`.
fn affine_integral(f0: f64, f1: f64, h: f64, q: Power) -> f64 {
    match q {
        Power::Square => h * (f0 * f0 + f0 * f1 + f1 * f1) / 3.0,
        Power::Abs => {
            let (a0, a1) = (f0.abs(), f1.abs());
            if (f0 >= 0.0) == (f1 >= 0.0) || a0 == 0.0 || a1 == 0.0 {
                h * (a0 + a1) / 2.0
            } else {
                // two triangles meeting at the root
                h * (f0 * f0 + f1 * f1) / (2.0 * (a0 + a1))
            }
        }
    }
}

/// Exact `int_lo^hi |a + b*lambda|^q d lambda` for `q` in {1, 2}.
pub fn segment_abs_power_integral(a: f64, b: f64, lo: f64, hi: f64, q: Power) -> f64 {
    affine_integral(a + b * lo, a + b * hi, hi - lo, q)
}

/// Descending union of the knot sets of two paths over the same coefficients.
pub fn merged_knots(p1: &SolutionPath, p2: &SolutionPath) -> Result<Vec<f64>> {
    if p1.p() != p2.p() {
        return Err(LocoError::DimensionMismatch(format!(
            "paths over {} and {} coefficients",
            p1.p(),
            p2.p()
        )));
    }
    let (a, b) = (p1.knots(), p2.knots());
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x > y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y > x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    Ok(out)
}

fn outer_norm(values: impl Iterator<Item = f64>, t: Exponent) -> f64 {
    match t {
        Exponent::One => values.sum(),
        Exponent::Two => values.map(|v| v * v).sum::<f64>().sqrt(),
        Exponent::Inf => values.fold(0.0, f64::max),
    }
}

/// Per-coordinate inner norms `||beta1_k - beta2_k||_s` of the difference of
/// two paths over `lambda in (0, inf)`.
pub fn coordinate_norms(p1: &SolutionPath, p2: &SolutionPath, s: Exponent) -> Result<Array1<f64>> {
    let mut points = merged_knots(p1, p2)?;
    if points.last().is_some_and(|&l| l > 0.0) {
        points.push(0.0);
    }
    let p = p1.p();
    let mut acc = Array1::<f64>::zeros(p);
    // Both paths vanish at and above the largest knot.
    let mut prev = Array1::<f64>::zeros(p);
    let mut prev_lambda = points[0];
    for &lam in &points[1..] {
        let cur = p1.eval(lam)? - p2.eval(lam)?;
        let h = prev_lambda - lam;
        for k in 0..p {
            let (f0, f1) = (prev[k], cur[k]);
            acc[k] = match s {
                Exponent::One => acc[k] + affine_integral(f0, f1, h, Power::Abs),
                Exponent::Two => acc[k] + affine_integral(f0, f1, h, Power::Square),
                Exponent::Inf => acc[k].max(f0.abs()).max(f1.abs()),
            };
        }
        prev = cur;
        prev_lambda = lam;
    }
    if s == Exponent::Two {
        acc.mapv_inplace(f64::sqrt);
    }
    Ok(acc)
}

/// `||p1 - p2||_{s,t}`.
pub fn path_distance(p1: &SolutionPath, p2: &SolutionPath, spec: NormSpec) -> Result<f64> {
    let inner = coordinate_norms(p1, p2, spec.s)?;
    Ok(outer_norm(inner.iter().copied(), spec.t))
}

/// LOCO path statistic `T_j(s,t)`: distance between the full path and the
/// path refitted with coefficient `j` held at zero.
pub fn loco_statistic(data: &Dataset, j: usize, spec: NormSpec) -> Result<f64> {
    data.check_index(j)?;
    let design = Design::auto(data.x().view());
    let full = design.path(data.y().view(), &[])?;
    let loco = design.path(data.y().view(), &[j])?;
    path_distance(&full, &loco, spec)
}

/// `T_j(s,t)` for every covariate, sharing one full path.
pub fn loco_statistics(data: &Dataset, spec: NormSpec) -> Result<Vec<f64>> {
    let design = Design::auto(data.x().view());
    let y = data.y().view();
    let full = design.path(y, &[])?;
    let exact_shortcut = !full.terminated_early();
    (0..data.p())
        .into_par_iter()
        .map(|j| {
            // A coefficient that stays zero along a complete full path leaves it unchanged.
            if exact_shortcut && full.coefs().row(j).iter().all(|&v| v == 0.0) {
                return Ok(0.0);
            }
            let loco = design.path(y, &[j])?;
            path_distance(&full, &loco, spec)
        })
        .collect()
}

/// Statistic `T_0(s,t)` comparing the full path with the path constrained by
/// the null: coefficients in the hypothesis set excluded and the response
/// offset by `X_A beta_{0,A}`.
pub fn null_statistic(data: &Dataset, h: &Hypothesis, spec: NormSpec) -> Result<f64> {
    let offset = h.offset(data)?;
    let design = Design::auto(data.x().view());
    let full = design.path(data.y().view(), &[])?;
    let y0 = data.y() - &offset;
    let constrained = design.path(y0.view(), h.constrained())?;
    path_distance(&full, &constrained, spec)
}

/// Raw and sum-normalized LOCO importances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub spec: NormSpec,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Set when every raw statistic is zero; `normalized` is then all zero.
    pub degenerate: bool,
    /// Permutation intervals on the normalized scale, when requested.
    pub intervals: Option<Vec<(f64, f64)>>,
}

impl ImportanceReport {
    pub fn from_raw(raw: Vec<f64>, spec: NormSpec) -> Self {
        let total: f64 = raw.iter().sum();
        let degenerate = !(total > 0.0);
        let normalized = if degenerate {
            vec![0.0; raw.len()]
        } else {
            raw.iter().map(|r| r / total).collect()
        };
        Self { spec, raw, normalized, degenerate, intervals: None }
    }

    pub fn total(&self) -> f64 {
        self.raw.iter().sum()
    }

    /// Indices by descending importance, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.raw.len()).collect();
        idx.sort_by(|&a, &b| self.raw[b].total_cmp(&self.raw[a]).then(a.cmp(&b)));
        idx
    }
}

/// `T_j / sum_k T_k` for every covariate.
pub fn normalized_importance(data: &Dataset, spec: NormSpec) -> Result<ImportanceReport> {
    Ok(ImportanceReport::from_raw(loco_statistics(data, spec)?, spec))
}
