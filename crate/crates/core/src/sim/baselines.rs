//! Classical least-squares tests and marginal-correlation screening.

use ndarray::Axis;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::data::{Dataset, Hypothesis};
use crate::error::{LocoError, Result};
use crate::linalg::least_squares;
use crate::screening::rank_descending;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTest {
    pub statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub pvalue: f64,
}

fn require_low_dimensional(data: &Dataset) -> Result<()> {
    if data.p() >= data.n() {
        return Err(LocoError::RankDeficient(format!(
            "classical tests need p < n (p = {}, n = {})",
            data.p(),
            data.n()
        )));
    }
    Ok(())
}

/// Two-sided t-test of `beta_j = 0` in the full least-squares fit.
pub fn t_test(data: &Dataset, j: usize) -> Result<ClassicalTest> {
    data.check_index(j)?;
    require_low_dimensional(data)?;
    let fit = least_squares(&data.x().view(), data.y())
        .ok_or_else(|| LocoError::RankDeficient("design is not of full column rank".into()))?;
    let df = (data.n() - data.p()) as f64;
    let se = (fit.rss / df * fit.inv_diag[j]).sqrt();
    let coef = fit.coef[j];
    if se == 0.0 {
        let (statistic, pvalue) = if coef == 0.0 { (0.0, 1.0) } else { (f64::INFINITY, 0.0) };
        return Ok(ClassicalTest { statistic, df1: 1.0, df2: df, pvalue });
    }
    let t = coef / se;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| LocoError::InvalidConfig(e.to_string()))?;
    Ok(ClassicalTest { statistic: t, df1: 1.0, df2: df, pvalue: (2.0 * dist.sf(t.abs())).min(1.0) })
}

pub fn t_test_pvalue(data: &Dataset, j: usize) -> Result<f64> {
    Ok(t_test(data, j)?.pvalue)
}

/// Partial F-test of the linear restrictions `beta_A = beta_{0,A}`.
pub fn f_test(data: &Dataset, h: &Hypothesis) -> Result<ClassicalTest> {
    h.validate_for(data.p())?;
    require_low_dimensional(data)?;
    let rank = || LocoError::RankDeficient("design is not of full column rank".into());
    let full = least_squares(&data.x().view(), data.y()).ok_or_else(rank)?;
    let y0 = data.y() - &h.offset(data)?;
    let free: Vec<usize> = (0..data.p()).filter(|j| !h.constrained().contains(j)).collect();
    let rss_restricted = if free.is_empty() {
        y0.dot(&y0)
    } else {
        let xr = data.x().select(Axis(1), &free);
        least_squares(&xr.view(), &y0).ok_or_else(rank)?.rss
    };
    let q = h.constrained().len() as f64;
    let df = (data.n() - data.p()) as f64;
    let num = (rss_restricted - full.rss).max(0.0) / q;
    if full.rss == 0.0 {
        let (statistic, pvalue) = if num == 0.0 { (0.0, 1.0) } else { (f64::INFINITY, 0.0) };
        return Ok(ClassicalTest { statistic, df1: q, df2: df, pvalue });
    }
    let f = num / (full.rss / df);
    let dist = FisherSnedecor::new(q, df).map_err(|e| LocoError::InvalidConfig(e.to_string()))?;
    Ok(ClassicalTest { statistic: f, df1: q, df2: df, pvalue: dist.sf(f) })
}

pub fn f_test_pvalue(data: &Dataset, h: &Hypothesis) -> Result<f64> {
    Ok(f_test(data, h)?.pvalue)
}

/// Marginal scores `|x_j^T y|`.
pub fn marginal_scores(data: &Dataset) -> Vec<f64> {
    data.x().t().dot(data.y()).iter().map(|v| v.abs()).collect()
}

/// Sure-independence-screening order: descending `|x_j^T y|`, ties by index.
pub fn sis_rank(data: &Dataset) -> Vec<usize> {
    rank_descending(&marginal_scores(data))
}
