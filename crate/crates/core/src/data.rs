//! Regression data and hypotheses about its coefficients.

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{LocoError, Result};

/// Design matrix, response and column labels of a linear model without intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>, names: Vec<String>) -> Result<Self> {
        let (n, p) = x.dim();
        if n < 2 {
            return Err(LocoError::InvalidDataset(format!("need at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(LocoError::InvalidDataset("need at least one covariate".into()));
        }
        if y.len() != n {
            return Err(LocoError::DimensionMismatch(format!(
                "response has length {} but design has {n} rows",
                y.len()
            )));
        }
        if names.len() != p {
            return Err(LocoError::DimensionMismatch(format!(
                "{} names for {p} columns",
                names.len()
            )));
        }
        let mut seen = HashSet::with_capacity(p);
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(LocoError::InvalidDataset(format!("duplicate column name {name:?}")));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LocoError::NonFinite("design matrix"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(LocoError::NonFinite("response"));
        }
        Ok(Self { x, y, names })
    }

    /// Columns named `X1`, `X2`, ...
    pub fn with_default_names(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("X{j}")).collect();
        Self::new(x, y, names)
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.x.column(j)
    }

    /// Same design, different response.
    pub fn with_response(&self, y: Array1<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.names.clone())
    }

    /// Drops column `j`.
    pub fn without_column(&self, j: usize) -> Result<Self> {
        self.check_index(j)?;
        let keep: Vec<usize> = (0..self.p()).filter(|&k| k != j).collect();
        let x = self.x.select(Axis(1), &keep);
        let names = keep.iter().map(|&k| self.names[k].clone()).collect();
        Self::new(x, self.y.clone(), names)
    }

    /// Subtracts column means from the design and the mean from the response.
    pub fn centered(&self) -> Self {
        let mut x = self.x.clone();
        for mut col in x.columns_mut() {
            let m = col.mean().unwrap_or(0.0);
            col.mapv_inplace(|v| v - m);
        }
        let m = self.y.mean().unwrap_or(0.0);
        let y = self.y.mapv(|v| v - m);
        Self { x, y, names: self.names.clone() }
    }

    /// Scales every non-constant column to unit mean square (squared norm n).
    pub fn standardized(&self) -> Self {
        let n = self.n() as f64;
        let mut x = self.x.clone();
        for mut col in x.columns_mut() {
            let m = col.mean().unwrap_or(0.0);
            let ms = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            if ms > 0.0 {
                let s = ms.sqrt();
                col.mapv_inplace(|v| (v - m) / s);
            } else {
                col.fill(0.0);
            }
        }
        Self { x, y: self.y.clone(), names: self.names.clone() }
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.p() {
            Err(LocoError::IndexOutOfRange { index: j, len: self.p() })
        } else {
            Ok(())
        }
    }
}

/// Null hypothesis `beta_j = value_j` for every `j` in a constrained index set.
///
/// Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    constrained: Vec<usize>,
    values: Vec<f64>,
}

impl Hypothesis {
    pub fn new(constrained: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if constrained.is_empty() {
            return Err(LocoError::InvalidHypothesis("no constrained coefficients".into()));
        }
        if constrained.len() != values.len() {
            return Err(LocoError::InvalidHypothesis(format!(
                "{} indices but {} values",
                constrained.len(),
                values.len()
            )));
        }
        let mut seen = HashSet::new();
        for &j in &constrained {
            if !seen.insert(j) {
                return Err(LocoError::InvalidHypothesis(format!("index {j} repeated")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LocoError::InvalidHypothesis("non-finite hypothesized value".into()));
        }
        Ok(Self { constrained, values })
    }

    /// `beta_j = 0`.
    pub fn single_zero(j: usize) -> Self {
        Self { constrained: vec![j], values: vec![0.0] }
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn validate_for(&self, p: usize) -> Result<()> {
        match self.constrained.iter().find(|&&j| j >= p) {
            Some(&j) => Err(LocoError::InvalidHypothesis(format!(
                "index {j} out of range for {p} covariates"
            ))),
            None => Ok(()),
        }
    }

    /// `X_A beta_{0,A}`, the response offset implied by the null.
    pub fn offset(&self, data: &Dataset) -> Result<Array1<f64>> {
        self.validate_for(data.p())?;
        let mut off = Array1::zeros(data.n());
        for (&j, &v) in self.constrained.iter().zip(&self.values) {
            if v != 0.0 {
                off.scaled_add(v, &data.column(j));
            }
        }
        Ok(off)
    }
}
