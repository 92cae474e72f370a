//! Variable screening by LOCO path statistics.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{LocoError, Result};
use crate::metric::{loco_statistics, NormSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningRule {
    /// Keep variables with statistic strictly above the threshold.
    Threshold(f64),
    /// Keep the `K` largest statistics.
    TopK(usize),
}

impl Default for ScreeningRule {
    fn default() -> Self {
        Self::Threshold(0.0)
    }
}

impl ScreeningRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Threshold(eps) if !(eps >= 0.0 && eps.is_finite()) => Err(LocoError::InvalidConfig(
                format!("screening threshold {eps} must be finite and non-negative"),
            )),
            Self::TopK(0) => Err(LocoError::InvalidConfig("top-K screening needs K >= 1".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub spec: NormSpec,
    pub stats: Vec<f64>,
    /// Kept indices by descending statistic, ties by ascending index.
    pub kept: Vec<usize>,
    pub rule: ScreeningRule,
}

/// Indices ordered by descending score, ties by ascending index.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Applies a rule to precomputed statistics.
pub fn apply_rule(stats: &[f64], rule: ScreeningRule) -> Result<Vec<usize>> {
    rule.validate()?;
    let order = rank_descending(stats);
    Ok(match rule {
        ScreeningRule::Threshold(eps) => order.into_iter().filter(|&j| stats[j] > eps).collect(),
        ScreeningRule::TopK(k) => order.into_iter().take(k).collect(),
    })
}

/// Computes every `T_j(s,t)` and keeps the variables selected by `rule`.
pub fn screen(data: &Dataset, spec: NormSpec, rule: ScreeningRule) -> Result<ScreeningReport> {
    rule.validate()?;
    let stats = loco_statistics(data, spec)?;
    let kept = apply_rule(&stats, rule)?;
    Ok(ScreeningReport { spec, stats, kept, rule })
}
