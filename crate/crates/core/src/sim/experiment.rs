//! Size, power and screening experiments over simulated replicates.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baselines::{f_test, sis_rank, t_test};
use super::design::{gen_dataset, Covariance, SimDesign};
use crate::data::Hypothesis;
use crate::error::{LocoError, Result};
use crate::inference::{bootstrap_test, BootstrapConfig};
use crate::metric::NormSpec;
use crate::screening::{screen, ScreeningRule};
use crate::seed::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Loco,
    TTest,
    FTest,
    Sis,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Loco => "loco",
            Self::TTest => "t-test",
            Self::FTest => "f-test",
            Self::Sis => "sis",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Size,
    Power,
    Screening,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Size => "size",
            Self::Power => "power",
            Self::Screening => "screening",
        })
    }
}

/// Aggregated rejection (or containment) rate of one method in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub experiment: Experiment,
    pub method: Method,
    pub spec: NormSpec,
    pub n: usize,
    pub p: usize,
    pub cov: Covariance,
    pub sigma: f64,
    /// Coefficient varied along a power grid and its value in this cell.
    pub coordinate: Option<usize>,
    pub value: Option<f64>,
    pub alpha: Option<f64>,
    pub reps: usize,
    pub hits: usize,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub cell: usize,
    pub rep: usize,
    pub method: Method,
    pub statistic: f64,
    pub pvalue: Option<f64>,
    /// Rejection for tests, containment of the true support for screening.
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimResult {
    pub cells: Vec<CellSummary>,
    pub records: Vec<ReplicateRecord>,
}

impl SimResult {
    pub fn cell(&self, method: Method) -> impl Iterator<Item = &CellSummary> {
        self.cells.iter().filter(move |c| c.method == method)
    }

    fn extend(&mut self, other: SimResult) {
        self.cells.extend(other.cells);
        self.records.extend(other.records);
    }

    /// Aggregated table as comma-separated text with a header row.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "cell,experiment,method,s,t,n,p,cov,sigma,coordinate,value,alpha,reps,hits,rate,se\n",
        );
        for c in &self.cells {
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.cell,
                c.experiment,
                c.method,
                c.spec.s,
                c.spec.t,
                c.n,
                c.p,
                c.cov,
                c.sigma,
                c.coordinate.map(|j| (j + 1).to_string()).unwrap_or_default(),
                opt(c.value),
                opt(c.alpha),
                c.reps,
                c.hits,
                c.rate,
                c.se
            );
        }
        out
    }

    /// Per-replicate records as comma-separated text with a header row.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("cell,rep,method,statistic,pvalue,hit\n");
        for r in &self.records {
            let pv = r.pvalue.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{},{}", r.cell, r.rep, r.method, r.statistic, pv, r.hit);
        }
        out
    }
}

fn rate_and_se(hits: usize, reps: usize) -> (f64, f64) {
    let rate = hits as f64 / reps as f64;
    (rate, (rate * (1.0 - rate) / reps as f64).sqrt())
}

struct CellMeta {
    cell: usize,
    experiment: Experiment,
    spec: NormSpec,
    coordinate: Option<usize>,
    value: Option<f64>,
    alpha: Option<f64>,
}

fn summarize(design: &SimDesign, meta: &CellMeta, records: &[ReplicateRecord], methods: &[Method]) -> Vec<CellSummary> {
    methods
        .iter()
        .map(|&method| {
            let hits = records.iter().filter(|r| r.method == method && r.hit).count();
            let (rate, se) = rate_and_se(hits, design.reps);
            CellSummary {
                cell: meta.cell,
                experiment: meta.experiment,
                method,
                spec: meta.spec,
                n: design.n,
                p: design.p,
                cov: design.cov,
                sigma: design.sigma,
                coordinate: meta.coordinate,
                value: meta.value,
                alpha: meta.alpha,
                reps: design.reps,
                hits,
                rate,
                se,
            }
        })
        .collect()
}

/// Classical baseline used for a hypothesis when `p < n`.
fn baseline_method(design: &SimDesign, h: &Hypothesis) -> Option<Method> {
    if design.p >= design.n {
        None
    } else if h.constrained().len() == 1 && h.values()[0] == 0.0 {
        Some(Method::TTest)
    } else {
        Some(Method::FTest)
    }
}

fn test_cell(
    design: &SimDesign,
    h: &Hypothesis,
    spec: NormSpec,
    cfg: &BootstrapConfig,
    meta: CellMeta,
) -> Result<SimResult> {
    design.validate()?;
    cfg.validate()?;
    h.validate_for(design.p)?;
    let baseline = baseline_method(design, h);
    let per_rep: Vec<Vec<ReplicateRecord>> = (0..design.reps)
        .into_par_iter()
        .map(|rep| {
            let data = gen_dataset(design, rep)?;
            // Bootstrap streams depend on the replicate, not on the cell, so
            // cells that differ only in beta reuse them.
            let rep_cfg = BootstrapConfig {
                seed: seed::derive_seed(design.seed, &[tag::TEST, cfg.seed, rep as u64]),
                store_replicates: false,
                ..cfg.clone()
            };
            let out = bootstrap_test(&data, h, spec, &rep_cfg)?;
            let mut recs = vec![ReplicateRecord {
                cell: meta.cell,
                rep,
                method: Method::Loco,
                statistic: out.statistic,
                pvalue: Some(out.pvalue),
                hit: out.reject,
            }];
            if let Some(method) = baseline {
                let t = match method {
                    Method::TTest => t_test(&data, h.constrained()[0])?,
                    _ => f_test(&data, h)?,
                };
                recs.push(ReplicateRecord {
                    cell: meta.cell,
                    rep,
                    method,
                    statistic: t.statistic,
                    pvalue: Some(t.pvalue),
                    hit: t.pvalue <= cfg.alpha,
                });
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let records: Vec<ReplicateRecord> = per_rep.into_iter().flatten().collect();
    let mut methods = vec![Method::Loco];
    methods.extend(baseline);
    let cells = summarize(design, &meta, &records, &methods);
    Ok(SimResult { cells, records })
}

/// Rejection rate of the bootstrap test (and the classical baseline when
/// `p < n`) for data generated under `design`.
pub fn experiment_size(
    design: &SimDesign,
    h: &Hypothesis,
    spec: NormSpec,
    cfg: &BootstrapConfig,
) -> Result<SimResult> {
    let meta = CellMeta {
        cell: 0,
        experiment: Experiment::Size,
        spec,
        coordinate: None,
        value: None,
        alpha: Some(cfg.alpha),
    };
    test_cell(design, h, spec, cfg, meta)
}

/// Rejection rates as `beta[coordinate]` runs over `grid`, one cell per value.
pub fn experiment_power(
    design: &SimDesign,
    h: &Hypothesis,
    spec: NormSpec,
    cfg: &BootstrapConfig,
    coordinate: usize,
    grid: &[f64],
) -> Result<SimResult> {
    if coordinate >= design.p {
        return Err(LocoError::IndexOutOfRange { index: coordinate, len: design.p });
    }
    if grid.is_empty() {
        return Err(LocoError::InvalidConfig("empty power grid".into()));
    }
    let mut result = SimResult::default();
    for (cell, &value) in grid.iter().enumerate() {
        let mut d = design.clone();
        d.beta[coordinate] = value;
        let meta = CellMeta {
            cell,
            experiment: Experiment::Power,
            spec,
            coordinate: Some(coordinate),
            value: Some(value),
            alpha: Some(cfg.alpha),
        };
        result.extend(test_cell(&d, h, spec, cfg, meta)?);
    }
    Ok(result)
}

/// Proportion of replicates whose kept set contains the true support, for
/// LOCO screening and for marginal screening keeping as many variables.
pub fn experiment_screening(design: &SimDesign, rule: ScreeningRule, spec: NormSpec) -> Result<SimResult> {
    design.validate()?;
    rule.validate()?;
    let support = design.support();
    let per_rep: Vec<Vec<ReplicateRecord>> = (0..design.reps)
        .into_par_iter()
        .map(|rep| {
            let data = gen_dataset(design, rep)?;
            let report = screen(&data, spec, rule)?;
            let loco_hit = support.iter().all(|j| report.kept.contains(j));
            let sis: Vec<usize> = sis_rank(&data).into_iter().take(report.kept.len()).collect();
            let sis_hit = support.iter().all(|j| sis.contains(j));
            Ok(vec![
                ReplicateRecord {
                    cell: 0,
                    rep,
                    method: Method::Loco,
                    statistic: report.kept.len() as f64,
                    pvalue: None,
                    hit: loco_hit,
                },
                ReplicateRecord {
                    cell: 0,
                    rep,
                    method: Method::Sis,
                    statistic: sis.len() as f64,
                    pvalue: None,
                    hit: sis_hit,
                },
            ])
        })
        .collect::<Result<_>>()?;
    let records: Vec<ReplicateRecord> = per_rep.into_iter().flatten().collect();
    let meta = CellMeta {
        cell: 0,
        experiment: Experiment::Screening,
        spec,
        coordinate: None,
        value: None,
        alpha: None,
    };
    let cells = summarize(design, &meta, &records, &[Method::Loco, Method::Sis]);
    Ok(SimResult { cells, records })
}
