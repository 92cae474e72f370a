//! Command-line front end: CSV ingestion, argument parsing and report
//! rendering for importance, tests, screening and simulation runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use locopath::inference::initial_fit;
use locopath::seed::{self, tag};
use locopath::sim::{experiment_power, experiment_screening, experiment_size, Covariance, SimDesign, SimResult};
use locopath::{
    bootstrap_test, normalized_importance, permutation_intervals, screen, BootstrapConfig, Dataset, Exponent,
    Hypothesis, InitialEstimator, LocoError, NormSpec, ScreeningRule, TestOutcome,
};
use ndarray::{Array1, Array2};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error(transparent)]
    Loco(#[from] LocoError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Clap(e) => e.exit_code(),
            Self::Usage(_) => 2,
            Self::Data(_) | Self::Loco(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "locopath", version, about = "LOCO LASSO-path importance, tests and screening")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Normalized LOCO importance of every covariate.
    Importance(ImportanceArgs),
    /// Residual-bootstrap test of a (possibly simultaneous) null hypothesis.
    Test(TestArgs),
    /// Keep covariates by threshold or top-K on the LOCO statistics.
    Screen(ScreenArgs),
    /// Monte-Carlo size, power or screening experiments.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// CSV file with a header row.
    input: PathBuf,
    /// Name of the response column; every other column is a covariate.
    #[arg(long, default_value = "y")]
    response: String,
    /// Center and scale covariates to unit mean square.
    #[arg(long)]
    standardize: bool,
    /// Center covariates and response.
    #[arg(long)]
    center: bool,
}

#[derive(Debug, Args)]
struct NormArgs {
    /// Inner exponent over lambda: 1, 2 or inf.
    #[arg(long, default_value = "1")]
    s: Exponent,
    /// Outer exponent over coordinates: 1, 2 or inf.
    #[arg(long, default_value = "1")]
    t: Exponent,
}

#[derive(Debug, Args)]
struct BootArgs {
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 500)]
    b: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Master seed; every random stream is derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cross-validation folds for the initial estimator.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Resample raw rather than mean-centered residuals.
    #[arg(long)]
    no_center_residuals: bool,
    #[arg(long, value_enum, default_value_t = InitialArg::AdaptiveLasso)]
    initial: InitialArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitialArg {
    AdaptiveLasso,
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct ImportanceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    norm: NormArgs,
    #[command(flatten)]
    boot: BootArgs,
    /// Bootstrap p-values for every covariate with positive importance.
    #[arg(long)]
    pvalues: bool,
    /// Permutations per covariate for importance intervals (0 disables).
    #[arg(long = "perm", default_value_t = 0)]
    perm: usize,
    /// Coverage of the permutation intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    norm: NormArgs,
    #[command(flatten)]
    boot: BootArgs,
    /// Null hypothesis as 1-based `index=value` pairs, e.g. "1=1,11=0,12=0".
    #[arg(long)]
    null: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    norm: NormArgs,
    /// Keep the K largest statistics.
    #[arg(long, conflicts_with = "threshold")]
    topk: Option<usize>,
    /// Keep statistics strictly above this value (default 0).
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Size,
    Power,
    Screening,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    experiment: ExperimentKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Leading coefficients, comma separated; the rest are zero.
    #[arg(long, default_value = "")]
    beta: String,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// identity, ar1:<rho> or equicorr:<rho>.
    #[arg(long, default_value = "identity")]
    cov: String,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[command(flatten)]
    norm: NormArgs,
    #[command(flatten)]
    boot: BootArgs,
    /// Null hypothesis for size and power experiments.
    #[arg(long, default_value = "1=0")]
    null: String,
    /// 1-based coefficient varied by a power experiment.
    #[arg(long, default_value_t = 1)]
    coordinate: usize,
    /// Values of the varied coefficient.
    #[arg(long, default_value = "0,0.2,0.4,0.6,0.8,1")]
    grid: String,
    /// Screening rule: keep the K largest (default n - 1).
    #[arg(long, conflicts_with = "threshold")]
    topk: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Also write per-replicate records as CSV.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Also write the aggregated table as CSV.
    #[arg(long)]
    cells: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Input data location and preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSource {
    pub input: PathBuf,
    pub response: String,
    pub standardize: bool,
    pub center: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermConfig {
    pub m: usize,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Importance { data: DataSource, spec: NormSpec, boot: BootstrapConfig, pvalues: bool, perm: Option<PermConfig> },
    Test { data: DataSource, spec: NormSpec, boot: BootstrapConfig, hypothesis: Hypothesis },
    Screen { data: DataSource, spec: NormSpec, rule: ScreeningRule },
    Simulate(SimulateConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub experiment: ExperimentKind,
    pub design: SimDesign,
    pub spec: NormSpec,
    pub boot: BootstrapConfig,
    pub hypothesis: Hypothesis,
    pub coordinate: usize,
    pub grid: Vec<f64>,
    pub rule: Option<ScreeningRule>,
    pub records: Option<PathBuf>,
    pub cells: Option<PathBuf>,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Format,
}

/// Parses 1-based `index=value` pairs into a zero-based hypothesis.
pub fn parse_hypothesis(text: &str) -> Result<Hypothesis> {
    let bad = |why: String| CliError::Usage(format!("malformed hypothesis {text:?}: {why}"));
    let mut idx = Vec::new();
    let mut vals = Vec::new();
    for part in text.split(',').map(str::trim) {
        let (i, v) = part.split_once('=').ok_or_else(|| bad(format!("{part:?} is not index=value")))?;
        let i: usize = i.trim().parse().map_err(|_| bad(format!("bad index {i:?}")))?;
        if i == 0 {
            return Err(bad("indices are 1-based".into()));
        }
        let v: f64 = v.trim().parse().map_err(|_| bad(format!("bad value {v:?}")))?;
        idx.push(i - 1);
        vals.push(v);
    }
    Hypothesis::new(idx, vals).map_err(|e| bad(e.to_string()))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Usage(format!("bad {what} entry {s:?}"))))
        .collect()
}

fn usage<T>(r: locopath::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

fn data_source(a: DataArgs) -> DataSource {
    DataSource { input: a.input, response: a.response, standardize: a.standardize, center: a.center }
}

fn boot_config(a: &BootArgs) -> Result<BootstrapConfig> {
    let cfg = BootstrapConfig {
        b: a.b,
        alpha: a.alpha,
        seed: a.seed,
        folds: a.folds,
        center_residuals: !a.no_center_residuals,
        initial: match a.initial {
            InitialArg::AdaptiveLasso => InitialEstimator::AdaptiveLasso,
            InitialArg::LeastSquares => InitialEstimator::LeastSquares,
        },
        store_replicates: false,
    };
    usage(cfg.validate())?;
    if cfg.folds < 2 {
        return Err(CliError::Usage("need at least 2 folds".into()));
    }
    Ok(cfg)
}

fn rule_from(topk: Option<usize>, threshold: Option<f64>) -> Result<Option<ScreeningRule>> {
    let rule = match (topk, threshold) {
        (Some(k), _) => Some(ScreeningRule::TopK(k)),
        (None, Some(eps)) => Some(ScreeningRule::Threshold(eps)),
        (None, None) => None,
    };
    if let Some(r) = rule {
        usage(r.validate())?;
    }
    Ok(rule)
}

/// Parses and validates a full argument vector (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let spec = |n: &NormArgs| NormSpec::new(n.s, n.t);
    let (command, out) = match cli.command {
        CommandArgs::Importance(a) => {
            let perm = match a.perm {
                0 => None,
                1 => return Err(CliError::Usage("need at least 2 permutations".into())),
                m => Some(PermConfig { m, level: a.level }),
            };
            if !(a.level > 0.0 && a.level < 1.0) {
                return Err(CliError::Usage(format!("level {} not in (0, 1)", a.level)));
            }
            let cmd = Command::Importance {
                spec: spec(&a.norm),
                boot: boot_config(&a.boot)?,
                data: data_source(a.data),
                pvalues: a.pvalues,
                perm,
            };
            (cmd, a.out)
        }
        CommandArgs::Test(a) => {
            let cmd = Command::Test {
                spec: spec(&a.norm),
                boot: boot_config(&a.boot)?,
                hypothesis: parse_hypothesis(&a.null)?,
                data: data_source(a.data),
            };
            (cmd, a.out)
        }
        CommandArgs::Screen(a) => {
            let rule = rule_from(a.topk, a.threshold)?.unwrap_or_default();
            (Command::Screen { spec: spec(&a.norm), rule, data: data_source(a.data) }, a.out)
        }
        CommandArgs::Simulate(a) => {
            let mut beta = parse_list(&a.beta, "beta")?;
            if beta.len() > a.p {
                return Err(CliError::Usage(format!("{} coefficients for p = {}", beta.len(), a.p)));
            }
            beta.resize(a.p, 0.0);
            let cov: Covariance = usage(a.cov.parse())?;
            let design = SimDesign { n: a.n, p: a.p, beta, sigma: a.sigma, cov, reps: a.reps, seed: a.boot.seed };
            usage(design.validate())?;
            let hypothesis = parse_hypothesis(&a.null)?;
            usage(hypothesis.validate_for(a.p))?;
            if a.coordinate == 0 || a.coordinate > a.p {
                return Err(CliError::Usage(format!("coordinate {} not in 1..={}", a.coordinate, a.p)));
            }
            let grid = parse_list(&a.grid, "grid")?;
            if a.experiment == ExperimentKind::Power && grid.is_empty() {
                return Err(CliError::Usage("empty power grid".into()));
            }
            let cfg = SimulateConfig {
                experiment: a.experiment,
                design,
                spec: spec(&a.norm),
                boot: boot_config(&a.boot)?,
                hypothesis,
                coordinate: a.coordinate - 1,
                grid,
                rule: rule_from(a.topk, a.threshold)?,
                records: a.records,
                cells: a.cells,
            };
            (Command::Simulate(cfg), a.out)
        }
    };
    Ok(RunConfig { command, output: out.output, format: out.format })
}

/// Reads a CSV file with a header row. Every column other than `response`
/// becomes a covariate, in header order.
pub fn ingest_csv(path: &Path, response: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| CliError::Data(format!("header: {e}")))?.clone();
    if headers.is_empty() {
        return Err(CliError::Data("missing header row".into()));
    }
    let target = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| CliError::Data(format!("response column {response:?} not found")))?;
    let names: Vec<String> =
        headers.iter().enumerate().filter(|&(i, _)| i != target).map(|(_, h)| h.to_string()).collect();
    if names.is_empty() {
        return Err(CliError::Data("no covariate columns".into()));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                CliError::Data(format!(
                    "row {row} (line {}), column {:?}: non-numeric value {cell:?}",
                    row + 1,
                    &headers[c]
                ))
            })?;
            if c == target {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    let n = ys.len();
    if n < 2 {
        return Err(CliError::Data(format!("need at least 2 data rows, found {n}")));
    }
    let x = Array2::from_shape_vec((n, names.len()), xs).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(Dataset::new(x, Array1::from(ys), names)?)
}

/// Writes covariates then the response, with a header row.
pub fn write_csv(data: &Dataset, response: &str, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Data(e.to_string()))?;
    let io = |e: csv::Error| CliError::Data(e.to_string());
    let mut header: Vec<&str> = data.names().iter().map(String::as_str).collect();
    header.push(response);
    w.write_record(&header).map_err(io)?;
    for (row, y) in data.x().rows().into_iter().zip(data.y()) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(y.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Data(e.to_string()))
}

pub fn load(src: &DataSource) -> Result<Dataset> {
    let mut data = ingest_csv(&src.input, &src.response)?;
    if src.standardize {
        data = data.standardized();
    }
    if src.center {
        data = data.centered();
    }
    Ok(data)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceRow {
    pub rank: usize,
    /// 1-based column index.
    pub index: usize,
    pub name: String,
    pub raw: f64,
    pub importance: f64,
    pub percent: f64,
    /// Permutation interval endpoints, in percent.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pvalue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceOutput {
    pub command: &'static str,
    pub spec: NormSpec,
    pub n: usize,
    pub p: usize,
    pub total: f64,
    pub degenerate: bool,
    pub rows: Vec<ImportanceRow>,
}

/// Bootstrap configuration for the p-value of covariate `j` in an importance run.
pub fn importance_test_config(boot: &BootstrapConfig, j: usize) -> BootstrapConfig {
    BootstrapConfig { seed: seed::derive_seed(boot.seed, &[tag::TEST, j as u64]), ..boot.clone() }
}

pub fn importance(
    data: &Dataset,
    spec: NormSpec,
    boot: &BootstrapConfig,
    pvalues: bool,
    perm: Option<&PermConfig>,
) -> Result<ImportanceOutput> {
    let report = normalized_importance(data, spec)?;
    let intervals = match perm {
        Some(pc) => Some(permutation_intervals(data, spec, report.total(), pc.m, pc.level, boot.seed)?),
        None => None,
    };
    let rows = report
        .ranking()
        .into_iter()
        .enumerate()
        .map(|(rank, j)| {
            let pvalue = if pvalues && report.raw[j] > 0.0 {
                let h = Hypothesis::single_zero(j);
                Some(bootstrap_test(data, &h, spec, &importance_test_config(boot, j))?.pvalue)
            } else {
                None
            };
            Ok(ImportanceRow {
                rank: rank + 1,
                index: j + 1,
                name: data.names()[j].clone(),
                raw: report.raw[j],
                importance: report.normalized[j],
                percent: 100.0 * report.normalized[j],
                lo: intervals.as_ref().map(|iv| 100.0 * iv[j].lo),
                hi: intervals.as_ref().map(|iv| 100.0 * iv[j].hi),
                pvalue,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImportanceOutput {
        command: "importance",
        spec,
        n: data.n(),
        p: data.p(),
        total: report.total(),
        degenerate: report.degenerate,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisOutput {
    /// 1-based indices.
    pub indices: Vec<usize>,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutput {
    pub command: &'static str,
    pub spec: NormSpec,
    pub n: usize,
    pub p: usize,
    pub hypothesis: HypothesisOutput,
    pub initial: InitialEstimator,
    pub lambda_cv: f64,
    pub outcome: TestOutcome,
}

pub fn test(data: &Dataset, h: &Hypothesis, spec: NormSpec, boot: &BootstrapConfig) -> Result<TestOutput> {
    h.validate_for(data.p())?;
    let outcome = bootstrap_test(data, h, spec, boot)?;
    let fit = initial_fit(data, boot)?;
    Ok(TestOutput {
        command: "test",
        spec,
        n: data.n(),
        p: data.p(),
        hypothesis: HypothesisOutput {
            indices: h.constrained().iter().map(|j| j + 1).collect(),
            names: h.constrained().iter().map(|&j| data.names()[j].clone()).collect(),
            values: h.values().to_vec(),
        },
        initial: boot.initial,
        lambda_cv: fit.lambda_cv,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeptRow {
    pub rank: usize,
    pub index: usize,
    pub name: String,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenOutput {
    pub command: &'static str,
    pub spec: NormSpec,
    pub rule: ScreeningRule,
    pub n: usize,
    pub p: usize,
    pub kept_count: usize,
    pub kept: Vec<KeptRow>,
    /// Every statistic in column order.
    pub stats: Vec<f64>,
}

pub fn screening(data: &Dataset, spec: NormSpec, rule: ScreeningRule) -> Result<ScreenOutput> {
    let report = screen(data, spec, rule)?;
    let kept = report
        .kept
        .iter()
        .enumerate()
        .map(|(r, &j)| KeptRow { rank: r + 1, index: j + 1, name: data.names()[j].clone(), statistic: report.stats[j] })
        .collect::<Vec<_>>();
    Ok(ScreenOutput {
        command: "screen",
        spec,
        rule,
        n: data.n(),
        p: data.p(),
        kept_count: kept.len(),
        kept,
        stats: report.stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateOutput {
    pub command: &'static str,
    pub experiment: ExperimentKind,
    pub design: SimDesign,
    pub spec: NormSpec,
    pub result: SimResult,
}

pub fn simulate(cfg: &SimulateConfig) -> Result<SimulateOutput> {
    let result = match cfg.experiment {
        ExperimentKind::Size => experiment_size(&cfg.design, &cfg.hypothesis, cfg.spec, &cfg.boot)?,
        ExperimentKind::Power => {
            experiment_power(&cfg.design, &cfg.hypothesis, cfg.spec, &cfg.boot, cfg.coordinate, &cfg.grid)?
        }
        ExperimentKind::Screening => {
            let rule = cfg.rule.unwrap_or(ScreeningRule::TopK(cfg.design.n.saturating_sub(1).max(1)));
            experiment_screening(&cfg.design, rule, cfg.spec)?
        }
    };
    Ok(SimulateOutput { command: "simulate", experiment: cfg.experiment, design: cfg.design.clone(), spec: cfg.spec, result })
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "-".into())
}

/// Left-aligned first column, right-aligned rest.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = width[i]) } else { format!("{c:>w$}", w = width[i]) })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>(), &mut out);
    for r in rows {
        line(r, &mut out);
    }
    out
}

fn render_importance(o: &ImportanceOutput) -> String {
    let rows: Vec<Vec<String>> = o
        .rows
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                format!("{:.6}", r.raw),
                format!("{:.1}", r.percent),
                opt(r.lo, 1),
                opt(r.hi, 1),
                opt(r.pvalue, 3),
            ]
        })
        .collect();
    let mut s = format!("LOCO importance T{} (n = {}, p = {})\n", o.spec, o.n, o.p);
    s.push_str(&table(&["name", "raw", "percent", "lo", "hi", "pvalue"], &rows));
    s
}

fn render_test(o: &TestOutput) -> String {
    let h: Vec<String> =
        o.hypothesis.names.iter().zip(&o.hypothesis.values).map(|(n, v)| format!("{n} = {v}")).collect();
    let oc = &o.outcome;
    let mut s = String::new();
    let _ = writeln!(s, "H0: {}", h.join(", "));
    let _ = writeln!(s, "statistic T{}  {:.6}", o.spec, oc.statistic);
    let _ = writeln!(s, "critical value    {:.6}", oc.critical);
    let _ = writeln!(s, "p-value           {:.4}  (B = {})", oc.pvalue, oc.b);
    let _ = writeln!(s, "decision          {} at alpha = {}", if oc.reject { "reject" } else { "retain" }, oc.alpha);
    s
}

fn render_screen(o: &ScreenOutput) -> String {
    let rows: Vec<Vec<String>> =
        o.kept.iter().map(|r| vec![r.name.clone(), r.index.to_string(), format!("{:.6}", r.statistic)]).collect();
    let mut s = format!("kept {} of {} covariates\n", o.kept_count, o.p);
    s.push_str(&table(&["name", "index", "statistic"], &rows));
    s
}

fn render_simulate(o: &SimulateOutput) -> String {
    let rows: Vec<Vec<String>> = o
        .result
        .cells
        .iter()
        .map(|c| {
            vec![
                c.method.to_string(),
                opt(c.value, 2),
                c.reps.to_string(),
                c.hits.to_string(),
                format!("{:.3}", c.rate),
                format!("{:.3}", c.se),
            ]
        })
        .collect();
    let d = &o.design;
    let mut s = format!("{} experiment, n = {}, p = {}, cov = {}, T{}\n", o.experiment_name(), d.n, d.p, d.cov, o.spec);
    s.push_str(&table(&["method", "value", "reps", "hits", "rate", "se"], &rows));
    s
}

impl SimulateOutput {
    fn experiment_name(&self) -> &'static str {
        match self.experiment {
            ExperimentKind::Size => "size",
            ExperimentKind::Power => "power",
            ExperimentKind::Screening => "screening",
        }
    }
}

fn render<T: Serialize>(value: &T, format: Format, text: impl FnOnce(&T) -> String) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Text => text(value),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Executes a validated configuration and returns the rendered report.
pub fn execute(cfg: &RunConfig) -> Result<String> {
    match &cfg.command {
        Command::Importance { data, spec, boot, pvalues, perm } => {
            let d = load(data)?;
            render(&importance(&d, *spec, boot, *pvalues, perm.as_ref())?, cfg.format, render_importance)
        }
        Command::Test { data, spec, boot, hypothesis } => {
            let d = load(data)?;
            render(&test(&d, hypothesis, *spec, boot)?, cfg.format, render_test)
        }
        Command::Screen { data, spec, rule } => {
            let d = load(data)?;
            render(&screening(&d, *spec, *rule)?, cfg.format, render_screen)
        }
        Command::Simulate(sc) => {
            let out = simulate(sc)?;
            if let Some(path) = &sc.records {
                write_file(path, &out.result.records_csv())?;
            }
            if let Some(path) = &sc.cells {
                write_file(path, &out.result.cells_csv())?;
            }
            render(&out, cfg.format, render_simulate)
        }
    }
}

/// Runs a configuration, writing the report to its destination. Returns the
/// process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = execute(cfg).and_then(|report| match &cfg.output {
        Some(path) => write_file(path, &report),
        None => {
            print!("{report}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `argv` and runs it; the exit code of the whole process.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cfg) => run(&cfg),
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
