//! Accuracy metrics and the five-dataset comparison study.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::{build_all, DatasetBundle, ImputationStrategy, RawRecord};
use crate::error::{Error, Result};
use crate::estimation::{FitOptions, SarimaSpec};
use crate::selection::{evaluate_grid_at, stepwise_candidates, CandidateSet, RankedResults, StepwiseConfig};
use crate::series::SplitSpec;

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch(actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return Err(Error::Empty);
    }
    let mut total = 0.0;
    for (i, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if *a == 0.0 {
            return Err(Error::ZeroActual(i));
        }
        total += ((a - p) / a).abs();
    }
    Ok(100.0 * total / actual.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonKind {
    OneStep,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitMetrics {
    pub mape: f64,
    pub n_points: usize,
    pub horizon_kind: HorizonKind,
}

impl FitMetrics {
    pub fn compute(actual: &[f64], predicted: &[f64], horizon_kind: HorizonKind) -> Result<Self> {
        Ok(Self {
            mape: mape(actual, predicted)?,
            n_points: actual.len(),
            horizon_kind,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Csv,
    #[default]
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}'"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        })
    }
}

/// Everything needed to reproduce a report's numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportMetadata {
    pub split: SplitSpec,
    pub seed: u64,
    pub version: String,
}

impl ReportMetadata {
    pub fn new(split: SplitSpec, seed: u64) -> Self {
        Self {
            split,
            seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }

    fn lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("tool", format!("demandcast {}", self.version)),
            ("split", self.split.to_string()),
            ("seed", self.seed.to_string()),
            ("train_mape", "one-step in-sample predictions".into()),
            ("test_mape", "dynamic forecast over the whole test segment".into()),
        ]
    }
}

/// All grids evaluated on one imputation dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetResult {
    pub strategy: ImputationStrategy,
    pub train_len: usize,
    pub test_len: usize,
    /// One entry per grid; `Err` when every fit in that grid failed.
    pub tables: Vec<std::result::Result<RankedResults, String>>,
}

impl DatasetResult {
    pub fn failed(&self) -> bool {
        self.tables.iter().all(|t| t.is_err())
    }

    /// Lowest test MAPE on this dataset across grids.
    pub fn winner(&self) -> Option<(SarimaSpec, f64)> {
        self.tables
            .iter()
            .flatten()
            .flat_map(|t| &t.rows)
            .filter_map(|r| Some((r.spec, r.metrics()?.test_mape?)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestModel {
    pub strategy: ImputationStrategy,
    pub spec: SarimaSpec,
    pub test_mape: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub metadata: ReportMetadata,
    pub datasets: Vec<DatasetResult>,
    pub best: Option<BestModel>,
}

impl StudyReport {
    fn assemble(metadata: ReportMetadata, datasets: Vec<DatasetResult>) -> Self {
        let mut best: Option<BestModel> = None;
        for ds in &datasets {
            if let Some((spec, test_mape)) = ds.winner() {
                if best.is_none_or(|b| test_mape < b.test_mape) {
                    best = Some(BestModel {
                        strategy: ds.strategy,
                        spec,
                        test_mape,
                    });
                }
            }
        }
        Self {
            metadata,
            datasets,
            best,
        }
    }

    pub fn dataset(&self, strategy: ImputationStrategy) -> Option<&DatasetResult> {
        self.datasets.iter().find(|d| d.strategy == strategy)
    }

    /// Re-checks that no row beats the recorded best model.
    pub fn check_best(&self) -> Result<()> {
        let Some(best) = self.best else {
            return Ok(());
        };
        for ds in &self.datasets {
            if let Some((spec, m)) = ds.winner() {
                if m < best.test_mape {
                    return Err(Error::Numerical(format!(
                        "{spec} on {} beats recorded best",
                        ds.strategy
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Training length for a dataset. Date splits use the real observation
/// dates so the compacted drop dataset is cut at the same day as the others.
pub fn train_len_for(bundle: &DatasetBundle, split: &SplitSpec) -> Result<usize> {
    match split {
        SplitSpec::Date(cut) => {
            let n = bundle.dates.iter().filter(|d| *d <= cut).count();
            if n == 0 || n >= bundle.dates.len() {
                return Err(Error::InvalidArgument(format!(
                    "degenerate split at {cut} for {}",
                    bundle.strategy
                )));
            }
            Ok(n)
        }
        _ => split.train_len(&bundle.series),
    }
}

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct StudyOptions {
    pub split: SplitSpec,
    pub fit: FitOptions,
    /// Restrict to these datasets; all five when empty.
    pub strategies: Vec<ImputationStrategy>,
    /// Adds a table holding each dataset's own stepwise pick, searched on
    /// its training segment.
    pub stepwise: Option<StepwiseConfig>,
}


/// Builds the imputation datasets and evaluates every grid on each.
pub fn run_study(records: &[RawRecord], grids: &[CandidateSet], options: &StudyOptions) -> Result<StudyReport> {
    let bundles = build_all(records)?;
    run_study_on(&bundles, grids, options)
}

pub fn run_study_on(bundles: &[DatasetBundle], grids: &[CandidateSet], options: &StudyOptions) -> Result<StudyReport> {
    if grids.is_empty() && options.stepwise.is_none() {
        return Err(Error::InvalidArgument("no candidate grids".into()));
    }
    let selected: Vec<&DatasetBundle> = bundles
        .iter()
        .filter(|b| options.strategies.is_empty() || options.strategies.contains(&b.strategy))
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidArgument("no datasets selected".into()));
    }
    let datasets = selected
        .par_iter()
        .map(|bundle| -> Result<DatasetResult> {
            let train_len = train_len_for(bundle, &options.split)?;
            let eval = |g: &CandidateSet| {
                evaluate_grid_at(&bundle.series, train_len, g, &options.fit).map_err(|e| e.to_string())
            };
            let mut tables: Vec<_> = grids.iter().map(eval).collect();
            if let Some(cfg) = &options.stepwise {
                let train = bundle.series.slice(0..train_len);
                tables.push(
                    stepwise_candidates(&train, cfg)
                        .map_err(|e| e.to_string())
                        .and_then(|g| eval(&g)),
                );
            }
            let result = DatasetResult {
                strategy: bundle.strategy,
                train_len,
                test_len: bundle.series.len() - train_len,
                tables,
            };
            if result.failed() {
                log::warn!("{}: every fit failed", bundle.strategy.label());
            }
            Ok(result)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyReport::assemble(
        ReportMetadata::new(options.split, options.fit.seed),
        datasets,
    ))
}

/// Renders the report. Identical reports give identical bytes.
pub fn render_report(report: &StudyReport, format: ReportFormat) -> Result<String> {
    report.check_best()?;
    match format {
        ReportFormat::Markdown => Ok(render_markdown(report)),
        ReportFormat::Csv => render_csv(report),
    }
}

fn render_markdown(report: &StudyReport) -> String {
    let mut out = String::from("# Model comparison\n\n");
    for (k, v) in report.metadata.lines() {
        out.push_str(&format!("- {k}: {v}\n"));
    }
    out.push('\n');
    match report.best {
        Some(b) => out.push_str(&format!(
            "Best overall: {} on {} (test MAPE {:.3})\n\n",
            b.spec,
            b.strategy.label(),
            b.test_mape
        )),
        None => out.push_str("Best overall: none (every fit failed)\n\n"),
    }
    out.push_str("| dataset | winner | test_MAPE |\n| --- | --- | --- |\n");
    for ds in &report.datasets {
        match ds.winner() {
            Some((spec, m)) => out.push_str(&format!("| {} | {spec} | {m:.3} |\n", ds.strategy.label())),
            None => out.push_str(&format!("| {} | failed | - |\n", ds.strategy.label())),
        }
    }
    for ds in &report.datasets {
        out.push_str(&format!(
            "\n## {}\n\ntrain {} / test {} observations\n",
            ds.strategy.label(),
            ds.train_len,
            ds.test_len
        ));
        for table in &ds.tables {
            match table {
                Ok(t) => out.push_str(&format!("\n### {}\n\n{}", t.source, t.to_markdown())),
                Err(e) => out.push_str(&format!("\ngrid failed: {e}\n")),
            }
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

fn render_csv(report: &StudyReport) -> Result<String> {
    let mut out = String::new();
    for (k, v) in report.metadata.lines() {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&csv_rows(report, None)?);
    Ok(out)
}

/// Result rows of one dataset as plain CSV, without the metadata header.
pub fn render_dataset_csv(report: &StudyReport, strategy: ImputationStrategy) -> Result<String> {
    csv_rows(report, Some(strategy))
}

fn csv_rows(report: &StudyReport, only: Option<ImputationStrategy>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset", "grid", "group", "order", "seasonal_order", "intercept", "test_mape", "train_mape", "aic",
        "bic", "loglik", "converged", "status",
    ])?;
    for ds in report.datasets.iter().filter(|d| only.is_none_or(|s| s == d.strategy)) {
        for table in ds.tables.iter().flatten() {
            for row in &table.rows {
                let m = row.metrics();
                w.write_record([
                    ds.strategy.key().to_owned(),
                    table.source.to_string(),
                    row.group.clone(),
                    row.spec.order_label(),
                    if row.spec.is_seasonal() { row.spec.seasonal_label() } else { String::new() },
                    row.spec.with_intercept.to_string(),
                    fmt_opt(m.and_then(|m| m.test_mape)),
                    fmt_opt(m.map(|m| m.train_mape)),
                    fmt_opt(m.map(|m| m.aic)),
                    fmt_opt(m.map(|m| m.bic)),
                    fmt_opt(m.map(|m| m.loglik)),
                    m.map_or(String::new(), |m| m.converged.to_string()),
                    match &row.outcome {
                        Ok(_) => "ok".into(),
                        Err(e) => format!("failed: {e}"),
                    },
                ])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::impute;
    use crate::estimation::{simulate, SarimaParams};
    use crate::selection::{Candidate, CandidateSource};

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[100.0, 200.0], &[110.0, 180.0]).unwrap(), 10.0);
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(mape(&[50.0], &[75.0]).unwrap(), 50.0);
        assert!(matches!(mape(&[1.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroActual(1))));
        assert!(matches!(mape(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch(1, 2))));
        assert!(mape(&[], &[]).is_err());
    }

    #[test]
    fn gap_free_study_is_uniform() {
        let spec = SarimaSpec::sarima(0, 0, 0, 1, 0, 0, 7);
        let params = SarimaParams {
            seasonal_phi: vec![0.6],
            ..SarimaParams::white_noise(1000.0, 400.0)
        };
        let s = simulate(&spec, &params, 400, 3).unwrap();
        let bundles: Vec<DatasetBundle> = ImputationStrategy::ALL
            .iter()
            .map(|&st| impute(&s, st).unwrap())
            .collect();
        let grid = CandidateSet::new(
            vec![
                Candidate::new("a", SarimaSpec::arima(1, 0, 0)),
                Candidate::new("b", spec),
            ],
            CandidateSource::Explicit,
        )
        .unwrap();
        let opts = StudyOptions {
            split: SplitSpec::Count(28),
            ..StudyOptions::default()
        };
        let report = run_study_on(&bundles, &[grid], &opts).unwrap();
        let first = &report.datasets[0].tables;
        assert!(report.datasets.iter().all(|d| &d.tables == first));
        assert!(report.best.unwrap().spec.is_seasonal());
        let a = render_report(&report, ReportFormat::Markdown).unwrap();
        assert_eq!(a, render_report(&report, ReportFormat::Markdown).unwrap());
        assert!(a.contains("split: count:28"));
        let c = render_report(&report, ReportFormat::Csv).unwrap();
        assert!(c.starts_with("# tool: demandcast"));
    }

    #[test]
    fn empty_grid_list_rejected() {
        assert!(run_study_on(&[], &[], &StudyOptions::default()).is_err());
    }
}
