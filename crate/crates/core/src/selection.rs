//! Candidate grids, stepwise order search and ranked comparison tables.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagnostics::recommend_differencing;
use crate::error::{Error, Result};
use crate::estimation::forecast::forecast_uncapped;
use crate::estimation::{fit_with, FitOptions, SarimaFit, SarimaSpec, DEFAULT_STATE_CAP};
use crate::evaluation::mape;
use crate::series::{SplitSpec, TimeSeries};

pub const GROUP_AR_MA: &str = "AR/MA models";
pub const GROUP_ARMA: &str = "ARMA models";
pub const GROUP_AUTO: &str = "auto-arima";
pub const GROUP_SARIMA: &str = "SARIMA models";
pub const GROUP_EXPLICIT: &str = "explicit";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Row group as printed in the first column of ARIMA tables.
    pub group: String,
    pub spec: SarimaSpec,
}

impl Candidate {
    pub fn new(group: &str, spec: SarimaSpec) -> Self {
        Self {
            group: group.to_owned(),
            spec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaperGrid {
    Arima,
    Sarima,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    Grid(PaperGrid),
    Stepwise,
    Explicit,
}

impl CandidateSource {
    pub fn name(&self) -> &'static str {
        match self {
            CandidateSource::Grid(PaperGrid::Arima) => "paper-arima",
            CandidateSource::Grid(PaperGrid::Sarima) => "paper-sarima",
            CandidateSource::Stepwise => "stepwise",
            CandidateSource::Explicit => "explicit",
        }
    }
}

impl fmt::Display for CandidateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CandidateSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-arima" | "arima" => Ok(CandidateSource::Grid(PaperGrid::Arima)),
            "paper-sarima" | "sarima" => Ok(CandidateSource::Grid(PaperGrid::Sarima)),
            "stepwise" | "auto" => Ok(CandidateSource::Stepwise),
            "explicit" => Ok(CandidateSource::Explicit),
            _ => Err(Error::InvalidArgument(format!("unknown grid '{s}'"))),
        }
    }
}

/// An ordered, duplicate-free list of specs to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    candidates: Vec<Candidate>,
    pub source: CandidateSource,
}

impl CandidateSet {
    pub fn new(candidates: Vec<Candidate>, source: CandidateSource) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidArgument("empty candidate set".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &candidates {
            c.spec.validate(DEFAULT_STATE_CAP)?;
            if !seen.insert(c.spec) {
                return Err(Error::InvalidArgument(format!("duplicate candidate {}", c.spec)));
            }
        }
        Ok(Self { candidates, source })
    }

    pub fn single(spec: SarimaSpec) -> Result<Self> {
        Self::new(vec![Candidate::new(GROUP_EXPLICIT, spec)], CandidateSource::Explicit)
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn specs(&self) -> impl Iterator<Item = SarimaSpec> + '_ {
        self.candidates.iter().map(|c| c.spec)
    }

    /// True when any candidate has seasonal terms; selects the table layout.
    pub fn is_seasonal(&self) -> bool {
        self.candidates.iter().any(|c| c.spec.is_seasonal())
    }
}

/// The fixed model grids of the published comparison tables.
///
/// `Arima` holds the rows of the drop-missing ARIMA table (its own stepwise
/// pick included). `Sarima` is the union of the seasonal tables, in order of
/// first appearance.
pub fn paper_grid(kind: PaperGrid) -> CandidateSet {
    let rows: Vec<Candidate> = match kind {
        PaperGrid::Arima => {
            let ar_ma = [(1, 0, 0), (2, 0, 0), (1, 1, 0), (1, 2, 0), (0, 0, 1), (0, 1, 1), (0, 2, 1)];
            let arma = [(8, 0, 8), (8, 1, 8), (9, 0, 7), (9, 1, 7), (8, 0, 9), (8, 1, 9)];
            ar_ma
                .iter()
                .map(|&(p, d, q)| Candidate::new(GROUP_AR_MA, SarimaSpec::arima(p, d, q)))
                .chain(
                    arma.iter()
                        .map(|&(p, d, q)| Candidate::new(GROUP_ARMA, SarimaSpec::arima(p, d, q))),
                )
                .chain(std::iter::once(Candidate::new(GROUP_AUTO, SarimaSpec::arima(5, 1, 3))))
                .collect()
        }
        PaperGrid::Sarima => [
            (1, 0, 0, 3, 0, 6),
            (0, 0, 0, 1, 0, 1),
            (0, 0, 0, 1, 1, 1),
            (0, 0, 0, 3, 0, 6),
            (0, 0, 0, 3, 1, 6),
            (1, 0, 0, 6, 0, 2),
            (0, 0, 0, 6, 0, 2),
            (0, 0, 0, 6, 1, 2),
            (1, 0, 0, 6, 0, 3),
            (0, 0, 0, 6, 0, 3),
            (0, 0, 0, 6, 1, 3),
        ]
        .iter()
        .map(|&(p, d, q, sp, sd, sq)| {
            Candidate::new(GROUP_SARIMA, SarimaSpec::sarima(p, d, q, sp, sd, sq, 7))
        })
        .collect(),
    };
    CandidateSet::new(rows, CandidateSource::Grid(kind)).expect("static grid is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankingKey {
    #[default]
    TestMape,
    Aic,
    Bic,
}

impl RankingKey {
    pub fn name(&self) -> &'static str {
        match self {
            RankingKey::TestMape => "test_mape",
            RankingKey::Aic => "aic",
            RankingKey::Bic => "bic",
        }
    }
}

/// Metrics of one successful fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMetrics {
    pub train_mape: f64,
    /// `None` when the row was fit on the full series without a test segment.
    pub test_mape: Option<f64>,
    pub aic: f64,
    pub bic: f64,
    pub loglik: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub group: String,
    pub spec: SarimaSpec,
    /// Error message for a failed fit.
    pub outcome: std::result::Result<RowMetrics, String>,
}

impl ResultRow {
    pub fn metrics(&self) -> Option<&RowMetrics> {
        self.outcome.as_ref().ok()
    }

    fn key(&self, key: RankingKey) -> f64 {
        match (&self.outcome, key) {
            (Ok(m), RankingKey::TestMape) => m.test_mape.unwrap_or(f64::INFINITY),
            (Ok(m), RankingKey::Aic) => m.aic,
            (Ok(m), RankingKey::Bic) => m.bic,
            (Err(_), _) => f64::INFINITY,
        }
    }
}

/// Rows sorted ascending by `key`; failed fits last, ties in candidate order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedResults {
    pub rows: Vec<ResultRow>,
    pub key: RankingKey,
    pub source: CandidateSource,
    pub seasonal_layout: bool,
}

impl RankedResults {
    pub fn new(mut rows: Vec<ResultRow>, key: RankingKey, source: CandidateSource, seasonal_layout: bool) -> Self {
        rows.sort_by(|a, b| {
            a.outcome
                .is_err()
                .cmp(&b.outcome.is_err())
                .then(a.key(key).total_cmp(&b.key(key)))
        });
        Self {
            rows,
            key,
            source,
            seasonal_layout,
        }
    }

    pub fn best(&self) -> Option<&ResultRow> {
        self.rows.first().filter(|r| r.outcome.is_ok())
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn all_failed(&self) -> bool {
        self.failures() == self.rows.len()
    }

    fn header(&self) -> [&'static str; 7] {
        if self.seasonal_layout {
            ["order", "Seasonal-order", "test_MAPE", "train_MAPE", "AIC", "BIC", "converged"]
        } else {
            ["Models", "Order", "test_MAPE", "train_MAPE", "AIC", "BIC", "converged"]
        }
    }

    fn cells(&self, row: &ResultRow) -> Vec<String> {
        let (first, second) = if self.seasonal_layout {
            (
                format!("({}){}", row.spec.order_label(), row.spec.mean_note()),
                format!("({})", row.spec.seasonal_label()),
            )
        } else {
            (row.group.clone(), format!("{}{}", row.spec.order_label(), row.spec.mean_note()))
        };
        let mut cells = vec![first, second];
        match &row.outcome {
            Ok(m) => {
                cells.push(m.test_mape.map_or("-".into(), |v| format!("{v:.3}")));
                cells.push(format!("{:.3}", m.train_mape));
                cells.push(format!("{:.3}", m.aic));
                cells.push(format!("{:.3}", m.bic));
                cells.push(m.converged.to_string());
            }
            Err(e) => {
                cells.extend(["-", "-", "-", "-"].map(String::from));
                cells.push(format!("failed: {e}"));
            }
        }
        cells
    }

    /// CSV with the table's column order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        for row in &self.rows {
            w.write_record(self.cells(row))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Markdown table padded so columns line up in plain text.
    pub fn to_markdown(&self) -> String {
        let header: Vec<String> = self.header().iter().map(|s| s.to_string()).collect();
        let body: Vec<Vec<String>> = self.rows.iter().map(|r| self.cells(r)).collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].chars().count())
                    .chain(std::iter::once(header[c].len()))
                    .max()
                    .unwrap_or(3)
                    .max(3)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let mut out = line(&header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line(&rule));
        for r in &body {
            out.push_str(&line(r));
        }
        out
    }
}

/// In-sample one-step MAPE of a fit on its training series.
pub fn train_mape(fit: &SarimaFit, train: &TimeSeries) -> Result<f64> {
    let fitted = fit.fitted_values(train)?;
    let actual = train.values()?;
    mape(&actual[actual.len() - fitted.len()..], &fitted)
}

fn evaluate_one(
    candidate: &Candidate,
    train: &TimeSeries,
    test: Option<&TimeSeries>,
    options: &FitOptions,
) -> ResultRow {
    let outcome = (|| -> Result<RowMetrics> {
        let fit = fit_with(&candidate.spec, train, options)?;
        let train_mape = train_mape(&fit, train)?;
        let test_mape = match test {
            Some(test) => {
                let actual = test.values()?;
                let f = forecast_uncapped(&fit.spec, &fit.params, train, actual.len())?;
                Some(mape(&actual, &f.point)?)
            }
            None => None,
        };
        if !fit.converged {
            log::warn!("{}: optimizer did not converge", candidate.spec);
        }
        Ok(RowMetrics {
            train_mape,
            test_mape,
            aic: fit.aic,
            bic: fit.bic,
            loglik: fit.loglik,
            converged: fit.converged,
        })
    })();
    if let Err(e) = &outcome {
        log::warn!("{}: {e}", candidate.spec);
    }
    ResultRow {
        group: candidate.group.clone(),
        spec: candidate.spec,
        outcome: outcome.map_err(|e| e.to_string()),
    }
}

/// Fits every candidate on the training part and scores it on both parts.
pub fn evaluate_grid(
    series: &TimeSeries,
    split: &SplitSpec,
    candidates: &CandidateSet,
    options: &FitOptions,
) -> Result<RankedResults> {
    let train_len = split.train_len(series)?;
    evaluate_grid_at(series, train_len, candidates, options)
}

/// [`evaluate_grid`] with an explicit training length.
pub fn evaluate_grid_at(
    series: &TimeSeries,
    train_len: usize,
    candidates: &CandidateSet,
    options: &FitOptions,
) -> Result<RankedResults> {
    if train_len == 0 || train_len >= series.len() {
        return Err(Error::InvalidArgument(format!(
            "degenerate split: {train_len} of {} for training",
            series.len()
        )));
    }
    let train = series.slice(0..train_len);
    let test = series.slice(train_len..series.len());
    let rows: Vec<ResultRow> = candidates
        .candidates()
        .par_iter()
        .map(|c| evaluate_one(c, &train, Some(&test), options))
        .collect();
    let ranked = RankedResults::new(rows, RankingKey::TestMape, candidates.source, candidates.is_seasonal());
    if ranked.all_failed() {
        return Err(Error::Numerical(format!(
            "all {} candidates failed",
            candidates.len()
        )));
    }
    Ok(ranked)
}

/// Order limits for [`stepwise_search`].
#[derive(Debug, Clone)]
pub struct StepwiseConfig {
    pub max_p: usize,
    pub max_q: usize,
    pub max_seasonal_p: usize,
    pub max_seasonal_q: usize,
    /// Seasonal period; `None` restricts the search to non-seasonal models.
    pub period: Option<usize>,
    pub seasonal_d: usize,
    /// Stop after this many distinct models.
    pub max_models: usize,
    pub fit: FitOptions,
}

impl Default for StepwiseConfig {
    fn default() -> Self {
        Self {
            max_p: 5,
            max_q: 5,
            max_seasonal_p: 2,
            max_seasonal_q: 2,
            period: None,
            seasonal_d: 0,
            max_models: 94,
            fit: FitOptions::default(),
        }
    }
}

/// Stepwise AIC search in the style of Hyndman and Khandakar.
///
/// `d` is the smallest order whose ADF test rejects a unit root; `D` is
/// taken from the config. Four starting models are fit, then the search
/// repeatedly moves to the best neighbour (each order +-1, `p` and `q`
/// together, `P` and `Q` together, intercept toggled) until no neighbour
/// lowers AIC. Every evaluated model is returned ranked by AIC, without a
/// test metric.
pub fn stepwise_search(series: &TimeSeries, config: &StepwiseConfig) -> Result<RankedResults> {
    let d = recommend_differencing(series)?.spec.d;
    let (period, seasonal_d) = match config.period {
        Some(s) if s >= 2 => (s, config.seasonal_d),
        Some(1) => (1, 0),
        Some(_) => return Err(Error::InvalidArgument("period must be >= 1".into())),
        None => (1, 0),
    };
    let seasonal = period >= 2;
    let (max_sp, max_sq) = if seasonal {
        (config.max_seasonal_p, config.max_seasonal_q)
    } else {
        (0, 0)
    };
    let make = |p: usize, q: usize, sp: usize, sq: usize, intercept: bool| {
        let mut spec = SarimaSpec::sarima(p, d, q, sp, seasonal_d, sq, period);
        spec.with_intercept = intercept;
        spec
    };
    let allow_intercept = d + seasonal_d <= 1;
    let intercept0 = allow_intercept;
    let (s1, s0) = if seasonal { (1, 1) } else { (0, 0) };
    let starts = [
        make(2.min(config.max_p), 2.min(config.max_q), s1.min(max_sp), s0.min(max_sq), intercept0),
        make(0, 0, 0, 0, intercept0),
        make(1.min(config.max_p), 0, s1.min(max_sp), 0, intercept0),
        make(0, 1.min(config.max_q), 0, s0.min(max_sq), intercept0),
    ];

    let mut evaluated: Vec<(SarimaSpec, ResultRow)> = Vec::new();
    let eval = |spec: SarimaSpec, evaluated: &mut Vec<(SarimaSpec, ResultRow)>| -> Option<f64> {
        if let Some((_, row)) = evaluated.iter().find(|(s, _)| *s == spec) {
            return row.metrics().map(|m| m.aic);
        }
        if spec.validate(DEFAULT_STATE_CAP).is_err() || evaluated.len() >= config.max_models {
            return None;
        }
        let row = evaluate_one(&Candidate::new(GROUP_AUTO, spec), series, None, &config.fit);
        let aic = row.metrics().map(|m| m.aic);
        evaluated.push((spec, row));
        aic
    };

    let mut best: Option<(SarimaSpec, f64)> = None;
    for spec in starts {
        if let Some(aic) = eval(spec, &mut evaluated) {
            if best.is_none_or(|(_, b)| aic < b) {
                best = Some((spec, aic));
            }
        }
    }
    let Some(mut current) = best else {
        return Err(Error::Numerical("no starting model could be fit".into()));
    };

    loop {
        let c = current.0;
        let mut neighbours = Vec::new();
        let mut push = |p: isize, q: isize, sp: isize, sq: isize, intercept: bool| {
            let ok = p >= 0
                && q >= 0
                && sp >= 0
                && sq >= 0
                && p as usize <= config.max_p
                && q as usize <= config.max_q
                && sp as usize <= max_sp
                && sq as usize <= max_sq;
            if ok {
                neighbours.push(make(p as usize, q as usize, sp as usize, sq as usize, intercept));
            }
        };
        let (p, q, sp, sq) = (c.p as isize, c.q as isize, c.seasonal_p as isize, c.seasonal_q as isize);
        let ic = c.with_intercept;
        for delta in [-1, 1] {
            push(p + delta, q, sp, sq, ic);
            push(p, q + delta, sp, sq, ic);
            push(p + delta, q + delta, sp, sq, ic);
            if seasonal {
                push(p, q, sp + delta, sq, ic);
                push(p, q, sp, sq + delta, ic);
                push(p, q, sp + delta, sq + delta, ic);
            }
        }
        if allow_intercept {
            push(p, q, sp, sq, !ic);
        }
        let mut improved = false;
        for spec in neighbours {
            if let Some(aic) = eval(spec, &mut evaluated) {
                if aic < current.1 {
                    current = (spec, aic);
                    improved = true;
                }
            }
        }
        if !improved || evaluated.len() >= config.max_models {
            break;
        }
    }

    let source = CandidateSource::Stepwise;
    let ranked = RankedResults::new(
        evaluated.into_iter().map(|(_, r)| r).collect(),
        RankingKey::Aic,
        source,
        seasonal,
    );
    if ranked.all_failed() {
        return Err(Error::Numerical("no candidate could be fit".into()));
    }
    Ok(ranked)
}

/// The stepwise winner on `train`, as a one-row candidate set labelled
/// the way the ARIMA tables label their automatic pick.
pub fn stepwise_candidates(train: &TimeSeries, config: &StepwiseConfig) -> Result<CandidateSet> {
    let ranked = stepwise_search(train, config)?;
    let best = ranked.best().expect("search returns a successful row");
    CandidateSet::new(vec![Candidate::new(GROUP_AUTO, best.spec)], CandidateSource::Stepwise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{simulate, SarimaParams};

    #[test]
    fn grids() {
        let a = paper_grid(PaperGrid::Arima);
        assert_eq!(a.len(), 14);
        for spec in ["1,0,0", "0,2,1", "8,1,9", "5,1,3"] {
            let s: SarimaSpec = spec.parse().unwrap();
            assert!(a.specs().any(|x| x == s), "{spec}");
        }
        let s = paper_grid(PaperGrid::Sarima);
        assert_eq!(s.len(), 11);
        assert!(s.specs().any(|x| x == SarimaSpec::sarima(0, 0, 0, 6, 1, 3, 7)));
        assert!(s.is_seasonal() && !a.is_seasonal());
    }

    #[test]
    fn duplicates_rejected() {
        let c = Candidate::new("x", SarimaSpec::arima(1, 0, 0));
        assert!(CandidateSet::new(vec![c.clone(), c], CandidateSource::Explicit).is_err());
        assert!(CandidateSet::new(vec![], CandidateSource::Explicit).is_err());
    }

    fn row(spec: SarimaSpec, test: Option<f64>) -> ResultRow {
        ResultRow {
            group: "g".into(),
            spec,
            outcome: match test {
                Some(t) => Ok(RowMetrics {
                    train_mape: 1.0,
                    test_mape: Some(t),
                    aic: -t,
                    bic: t,
                    loglik: 0.0,
                    converged: true,
                }),
                None => Err("boom".into()),
            },
        }
    }

    #[test]
    fn ranking_puts_failures_last() {
        let rows = vec![
            row(SarimaSpec::arima(0, 0, 0), None),
            row(SarimaSpec::arima(1, 0, 0), Some(5.0)),
            row(SarimaSpec::arima(2, 0, 0), Some(3.0)),
        ];
        let r = RankedResults::new(rows.clone(), RankingKey::TestMape, CandidateSource::Explicit, false);
        assert_eq!(r.rows[0].spec, SarimaSpec::arima(2, 0, 0));
        assert!(r.rows[2].outcome.is_err());
        let r = RankedResults::new(rows, RankingKey::Aic, CandidateSource::Explicit, false);
        assert_eq!(r.rows[0].spec, SarimaSpec::arima(1, 0, 0));
        let md = r.to_markdown();
        assert!(md.starts_with("| Models | Order | test_MAPE"));
        assert!(md.contains("failed: boom"));
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("Models,Order,test_MAPE,train_MAPE,AIC,BIC,converged\n"));
    }

    #[test]
    fn single_candidate_grid() {
        let s = simulate(&SarimaSpec::arima(0, 0, 0), &SarimaParams::white_noise(100.0, 25.0), 200, 2)
            .unwrap();
        let set = CandidateSet::single(SarimaSpec::arima(0, 0, 0)).unwrap();
        let r = evaluate_grid(&s, &SplitSpec::Count(30), &set, &FitOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 1);
        let m = r.rows[0].metrics().unwrap();
        assert!(m.test_mape.unwrap().is_finite() && m.train_mape.is_finite());
    }

    #[test]
    fn stepwise_white_noise() {
        let s = simulate(&SarimaSpec::arima(0, 0, 0), &SarimaParams::white_noise(50.0, 1.0), 2000, 8)
            .unwrap();
        let r = stepwise_search(&s, &StepwiseConfig::default()).unwrap();
        let best = r.best().unwrap().spec;
        assert_eq!(best, SarimaSpec::arima(0, 0, 0));
        assert!(best.with_intercept);
    }
}
