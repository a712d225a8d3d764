//! Report-extract ingestion and the five imputation datasets.
//!
//! Input is a CSV whose header carries the daily report columns (date,
//! maximum demand met, shortage, energy met, drawal schedule, OD/UD, max OD,
//! energy shortage). Column names are matched ignoring case, spacing and
//! punctuation. Only the date and maximum-demand columns are required; the
//! auxiliary columns are kept on each [`RawRecord`] but never modeled.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// One parsed report row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawRecord {
    pub date: NaiveDate,
    pub max_demand_mw: Option<f64>,
    pub shortage_mw: Option<f64>,
    pub energy_met_mu: Option<f64>,
    pub drawal_schedule_mu: Option<f64>,
    pub od_ud_mu: Option<f64>,
    pub max_od_mw: Option<f64>,
    pub energy_shortage_mu: Option<f64>,
}

/// Accepts `DD/MM/YYYY` and ISO `YYYY-MM-DD`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%d/%m/%Y")
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y-%m-%d"))
        .ok()
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Date,
    MaxDemand,
    Shortage,
    EnergyMet,
    DrawalSchedule,
    OdUd,
    MaxOd,
    EnergyShortage,
}

fn classify(header: &str) -> Option<Column> {
    let h = normalize(header);
    let col = if h == "date" {
        Column::Date
    } else if h.starts_with("maxdemand") {
        Column::MaxDemand
    } else if h.starts_with("shortage") {
        Column::Shortage
    } else if h.starts_with("energymet") {
        Column::EnergyMet
    } else if h.starts_with("drawalschedule") {
        Column::DrawalSchedule
    } else if h.starts_with("odud") {
        Column::OdUd
    } else if h.starts_with("maxod") {
        Column::MaxOd
    } else if h.starts_with("energyshortage") {
        Column::EnergyShortage
    } else {
        return None;
    };
    Some(col)
}

fn parse_number(cell: &str) -> Option<f64> {
    let cleaned: String = cell.trim().chars().filter(|&c| c != ',').collect();
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses CSV report rows. Unparseable or non-positive demand cells become
/// absent demand; an unparseable date aborts with the 1-based data row.
pub fn parse_records<R: Read>(input: R) -> Result<Vec<RawRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let columns: Vec<Option<Column>> = headers.iter().map(classify).collect();
    for (required, label) in [(Column::Date, "date"), (Column::MaxDemand, "max demand")] {
        match columns.iter().filter(|c| **c == Some(required)).count() {
            1 => {}
            0 => {
                return Err(Error::MalformedHeader(format!(
                    "no {label} column in [{}]",
                    headers.iter().collect::<Vec<_>>().join(", ")
                )))
            }
            _ => return Err(Error::MalformedHeader(format!("duplicate {label} column"))),
        }
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_no,
            message: e.to_string(),
        })?;
        let mut rec = RawRecord::default();
        let mut date = None;
        for (cell, col) in row.iter().zip(&columns) {
            let Some(col) = col else { continue };
            match col {
                Column::Date => {
                    date = Some(parse_date(cell).ok_or_else(|| Error::Parse {
                        row: row_no,
                        message: format!("unparseable date '{cell}'"),
                    })?)
                }
                Column::MaxDemand => rec.max_demand_mw = parse_number(cell).filter(|v| *v > 0.0),
                Column::Shortage => rec.shortage_mw = parse_number(cell),
                Column::EnergyMet => rec.energy_met_mu = parse_number(cell),
                Column::DrawalSchedule => rec.drawal_schedule_mu = parse_number(cell),
                Column::OdUd => rec.od_ud_mu = parse_number(cell),
                Column::MaxOd => rec.max_od_mw = parse_number(cell),
                Column::EnergyShortage => rec.energy_shortage_mu = parse_number(cell),
            }
        }
        rec.date = date.ok_or_else(|| Error::Parse {
            row: row_no,
            message: "missing date cell".into(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Lays records onto a gap-explicit daily calendar spanning min..=max date.
pub fn assemble(records: &[RawRecord]) -> Result<TimeSeries> {
    if !records.iter().any(|r| r.max_demand_mw.is_some()) {
        return Err(Error::Empty);
    }
    let start = records.iter().map(|r| r.date).min().ok_or(Error::Empty)?;
    let end = records.iter().map(|r| r.date).max().ok_or(Error::Empty)?;
    let days = (end - start).num_days() as usize + 1;
    let mut values = vec![None; days];
    let mut seen = vec![false; days];
    for rec in records {
        let idx = (rec.date - start).num_days() as usize;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::DuplicateDate(rec.date));
        }
        values[idx] = rec.max_demand_mw;
    }
    TimeSeries::new(start, values)
}

/// Missing-day accounting for an assembled series.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSummary {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub calendar_days: usize,
    pub observed: usize,
    pub missing_dates: Vec<NaiveDate>,
}

impl GapSummary {
    pub fn of(series: &TimeSeries) -> Self {
        let missing_dates = series.missing_dates();
        Self {
            start: series.start(),
            end: series.end(),
            calendar_days: series.len(),
            observed: series.len() - missing_dates.len(),
            missing_dates,
        }
    }

    pub fn missing(&self) -> usize {
        self.missing_dates.len()
    }
}

/// The five dataset constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ImputationStrategy {
    Drop,
    Mean,
    Median,
    Mode,
    Interpolate,
}

impl ImputationStrategy {
    pub const ALL: [ImputationStrategy; 5] = [
        ImputationStrategy::Drop,
        ImputationStrategy::Mean,
        ImputationStrategy::Median,
        ImputationStrategy::Mode,
        ImputationStrategy::Interpolate,
    ];

    /// Human-readable dataset name.
    pub fn label(&self) -> &'static str {
        match self {
            ImputationStrategy::Drop => "dropna-dataset",
            ImputationStrategy::Mean => "mean Imputation dataset",
            ImputationStrategy::Median => "median Imputation dataset",
            ImputationStrategy::Mode => "mode Imputation dataset",
            ImputationStrategy::Interpolate => "linear-Interpolation Imputation dataset",
        }
    }

    /// Short name used for file stems and on the command line.
    pub fn key(&self) -> &'static str {
        match self {
            ImputationStrategy::Drop => "dropna",
            ImputationStrategy::Mean => "mean",
            ImputationStrategy::Median => "median",
            ImputationStrategy::Mode => "mode",
            ImputationStrategy::Interpolate => "interp",
        }
    }
}

impl fmt::Display for ImputationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ImputationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "drop" | "dropna" => ImputationStrategy::Drop,
            "mean" => ImputationStrategy::Mean,
            "median" => ImputationStrategy::Median,
            "mode" => ImputationStrategy::Mode,
            "interp" | "interpolate" | "linear" => ImputationStrategy::Interpolate,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown imputation '{other}'"
                )))
            }
        })
    }
}

/// A gap-free series produced by one imputation strategy.
///
/// `dates` holds the real calendar date of every slot. For the drop
/// strategy the series is compacted and re-indexed as consecutive days, so
/// `series.date_at(i)` is synthetic while `dates[i]` is the observation day.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub strategy: ImputationStrategy,
    pub series: TimeSeries,
    pub dates: Vec<NaiveDate>,
}

impl DatasetBundle {
    pub fn name(&self) -> &'static str {
        self.strategy.label()
    }

    /// Two-column CSV: `date,max_demand_mw`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "max_demand_mw"])?;
        for (date, value) in self.dates.iter().zip(self.series.present()) {
            w.write_record([date.to_string(), value.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Most frequent exact value, ties broken toward the smallest.
fn mode(sorted: &[f64]) -> f64 {
    let mut best = (sorted[0], 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best.1 {
            best = (sorted[i], j - i);
        }
        i = j;
    }
    best.0
}

fn interpolate(slots: &[Option<f64>]) -> Vec<f64> {
    let known: Vec<(usize, f64)> = slots
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    let mut out = Vec::with_capacity(slots.len());
    let mut k = 0;
    for (i, slot) in slots.iter().enumerate() {
        if let Some(v) = slot {
            out.push(*v);
            continue;
        }
        while k + 1 < known.len() && known[k + 1].0 < i {
            k += 1;
        }
        let (li, lv) = known[k];
        let filled = if li > i {
            lv
        } else if k + 1 < known.len() {
            let (ri, rv) = known[k + 1];
            lv + (rv - lv) * (i - li) as f64 / (ri - li) as f64
        } else {
            lv
        };
        out.push(filled);
    }
    out
}

/// Produces one dataset from a gap-explicit series.
pub fn impute(series: &TimeSeries, strategy: ImputationStrategy) -> Result<DatasetBundle> {
    let present: Vec<f64> = series.present().collect();
    if present.is_empty() {
        return Err(Error::Empty);
    }
    if present.len() < 2 {
        return Err(Error::TooShort {
            needed: 1,
            have: present.len(),
        });
    }
    let all_dates: Vec<NaiveDate> = (0..series.len()).map(|i| series.date_at(i)).collect();

    if strategy == ImputationStrategy::Drop {
        let dates = series
            .slots()
            .iter()
            .zip(&all_dates)
            .filter(|(v, _)| v.is_some())
            .map(|(_, d)| *d)
            .collect();
        return Ok(DatasetBundle {
            strategy,
            series: TimeSeries::from_values(series.start(), present)?,
            dates,
        });
    }

    let values = if strategy == ImputationStrategy::Interpolate {
        interpolate(series.slots())
    } else {
        let mut sorted = present.clone();
        sorted.sort_by(f64::total_cmp);
        let fill = match strategy {
            ImputationStrategy::Mean => present.iter().sum::<f64>() / present.len() as f64,
            ImputationStrategy::Median => median(&sorted),
            _ => mode(&sorted),
        };
        series.slots().iter().map(|v| v.unwrap_or(fill)).collect()
    };
    Ok(DatasetBundle {
        strategy,
        series: TimeSeries::from_values(series.start(), values)?,
        dates: all_dates,
    })
}

/// [`parse_records`] on a file; I/O errors name the path.
pub fn read_records(path: &Path) -> Result<Vec<RawRecord>> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    parse_records(BufReader::new(file))
}

/// Assembles the records and applies all five strategies.
pub fn build_all(records: &[RawRecord]) -> Result<Vec<DatasetBundle>> {
    let series = assemble(records)?;
    ImputationStrategy::ALL
        .iter()
        .map(|&s| impute(&series, s))
        .collect()
}
