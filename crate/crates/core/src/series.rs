//! Calendar-indexed daily series, differencing and train/test splitting.
//!
//! A [`TimeSeries`] holds one slot per calendar day starting at
//! `start`. Missing days are explicit `None` slots; nothing in this module
//! silently skips them.

use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// Evenly spaced daily series with explicit missing slots.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start: NaiveDate,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    /// Builds a series, rejecting non-finite present values.
    pub fn new(start: NaiveDate, values: Vec<Option<f64>>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| matches!(v, Some(x) if !x.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at slot {i}"
            )));
        }
        Ok(Self { start, values })
    }

    /// Builds a gap-free series.
    pub fn from_values(start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        Self::new(start, values.into_iter().map(Some).collect())
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// Date of the last slot. For an empty series this is the day before `start`.
    pub fn end(&self) -> NaiveDate {
        match self.values.len() {
            0 => self.start - Days::new(1),
            n => self.date_at(n - 1),
        }
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start + Days::new(index as u64)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slots(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn missing_dates(&self) -> Vec<NaiveDate> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| self.date_at(i))
            .collect()
    }

    /// Present values in order, skipping missing slots.
    pub fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    /// All values of a gap-free series.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|v| v.ok_or(Error::MissingValues))
            .collect()
    }

    /// Sub-series of slots `range`, keeping calendar alignment.
    pub fn slice(&self, range: std::ops::Range<usize>) -> TimeSeries {
        TimeSeries {
            start: self.date_at(range.start),
            values: self.values[range].to_vec(),
        }
    }

    /// Index of `date`, if it falls inside the series.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start).num_days();
        (offset >= 0 && (offset as usize) < self.values.len()).then_some(offset as usize)
    }
}

/// Regular and seasonal differencing orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DifferenceSpec {
    pub d: usize,
    pub seasonal_d: usize,
    pub period: usize,
}

impl DifferenceSpec {
    pub fn new(d: usize, seasonal_d: usize, period: usize) -> Result<Self> {
        let spec = Self {
            d,
            seasonal_d,
            period,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn regular(d: usize) -> Self {
        Self {
            d,
            seasonal_d: 0,
            period: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d > 2 {
            return Err(Error::InvalidArgument(format!("d = {} exceeds 2", self.d)));
        }
        if self.seasonal_d > 1 {
            return Err(Error::InvalidArgument(format!(
                "D = {} exceeds 1",
                self.seasonal_d
            )));
        }
        if self.period == 0 {
            return Err(Error::InvalidArgument("period must be >= 1".into()));
        }
        if self.seasonal_d > 0 && self.period < 2 {
            return Err(Error::InvalidArgument(
                "seasonal differencing needs period >= 2".into(),
            ));
        }
        Ok(())
    }

    /// Number of leading observations consumed by differencing.
    pub fn lag_count(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    pub fn is_identity(&self) -> bool {
        self.lag_count() == 0
    }

    /// Coefficients of `(1-B)^d (1-B^s)^D`, lowest power first.
    pub fn polynomial(&self) -> Vec<f64> {
        let mut poly = vec![1.0];
        for _ in 0..self.seasonal_d {
            let mut factor = vec![0.0; self.period + 1];
            factor[0] = 1.0;
            factor[self.period] = -1.0;
            poly = crate::estimation::polynomial::multiply(&poly, &factor);
        }
        for _ in 0..self.d {
            poly = crate::estimation::polynomial::multiply(&poly, &[1.0, -1.0]);
        }
        poly
    }
}

/// Output of [`difference`]: the shorter series plus the values needed to
/// invert it.
#[derive(Debug, Clone, PartialEq)]
pub struct Differenced {
    pub series: TimeSeries,
    pub initial_values: Vec<f64>,
}

fn difference_at_lag(values: &[f64], lag: usize) -> Vec<f64> {
    values.windows(lag + 1).map(|w| w[lag] - w[0]).collect()
}

/// Plain-slice differencing, seasonal first then regular.
pub fn difference_values(values: &[f64], spec: &DifferenceSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let needed = spec.lag_count();
    if values.len() <= needed {
        return Err(Error::TooShort {
            needed,
            have: values.len(),
        });
    }
    let mut out = values.to_vec();
    for _ in 0..spec.seasonal_d {
        out = difference_at_lag(&out, spec.period);
    }
    for _ in 0..spec.d {
        out = difference_at_lag(&out, 1);
    }
    Ok(out)
}

/// Applies `(1-B^s)^D` and then `(1-B)^d`.
pub fn difference(series: &TimeSeries, spec: &DifferenceSpec) -> Result<Differenced> {
    let values = series.values()?;
    let out = difference_values(&values, spec)?;
    let lags = spec.lag_count();
    Ok(Differenced {
        series: TimeSeries::from_values(series.date_at(lags), out)?,
        initial_values: values[..lags].to_vec(),
    })
}

/// Continues the undifferenced series past `history` given new differenced
/// values. Only the last `lag_count` entries of `history` are used.
pub fn integrate_values(
    history: &[f64],
    differenced: &[f64],
    spec: &DifferenceSpec,
) -> Result<Vec<f64>> {
    let lags = spec.lag_count();
    if history.len() < lags {
        return Err(Error::InvalidArgument(format!(
            "integration needs {lags} initial values, got {}",
            history.len()
        )));
    }
    // Undo one factor at a time, last applied first. Each stage is a plain
    // running sum at its own scale, which keeps rounding error far below
    // what the expanded polynomial recursion accumulates.
    let mut stages: Vec<usize> = vec![spec.period; spec.seasonal_d];
    stages.extend(std::iter::repeat_n(1, spec.d));
    let mut levels: Vec<Vec<f64>> = vec![history[history.len() - lags..].to_vec()];
    for &lag in &stages {
        let next = difference_at_lag(levels.last().expect("non-empty"), lag);
        levels.push(next);
    }
    let mut current = differenced.to_vec();
    for (k, &lag) in stages.iter().enumerate().rev() {
        let mut buf = levels[k].clone();
        let offset = buf.len();
        buf.reserve(current.len());
        for &w in &current {
            let t = buf.len();
            buf.push(w + buf[t - lag]);
        }
        current = buf.split_off(offset);
    }
    Ok(current)
}

/// Inverse of [`difference`]: prepends `initial_values` and undoes the
/// differencing.
pub fn integrate(
    differenced: &TimeSeries,
    spec: &DifferenceSpec,
    initial_values: &[f64],
) -> Result<TimeSeries> {
    spec.validate()?;
    let lags = spec.lag_count();
    if initial_values.len() != lags {
        return Err(Error::InvalidArgument(format!(
            "expected {lags} initial values, got {}",
            initial_values.len()
        )));
    }
    let tail = integrate_values(initial_values, &differenced.values()?, spec)?;
    let mut values = initial_values.to_vec();
    values.extend(tail);
    TimeSeries::from_values(differenced.start() - Days::new(lags as u64), values)
}

/// How to cut a series into a training and a test segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    /// Training fraction in (0, 1); train length is `floor(n * fraction)`.
    Fraction(f64),
    /// Last training date (inclusive).
    Date(NaiveDate),
    /// Number of test days at the end.
    Count(usize),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Count(365)
    }
}

impl SplitSpec {
    /// Number of leading slots that go to training.
    pub fn train_len(&self, series: &TimeSeries) -> Result<usize> {
        let n = series.len();
        let train = match *self {
            SplitSpec::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "split fraction {f} outside (0, 1)"
                    )));
                }
                (n as f64 * f).floor() as usize
            }
            SplitSpec::Date(cut) => {
                let days = (cut - series.start()).num_days() + 1;
                days.clamp(0, n as i64) as usize
            }
            SplitSpec::Count(test) => n.saturating_sub(test),
        };
        if train == 0 || train >= n {
            return Err(Error::InvalidArgument(format!(
                "degenerate split: {train} train / {} test",
                n.saturating_sub(train)
            )));
        }
        Ok(train)
    }
}

impl fmt::Display for SplitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitSpec::Fraction(x) => write!(f, "frac:{x}"),
            SplitSpec::Date(d) => write!(f, "date:{d}"),
            SplitSpec::Count(n) => write!(f, "count:{n}"),
        }
    }
}

impl FromStr for SplitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad split '{s}', want count:N|frac:F|date:D"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "count" => arg.trim().parse().map(SplitSpec::Count).map_err(|_| bad()),
            "frac" => arg.trim().parse().map(SplitSpec::Fraction).map_err(|_| bad()),
            "date" => crate::data::parse_date(arg.trim())
                .map(SplitSpec::Date)
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

/// Splits into `(train, test)`; test follows train directly.
pub fn split(series: &TimeSeries, spec: &SplitSpec) -> Result<(TimeSeries, TimeSeries)> {
    if series.is_empty() {
        return Err(Error::Empty);
    }
    let cut = spec.train_len(series)?;
    Ok((series.slice(0..cut), series.slice(cut..series.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn day(n: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + Days::new(n)
    }

    fn ts(values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(day(0), values.to_vec()).unwrap()
    }

    #[test]
    fn first_difference() {
        let out = difference(&ts(&[1.0, 3.0, 6.0]), &DifferenceSpec::regular(1)).unwrap();
        assert_eq!(out.series.values().unwrap(), vec![2.0, 3.0]);
        assert_eq!(out.initial_values, vec![1.0]);
        assert_eq!(out.series.start(), day(1));
    }

    #[test]
    fn seasonal_difference_of_constant() {
        let spec = DifferenceSpec::new(0, 1, 2).unwrap();
        let out = difference(&ts(&[5.0; 4]), &spec).unwrap();
        assert_eq!(out.series.values().unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn second_difference_of_quadratic() {
        let out = difference(&ts(&[1.0, 2.0, 4.0, 7.0, 11.0]), &DifferenceSpec::regular(2)).unwrap();
        assert_eq!(out.series.values().unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn integrate_examples() {
        let back = integrate(&ts(&[2.0, 3.0]), &DifferenceSpec::regular(1), &[1.0]).unwrap();
        assert_eq!(back.values().unwrap(), vec![1.0, 3.0, 6.0]);
        let spec = DifferenceSpec::new(0, 1, 2).unwrap();
        let back = integrate(&ts(&[0.0, 0.0]), &spec, &[5.0, 5.0]).unwrap();
        assert_eq!(back.values().unwrap(), vec![5.0; 4]);
    }

    #[test]
    fn integrate_rejects_wrong_initial_count() {
        let err = integrate(&ts(&[2.0, 3.0]), &DifferenceSpec::regular(2), &[1.0]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn difference_errors() {
        let gappy = TimeSeries::new(day(0), vec![Some(1.0), None, Some(2.0)]).unwrap();
        assert!(matches!(
            difference(&gappy, &DifferenceSpec::regular(1)),
            Err(Error::MissingValues)
        ));
        assert!(matches!(
            difference(&ts(&[1.0, 2.0]), &DifferenceSpec::regular(2)),
            Err(Error::TooShort { .. })
        ));
        assert!(DifferenceSpec::new(3, 0, 1).is_err());
        assert!(DifferenceSpec::new(0, 2, 7).is_err());
        assert!(DifferenceSpec::new(0, 1, 1).is_err());
    }

    #[test]
    fn differencing_polynomial() {
        let spec = DifferenceSpec::new(1, 1, 3).unwrap();
        // (1-B)(1-B^3) = 1 - B - B^3 + B^4
        assert_eq!(spec.polynomial(), vec![1.0, -1.0, 0.0, -1.0, 1.0]);
    }

    #[test]
    fn split_examples() {
        let s = ts(&(1..=10).map(f64::from).collect::<Vec<_>>());
        let (train, test) = split(&s, &SplitSpec::Count(3)).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        let (train, test) = split(&s, &SplitSpec::Fraction(0.8)).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let (train, test) = split(&s, &SplitSpec::Date(day(4))).unwrap();
        assert_eq!(train.values().unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(test.values().unwrap(), vec![6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(test.start(), day(5));
    }

    #[test]
    fn split_rejects_degenerate() {
        let s = ts(&[1.0, 2.0, 3.0]);
        assert!(split(&s, &SplitSpec::Count(3)).is_err());
        assert!(split(&s, &SplitSpec::Count(0)).is_err());
        assert!(split(&s, &SplitSpec::Fraction(1.0)).is_err());
        assert!(split(&s, &SplitSpec::Date(day(10))).is_err());
    }

    #[test]
    fn split_spec_parsing() {
        assert_eq!("count:30".parse::<SplitSpec>().unwrap(), SplitSpec::Count(30));
        assert_eq!("frac:0.75".parse::<SplitSpec>().unwrap(), SplitSpec::Fraction(0.75));
        assert_eq!(
            "date:2022-05-31".parse::<SplitSpec>().unwrap(),
            SplitSpec::Date(NaiveDate::from_ymd_opt(2022, 5, 31).unwrap())
        );
        assert!("weeks:3".parse::<SplitSpec>().is_err());
    }

    proptest! {
        #[test]
        fn integrate_inverts_difference(
            steps in prop::collection::vec(-10.0f64..10.0, 30..120),
            d in 0usize..=2,
            seasonal_d in 0usize..=1,
            period in 2usize..=8,
        ) {
            let mut walk = Vec::with_capacity(steps.len());
            let mut level = 100.0;
            for s in steps {
                level += s;
                walk.push(level);
            }
            let spec = DifferenceSpec::new(d, seasonal_d, period).unwrap();
            let series = ts(&walk);
            let diffed = difference(&series, &spec).unwrap();
            prop_assert_eq!(diffed.series.len(), walk.len() - spec.lag_count());
            let back = integrate(&diffed.series, &spec, &diffed.initial_values).unwrap();
            prop_assert_eq!(back.start(), series.start());
            for (a, b) in back.values().unwrap().iter().zip(&walk) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }

        #[test]
        fn split_concatenates_to_input(n in 2usize..200, test in 1usize..199) {
            prop_assume!(test < n);
            let s = ts(&(0..n).map(|i| i as f64).collect::<Vec<_>>());
            let (train, tail) = split(&s, &SplitSpec::Count(test)).unwrap();
            let mut joined = train.values().unwrap();
            joined.extend(tail.values().unwrap());
            prop_assert_eq!(joined, s.values().unwrap());
            prop_assert_eq!(tail.start(), train.end() + Days::new(1));
        }
    }

    #[test]
    fn zero_order_difference_is_identity() {
        let s = ts(&[4.0, 1.0, 7.5]);
        let out = difference(&s, &DifferenceSpec::regular(0)).unwrap();
        assert_eq!(out.series, s);
        assert!(out.initial_values.is_empty());
    }

    #[test]
    fn repeated_first_difference_equals_second() {
        let s = ts(&[3.1, 4.7, 9.2, 1.3, 0.2, 8.8]);
        let once = difference(&s, &DifferenceSpec::regular(1)).unwrap().series;
        let twice = difference(&once, &DifferenceSpec::regular(1)).unwrap().series;
        let direct = difference(&s, &DifferenceSpec::regular(2)).unwrap().series;
        assert_eq!(twice.values().unwrap(), direct.values().unwrap());
    }
}
