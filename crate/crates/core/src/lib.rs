//! Seasonal ARIMA modelling of daily maximum-demand series.
//!
//! The pipeline runs from a raw report extract to a ranked model comparison:
//! [`data`] parses and imputes, [`diagnostics`] tests for unit roots and
//! computes correlograms, [`estimation`] fits and forecasts by exact Kalman
//! likelihood, [`selection`] evaluates candidate grids or searches stepwise,
//! and [`evaluation`] assembles the report. [`cli`] wraps it all in the
//! `demandcast` binary.
//!
//! ```no_run
//! use demandcast::data::{assemble, impute, read_records, ImputationStrategy};
//! use demandcast::estimation::{fit, SarimaSpec};
//!
//! # fn main() -> demandcast::Result<()> {
//! let records = read_records("extract.csv".as_ref())?;
//! let series = impute(&assemble(&records)?, ImputationStrategy::Interpolate)?.series;
//! let model = fit(&SarimaSpec::sarima(0, 0, 0, 6, 1, 3, 7), &series)?;
//! let next_week = model.forecast(&series, 7)?;
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod linalg;
pub mod optim;
pub mod selection;
pub mod series;

pub use error::{Error, ErrorKind, Result};
