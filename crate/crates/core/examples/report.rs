//! The full comparison study: every dataset against both grids.
//!
//! Takes a minute or two on the bundled fixture.

use demandcast::data::read_records;
use demandcast::evaluation::{render_report, run_study, ReportFormat, StudyOptions};
use demandcast::selection::{paper_grid, PaperGrid};

fn main() -> demandcast::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_demand.csv");
    let records = read_records(path.as_ref())?;
    let grids = [paper_grid(PaperGrid::Arima), paper_grid(PaperGrid::Sarima)];
    let report = run_study(&records, &grids, &StudyOptions::default())?;
    print!("{}", render_report(&report, ReportFormat::Markdown)?);
    Ok(())
}
