//! Load a report extract, summarize its gaps and build the five datasets.
//!
//! cargo run --example ingest -- [path/to/extract.csv]

use std::path::PathBuf;

use demandcast::data::{assemble, build_all, read_records, GapSummary};

fn main() -> demandcast::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_demand.csv")));
    let records = read_records(&path)?;
    let gaps = GapSummary::of(&assemble(&records)?);
    println!(
        "{} to {}: {} days, {} observed, {} missing",
        gaps.start,
        gaps.end,
        gaps.calendar_days,
        gaps.observed,
        gaps.missing()
    );
    for bundle in build_all(&records)? {
        let v = bundle.series.values()?;
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        println!("{:<42} n={:<5} mean={mean:.1}", bundle.name(), v.len());
    }
    Ok(())
}
