//! Backtest the seasonal grid on one dataset, ranked by test MAPE.

use demandcast::data::{assemble, impute, read_records, ImputationStrategy};
use demandcast::estimation::FitOptions;
use demandcast::selection::{evaluate_grid, paper_grid, PaperGrid};
use demandcast::series::SplitSpec;

fn main() -> demandcast::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_demand.csv");
    let series = assemble(&read_records(path.as_ref())?)?;
    let data = impute(&series, ImputationStrategy::Interpolate)?.series;
    let grid = paper_grid(PaperGrid::Sarima);
    let ranked = evaluate_grid(&data, &SplitSpec::Count(365), &grid, &FitOptions::default())?;
    print!("{}", ranked.to_markdown());
    Ok(())
}
