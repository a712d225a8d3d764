//! Stepwise AIC order search with a weekly season.

use demandcast::data::{assemble, impute, read_records, ImputationStrategy};
use demandcast::selection::{stepwise_search, StepwiseConfig};

fn main() -> demandcast::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_demand.csv");
    let series = assemble(&read_records(path.as_ref())?)?;
    let data = impute(&series, ImputationStrategy::Interpolate)?.series;
    let train = data.slice(0..365);
    let config = StepwiseConfig {
        period: Some(7),
        ..StepwiseConfig::default()
    };
    let ranked = stepwise_search(&train, &config)?;
    println!("{} models visited", ranked.rows.len());
    print!("{}", ranked.to_markdown());
    Ok(())
}
