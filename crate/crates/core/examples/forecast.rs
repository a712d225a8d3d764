//! Fit on a year of data and forecast two weeks with 95% bands.

use demandcast::data::{assemble, impute, read_records, ImputationStrategy};
use demandcast::estimation::{fit, SarimaSpec};

fn main() -> demandcast::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_demand.csv");
    let series = assemble(&read_records(path.as_ref())?)?;
    let data = impute(&series, ImputationStrategy::Interpolate)?.series;
    let history = data.slice(data.len() - 365..data.len());

    let spec = SarimaSpec::sarima(1, 0, 0, 1, 1, 1, 7);
    let model = fit(&spec, &history)?;
    let fc = model.forecast(&history, 14)?;
    println!("date        point     lower95   upper95");
    for h in 0..fc.horizon() {
        println!("{}  {:>8.1}  {:>8.1}  {:>8.1}", fc.date_at(h), fc.point[h], fc.lower[h], fc.upper[h]);
    }
    Ok(())
}
