//! Unit-root tests at d = 0, 1, 2 and the first correlogram lags.

use demandcast::data::{assemble, impute, read_records, ImputationStrategy};
use demandcast::diagnostics::correlogram::{acf_values, pacf_values};
use demandcast::diagnostics::{differencing_table, recommend_differencing, AdfRegression};

fn main() -> demandcast::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_demand.csv");
    let series = assemble(&read_records(path.as_ref())?)?;
    let dropped = impute(&series, ImputationStrategy::Drop)?.series;
    let x = dropped.values()?;

    println!("d  statistic  p-value   lags  flag");
    for step in differencing_table(&x, AdfRegression::Constant, 2)? {
        println!(
            "{}  {:>9.3}  {:<8.2e}  {:>4}  {}",
            step.d, step.adf.statistic, step.adf.p_value, step.adf.used_lags, step.over_differencing_risk
        );
    }
    let advice = recommend_differencing(&dropped)?;
    println!("recommended d = {}", advice.spec.d);

    let acf = acf_values(&x, 14)?;
    let pacf = pacf_values(&x, 14)?;
    println!("lag    acf    pacf   (band +-{:.3})", acf.band);
    for k in 0..14 {
        println!("{:>3} {:>6.3} {:>7.3}", k + 1, acf.values[k], pacf.values[k]);
    }
    Ok(())
}
