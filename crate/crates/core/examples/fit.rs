//! Maximum-likelihood fit of a seasonal model on the training segment.

use demandcast::data::{assemble, impute, read_records, ImputationStrategy};
use demandcast::estimation::{fit, SarimaSpec};
use demandcast::series::{split, SplitSpec};

fn main() -> demandcast::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_demand.csv");
    let series = assemble(&read_records(path.as_ref())?)?;
    let data = impute(&series, ImputationStrategy::Interpolate)?.series;
    let (train, _) = split(&data, &SplitSpec::Count(365))?;

    let spec: SarimaSpec = "1,0,0,1,0,1,7".parse()?;
    let f = fit(&spec, &train)?;
    println!("{spec}");
    println!("  intercept      {:.2}", f.params.intercept);
    println!("  phi            {:?}", f.params.phi);
    println!("  seasonal phi   {:?}", f.params.seasonal_phi);
    println!("  seasonal theta {:?}", f.params.seasonal_theta);
    println!("  sigma2         {:.1}", f.params.sigma2);
    println!("  loglik {:.3}  AIC {:.3}  BIC {:.3}  converged {}", f.loglik, f.aic, f.bic, f.converged);
    Ok(())
}
