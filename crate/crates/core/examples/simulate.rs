//! Simulate a seasonal process and recover its coefficients.

use demandcast::estimation::{fit, simulate, SarimaParams, SarimaSpec};

fn main() -> demandcast::Result<()> {
    let spec = SarimaSpec::sarima(1, 0, 0, 1, 0, 0, 7);
    let truth = SarimaParams {
        phi: vec![0.5],
        seasonal_phi: vec![0.6],
        ..SarimaParams::white_noise(10.0, 1.0)
    };
    for seed in 0..5 {
        let y = simulate(&spec, &truth, 2000, seed)?;
        let f = fit(&spec, &y)?;
        println!(
            "seed {seed}: phi {:.3}  Phi {:.3}  mean {:.3}  sigma2 {:.3}",
            f.params.phi[0], f.params.seasonal_phi[0], f.params.intercept, f.params.sigma2
        );
    }
    Ok(())
}
