//! Save a fitted model, read it back and forecast from the copy.

use demandcast::estimation::{fit, forecast, read_model, simulate, write_model, SarimaParams, SarimaSpec};

fn main() -> demandcast::Result<()> {
    let spec = SarimaSpec::arima(2, 1, 1);
    let truth = SarimaParams {
        phi: vec![0.4, -0.2],
        theta: vec![0.3],
        ..SarimaParams::white_noise(0.0, 1.0)
    };
    let y = simulate(&spec, &truth, 500, 7)?;
    let fitted = fit(&spec, &y)?;

    let mut buf = Vec::new();
    write_model(&fitted.to_saved(Some("interp")), &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));

    let saved = read_model(buf.as_slice())?;
    assert_eq!(saved.params, fitted.params);
    let fc = forecast(&saved.spec, &saved.params, &y, 5)?;
    println!("next five: {:?}", fc.point.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
    Ok(())
}
