//! Plain-text model files.
//!
//! ```text
//! format=demandcast-model/1
//! spec=0,0,0,6,1,3,7
//! intercept_flag=false
//! intercept=0.0000000000000000e0
//! phi=
//! seasonal_phi=1.2345678901234567e-1,...
//! ...
//! ```
//!
//! Floats carry 17 significant digits so reloads are bit-exact.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use super::{SarimaFit, SarimaParams, SarimaSpec};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "demandcast-model/1";

/// A fit as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub spec: SarimaSpec,
    pub params: SarimaParams,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_obs: usize,
    pub converged: bool,
    /// Dataset the model was trained on, if known.
    pub dataset: Option<String>,
}

impl SarimaFit {
    pub fn to_saved(&self, dataset: Option<&str>) -> SavedModel {
        SavedModel {
            spec: self.spec,
            params: self.params.clone(),
            loglik: self.loglik,
            aic: self.aic,
            bic: self.bic,
            n_obs: self.n_obs,
            converged: self.converged,
            dataset: dataset.map(str::to_owned),
        }
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(|&x| float(x)).collect::<Vec<_>>().join(",")
}

pub fn write_model<W: Write>(model: &SavedModel, mut out: W) -> Result<()> {
    let s = &model.spec;
    let p = &model.params;
    writeln!(out, "format={FORMAT_TAG}")?;
    writeln!(
        out,
        "spec={},{},{},{},{},{},{}",
        s.p, s.d, s.q, s.seasonal_p, s.seasonal_d, s.seasonal_q, s.period
    )?;
    writeln!(out, "intercept_flag={}", s.with_intercept)?;
    writeln!(out, "intercept={}", float(p.intercept))?;
    writeln!(out, "phi={}", floats(&p.phi))?;
    writeln!(out, "theta={}", floats(&p.theta))?;
    writeln!(out, "seasonal_phi={}", floats(&p.seasonal_phi))?;
    writeln!(out, "seasonal_theta={}", floats(&p.seasonal_theta))?;
    writeln!(out, "sigma2={}", float(p.sigma2))?;
    writeln!(out, "loglik={}", float(model.loglik))?;
    writeln!(out, "aic={}", float(model.aic))?;
    writeln!(out, "bic={}", float(model.bic))?;
    writeln!(out, "n_obs={}", model.n_obs)?;
    writeln!(out, "converged={}", model.converged)?;
    if let Some(d) = &model.dataset {
        writeln!(out, "dataset={d}")?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MalformedHeader(format!("model file: {}", msg.into()))
}

pub fn read_model<R: Read>(input: R) -> Result<SavedModel> {
    let mut map = BTreeMap::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line without '=': {line}")))?;
        if map.insert(k.to_owned(), v.to_owned()).is_some() {
            return Err(bad(format!("duplicate key {k}")));
        }
    }
    let get = |k: &str| map.get(k).map(String::as_str).ok_or_else(|| bad(format!("missing {k}")));
    if get("format")? != FORMAT_TAG {
        return Err(bad(format!("unsupported format {}", get("format")?)));
    }
    let f = |k: &str| -> Result<f64> {
        get(k)?.parse::<f64>().map_err(|_| bad(format!("bad number for {k}")))
    };
    let list = |k: &str| -> Result<Vec<f64>> {
        let v = get(k)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|x| x.parse::<f64>().map_err(|_| bad(format!("bad number in {k}"))))
            .collect()
    };
    let flag = |k: &str| -> Result<bool> {
        get(k)?.parse::<bool>().map_err(|_| bad(format!("bad flag for {k}")))
    };
    let spec: SarimaSpec = get("spec")?.parse()?;
    let spec = spec.intercept(flag("intercept_flag")?);
    let params = SarimaParams {
        intercept: f("intercept")?,
        phi: list("phi")?,
        theta: list("theta")?,
        seasonal_phi: list("seasonal_phi")?,
        seasonal_theta: list("seasonal_theta")?,
        sigma2: f("sigma2")?,
    };
    params.validate(&spec)?;
    Ok(SavedModel {
        spec,
        params,
        loglik: f("loglik")?,
        aic: f("aic")?,
        bic: f("bic")?,
        n_obs: get("n_obs")?
            .parse()
            .map_err(|_| bad("bad n_obs"))?,
        converged: flag("converged")?,
        dataset: map.get("dataset").cloned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SavedModel {
        SavedModel {
            spec: SarimaSpec::sarima(1, 0, 1, 1, 1, 0, 7),
            params: SarimaParams {
                intercept: 0.0,
                phi: vec![0.1 + 0.2],
                theta: vec![-1.0 / 3.0],
                seasonal_phi: vec![std::f64::consts::FRAC_1_PI],
                seasonal_theta: vec![],
                sigma2: 12345.678901234567,
            },
            loglik: -1234.5,
            aic: 2479.0,
            bic: 2500.25,
            n_obs: 993,
            converged: false,
            dataset: Some("interp".into()),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_damage() {
        let mut buf = Vec::new();
        write_model(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(read_model(text.replace("demandcast-model/1", "other/9").as_bytes()).is_err());
        assert!(read_model(text.replace("sigma2=", "sigma=").as_bytes()).is_err());
        let explosive = text.replace("phi=3.0000000000000004e-1", "phi=1.5e0");
        assert!(matches!(read_model(explosive.as_bytes()), Err(Error::NotStationary)));
    }
}
