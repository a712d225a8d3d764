//! The `demandcast` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 input, 3 insufficient data,
//! 4 numerical failure.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::Days;
use clap::{Parser, Subcommand};

use crate::data::{assemble, impute, read_records, DatasetBundle, GapSummary, ImputationStrategy};
use crate::diagnostics::correlogram::{acf_values, pacf_values};
use crate::diagnostics::{differencing_table, AdfRegression};
use crate::error::{Error, ErrorKind, Result};
use crate::estimation::{forecast, read_model, write_model, FitOptions};
use crate::evaluation::{render_report, run_study_on, train_len_for, ReportFormat, StudyOptions, StudyReport};
use crate::selection::{paper_grid, train_mape, CandidateSet, CandidateSource, StepwiseConfig};
use config::{CommandDefaults, RunConfig, Settings};

#[derive(Debug, Parser)]
#[command(name = "demandcast", version, about = "Seasonal ARIMA study of daily maximum demand")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Write the five imputation datasets and a gap report.
    Ingest,
    /// ADF table at d = 0, 1, 2 and correlograms per dataset.
    Diagnose,
    /// Fit one model per dataset and save it.
    Fit,
    /// Evaluate a grid or run the stepwise search.
    Search,
    /// Full comparison study across datasets and grids.
    Report,
    /// Forecast from a saved model.
    Forecast,
}

impl Command {
    fn defaults(&self) -> CommandDefaults {
        match self {
            Command::Search => CommandDefaults {
                grids: &["stepwise"],
                impute: "interp",
            },
            Command::Fit => CommandDefaults {
                grids: &[],
                impute: "interp",
            },
            // Empty selection: use the dataset recorded in the model file.
            Command::Forecast => CommandDefaults {
                grids: &[],
                impute: "all",
            },
            _ => CommandDefaults {
                grids: &["paper-arima", "paper-sarima"],
                impute: "all",
            },
        }
    }
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Input => 2,
        ErrorKind::InsufficientData => 3,
        ErrorKind::Numerical => 4,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => Settings::from_toml_file(path)?,
        None => Settings::default(),
    };
    let config = RunConfig::resolve(cli.settings.or(file), cli.command.defaults())?;
    if cli.print_config {
        print!("{}", config.to_toml());
        return Ok(());
    }
    match cli.command {
        Command::Ingest => cmd_ingest(&config),
        Command::Diagnose => cmd_diagnose(&config),
        Command::Fit => cmd_fit(&config),
        Command::Search => cmd_search(&config),
        Command::Report => cmd_report(&config),
        Command::Forecast => cmd_forecast(&config),
    }
}

fn create_out_dir(config: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::file(&config.out_dir, e))?;
    Ok(&config.out_dir)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::file(path, e))
}

fn load_bundles(config: &RunConfig) -> Result<Vec<DatasetBundle>> {
    let records = read_records(config.input()?)?;
    let series = assemble(&records)?;
    let strategies: &[ImputationStrategy] = if config.impute.is_empty() {
        &ImputationStrategy::ALL
    } else {
        &config.impute
    };
    strategies.iter().map(|&s| impute(&series, s)).collect()
}

fn fit_options(config: &RunConfig) -> FitOptions {
    FitOptions {
        seed: config.seed,
        ..FitOptions::default()
    }
}

pub fn cmd_ingest(config: &RunConfig) -> Result<()> {
    let records = read_records(config.input()?)?;
    let series = assemble(&records)?;
    let out = create_out_dir(config)?;
    for strategy in ImputationStrategy::ALL {
        let bundle = impute(&series, strategy)?;
        let mut buf = Vec::new();
        bundle.write_csv(&mut buf)?;
        write_file(&out.join(format!("{}.csv", strategy.key())), &buf)?;
    }
    let gaps = GapSummary::of(&series);
    let mut report = format!(
        "start={}\nend={}\ncalendar_days={}\nobserved={}\nmissing={}\n",
        gaps.start,
        gaps.end,
        gaps.calendar_days,
        gaps.observed,
        gaps.missing()
    );
    for d in &gaps.missing_dates {
        report.push_str(&format!("missing_date={d}\n"));
    }
    write_file(&out.join("gap_report.txt"), report.as_bytes())?;
    println!(
        "{} calendar days, {} observed, {} missing ({} to {})",
        gaps.calendar_days,
        gaps.observed,
        gaps.missing(),
        gaps.start,
        gaps.end
    );
    Ok(())
}

pub fn cmd_diagnose(config: &RunConfig) -> Result<()> {
    let bundles = load_bundles(config)?;
    let out = create_out_dir(config)?;
    for bundle in &bundles {
        let key = bundle.strategy.key();
        let x = bundle.series.values()?;
        let table = differencing_table(&x, AdfRegression::Constant, 2)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "d", "statistic", "p_value", "used_lags", "n_effective", "crit_1", "crit_5", "crit_10", "lag1_acf",
            "over_differencing_risk",
        ])?;
        println!("{}", bundle.strategy.label());
        for step in &table {
            let a = &step.adf;
            let p = if a.p_clamped {
                format!("<{:e}", a.p_value)
            } else {
                format!("{:e}", a.p_value)
            };
            w.write_record([
                step.d.to_string(),
                format!("{:.6}", a.statistic),
                p.clone(),
                a.used_lags.to_string(),
                a.n_effective.to_string(),
                format!("{:.6}", a.critical_values[0]),
                format!("{:.6}", a.critical_values[1]),
                format!("{:.6}", a.critical_values[2]),
                format!("{:.6}", step.lag1_acf),
                step.over_differencing_risk.to_string(),
            ])?;
            let flag = if step.over_differencing_risk { "  over-differencing risk" } else { "" };
            println!("  d={}  ADF {:.3}  p {}  lags {}{flag}", step.d, a.statistic, p, a.used_lags);
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_file(&out.join(format!("{key}_adf.csv")), &bytes)?;

        let max_lag = config.max_lag.min(x.len() / 2);
        let acf = acf_values(&x, max_lag)?;
        let pacf = pacf_values(&x, max_lag)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lag", "acf", "pacf", "band"])?;
        for k in 0..max_lag {
            w.write_record([
                (k + 1).to_string(),
                format!("{:.8}", acf.values[k]),
                format!("{:.8}", pacf.values[k]),
                format!("{:.8}", acf.band),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_file(&out.join(format!("{key}_correlogram.csv")), &bytes)?;
    }
    Ok(())
}

pub fn cmd_fit(config: &RunConfig) -> Result<()> {
    let spec = config
        .spec
        .ok_or_else(|| Error::InvalidArgument("--spec is required".into()))?;
    let bundles = load_bundles(config)?;
    let out = create_out_dir(config)?;
    let mut nonconverged = Vec::new();
    for bundle in &bundles {
        let train_len = train_len_for(bundle, &config.split)?;
        let train = bundle.series.slice(0..train_len);
        let test = bundle.series.slice(train_len..bundle.series.len()).values()?;
        let fit = crate::estimation::fit_with(&spec, &train, &fit_options(config))?;
        let tr = train_mape(&fit, &train)?;
        let fc = crate::estimation::forecast::forecast_uncapped(&spec, &fit.params, &train, test.len())?;
        let te = crate::evaluation::mape(&test, &fc.point)?;
        let key = bundle.strategy.key();
        let mut buf = Vec::new();
        write_model(&fit.to_saved(Some(key)), &mut buf)?;
        write_file(&out.join(format!("{key}.model")), &buf)?;
        println!(
            "{key}\t{spec}\ttest_MAPE {te:.3}\ttrain_MAPE {tr:.3}\tAIC {:.3}\tBIC {:.3}\tconverged {}",
            fit.aic, fit.bic, fit.converged
        );
        if !fit.converged {
            log::warn!("{key}: {spec} did not converge");
            nonconverged.push(key);
        }
    }
    if !nonconverged.is_empty() && !config.allow_nonconverged {
        return Err(Error::NotConverged);
    }
    Ok(())
}

fn study_inputs(config: &RunConfig) -> Result<(Vec<CandidateSet>, Option<StepwiseConfig>)> {
    let mut grids = Vec::new();
    let mut stepwise = None;
    if let Some(spec) = config.spec {
        grids.push(CandidateSet::single(spec)?);
    }
    for source in &config.grids {
        match source {
            CandidateSource::Grid(kind) => grids.push(paper_grid(*kind)),
            CandidateSource::Stepwise => {
                stepwise = Some(StepwiseConfig {
                    period: (config.season >= 2).then_some(config.season),
                    seasonal_d: config.seasonal_d,
                    fit: fit_options(config),
                    ..StepwiseConfig::default()
                })
            }
            CandidateSource::Explicit => {
                if config.spec.is_none() {
                    return Err(Error::InvalidArgument("explicit grid needs --spec".into()));
                }
            }
        }
    }
    if grids.is_empty() && stepwise.is_none() {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    }
    Ok((grids, stepwise))
}

fn run_configured_study(config: &RunConfig) -> Result<StudyReport> {
    let bundles = load_bundles(config)?;
    let (grids, stepwise) = study_inputs(config)?;
    let options = StudyOptions {
        split: config.split,
        fit: fit_options(config),
        strategies: Vec::new(),
        stepwise,
    };
    let report = run_study_on(&bundles, &grids, &options)?;
    if report.best.is_none() {
        return Err(Error::Numerical("every fit failed on every dataset".into()));
    }
    for ds in &report.datasets {
        for t in ds.tables.iter().flatten() {
            if t.failures() > 0 {
                log::warn!("{}: {} of {} fits failed", ds.strategy.key(), t.failures(), t.rows.len());
            }
        }
    }
    Ok(report)
}

fn write_dataset_results(report: &StudyReport, out: &Path) -> Result<()> {
    for ds in &report.datasets {
        let csv = crate::evaluation::render_dataset_csv(report, ds.strategy)?;
        write_file(&out.join(format!("{}_results.csv", ds.strategy.key())), csv.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_search(config: &RunConfig) -> Result<()> {
    let report = run_configured_study(config)?;
    let out = create_out_dir(config)?;
    write_dataset_results(&report, out)?;
    let text = render_report(&report, config.format)?;
    let name = format!("search.{}", config.format);
    write_file(&out.join(name), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

pub fn cmd_report(config: &RunConfig) -> Result<()> {
    let report = run_configured_study(config)?;
    let out = create_out_dir(config)?;
    let md = render_report(&report, ReportFormat::Markdown)?;
    let csv = render_report(&report, ReportFormat::Csv)?;
    write_file(&out.join("report.md"), md.as_bytes())?;
    write_file(&out.join("report.csv"), csv.as_bytes())?;
    write_dataset_results(&report, out)?;
    for ds in &report.datasets {
        if let Some((spec, v)) = ds.winner() {
            println!("{}: {spec} test_mape={v:.3}", ds.strategy.key());
        }
    }
    if let Some(best) = report.best {
        println!("best: {} on {} test_mape={:.3}", best.spec, best.strategy.key(), best.test_mape);
    }
    println!("wrote {}", out.join("report.md").display());
    Ok(())
}

pub fn cmd_forecast(config: &RunConfig) -> Result<()> {
    let path = config
        .model
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--model is required".into()))?;
    let file = fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let model = read_model(file)?;
    let strategy = match (&config.impute[..], &model.dataset) {
        ([one], _) => *one,
        ([], Some(d)) => d.parse()?,
        ([], None) => ImputationStrategy::Interpolate,
        _ => return Err(Error::InvalidArgument("forecast needs a single --impute".into())),
    };
    let records = read_records(config.input()?)?;
    let bundle = impute(&assemble(&records)?, strategy)?;
    let f = forecast(&model.spec, &model.params, &bundle.series, config.horizon)?;
    let last = *bundle.dates.last().ok_or(Error::Empty)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["date", "point", "lower95", "upper95"])?;
    for h in 0..f.horizon() {
        w.write_record([
            (last + Days::new(h as u64 + 1)).to_string(),
            format!("{:.6}", f.point[h]),
            format!("{:.6}", f.lower[h]),
            format!("{:.6}", f.upper[h]),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let out = create_out_dir(config)?;
    write_file(&out.join("forecast.csv"), &bytes)?;
    std::io::stdout().write_all(&bytes)?;
    Ok(())
}
