use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::{Duration, NaiveDate};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sentipulse::arima::{auto_select_with, forecast_arima, ArimaFit, ArimaGrid, Criterion, FitOptions};
use sentipulse::config::{Config, Resample};
use sentipulse::eval::{render_report, ModelFamily, ReportFormat};
use sentipulse::ingest::{OnError, ParseOptions, ZonePolicy};
use sentipulse::panel::{correlation_matrix, resample_daily, Covariate, Panel};
use sentipulse::pipeline;
use sentipulse::sentiment::{load_lexicon, Lexicon};
use sentipulse::var::{
    default_p_max, forecast_var, granger_causality, impulse_response, select_var_lag, GrangerResult, IrfResult, VarFit,
};

#[derive(Parser)]
#[command(name = "sentipulse", version, about = "Tweet sentiment, price panels and ARIMA/VAR backtests")]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a tweet file with the valence lexicon.
    Score(ScoreArgs),
    /// Parse, filter and score raw tweet and price files into a store.
    Ingest(IngestArgs),
    /// Join stored sentiment and prices into per-company panels.
    BuildPanel(BuildPanelArgs),
    /// Pearson correlation matrix of a panel.
    Correlate(CorrelateArgs),
    /// Select and fit an ARIMA model on a panel's training window.
    FitArima(FitArimaArgs),
    /// Select and fit a VAR on a panel's training window.
    FitVar(FitVarArgs),
    /// Run the train/test backtest and write MAPE reports.
    Evaluate(EvaluateArgs),
    /// Write the seeded synthetic dataset (raw tweets, prices, config).
    GenerateSynthetic(SynthArgs),
}

#[derive(Args)]
struct RowPolicy {
    /// What to do with malformed rows.
    #[arg(long, value_enum, default_value = "abort")]
    on_error: Policy,
    /// Read timestamps without an offset as UTC instead of rejecting them.
    #[arg(long)]
    assume_utc: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Skip,
    Abort,
}

impl RowPolicy {
    fn options(&self, delimiter: u8) -> ParseOptions {
        ParseOptions {
            on_error: match self.on_error {
                Policy::Skip => OnError::Skip,
                Policy::Abort => OnError::Abort,
            },
            zone_policy: if self.assume_utc { ZonePolicy::AssumeUtc } else { ZonePolicy::RequireOffset },
            delimiter,
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    /// Lexicon TSV (`token<TAB>valence`); the bundled lexicon if omitted.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Tweet file with id, start, end and text columns. Tab-separated when
    /// the extension is .tsv, comma-separated otherwise.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    rows: RowPolicy,
}

#[derive(Args)]
struct IngestArgs {
    /// Directory of `<entity>.csv` tweet files.
    #[arg(long)]
    tweets: PathBuf,
    /// Directory of `<company>.csv` OHLCV files.
    #[arg(long)]
    stocks: PathBuf,
    /// Configuration file (companies, sessions, holidays, ...).
    #[arg(long, alias = "config")]
    calendar: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    rows: RowPolicy,
}

#[derive(Args)]
struct BuildPanelArgs {
    #[arg(long)]
    store: PathBuf,
    /// Sentiment lag, e.g. `1h`, `30m`, `0`.
    #[arg(long, value_parser = parse_duration)]
    lag: Option<Duration>,
    #[arg(long, value_parser = parse_resample)]
    resample: Option<Resample>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long)]
    panel: PathBuf,
    #[arg(long, value_parser = parse_resample)]
    resample: Option<Resample>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PanelWindow {
    #[arg(long)]
    panel: PathBuf,
    /// Comma-separated sentiment columns (company, ceo, vaccine, covid,
    /// competitors), `all` or `none`.
    #[arg(long, default_value = "none", value_parser = parse_covariates)]
    covariates: CovariateList,
    /// Last training date; rows after it are forecast.
    #[arg(long)]
    train_end: Option<NaiveDate>,
    /// First training date.
    #[arg(long)]
    train_start: Option<NaiveDate>,
    /// Forecast steps written with the fit (0 for none).
    #[arg(long, default_value_t = 0)]
    horizon: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArimaArgs {
    #[command(flatten)]
    window: PanelWindow,
    /// Maximum p,d,q searched.
    #[arg(long, default_value = "5,2,5")]
    grid: ArimaGrid,
    #[arg(long, default_value = "aic")]
    criterion: Criterion,
}

#[derive(Args)]
struct FitVarArgs {
    #[command(flatten)]
    window: PanelWindow,
    /// Largest lag order tried; `min(10, n/(3k))` if omitted.
    #[arg(long)]
    p_max: Option<usize>,
    /// Impulse-response horizon written with the fit.
    #[arg(long, default_value_t = 10)]
    irf_horizon: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Arima,
    Var,
    Both,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    panels: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    family: FamilyArg,
    #[arg(long)]
    out: PathBuf,
    /// Exit with status 2 when any cell failed.
    #[arg(long)]
    strict: bool,
    /// Refit on an expanding window and forecast one step at a time.
    #[arg(long)]
    rolling: bool,
    #[arg(long)]
    grid: Option<ArimaGrid>,
    #[arg(long)]
    criterion: Option<Criterion>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long)]
    train_end: Option<NaiveDate>,
    #[arg(long)]
    test_start: Option<NaiveDate>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 20230201)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_duration(s: &str) -> Result<Duration, String> {
    let s = s.trim();
    let (num, unit) = s.split_at(s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len()));
    let n: i64 = num.parse().map_err(|_| format!("bad duration {s:?}"))?;
    match unit {
        "" if n == 0 => Ok(Duration::zero()),
        "m" | "min" => Ok(Duration::minutes(n)),
        "h" => Ok(Duration::hours(n)),
        "d" => Ok(Duration::days(n)),
        _ => Err(format!("bad duration {s:?} (use e.g. 1h, 30m, 0)")),
    }
}

fn parse_resample(s: &str) -> Result<Resample, String> {
    s.parse().map_err(|e: sentipulse::config::ConfigError| e.to_string())
}

#[derive(Clone)]
struct CovariateList(Vec<Covariate>);

fn parse_covariates(s: &str) -> Result<CovariateList, String> {
    let list = match s.trim().to_lowercase().as_str() {
        "" | "none" => Vec::new(),
        "all" => Covariate::ALL.to_vec(),
        list => list
            .split(',')
            .map(|t| t.parse().map_err(|e: sentipulse::panel::PanelError| e.to_string()))
            .collect::<Result<_, _>>()?,
    };
    Ok(CovariateList(list))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Score(a) => score(a)?,
        Command::Ingest(a) => ingest(a)?,
        Command::BuildPanel(a) => build_panel(a)?,
        Command::Correlate(a) => correlate(a)?,
        Command::FitArima(a) => fit_arima(a)?,
        Command::FitVar(a) => fit_var(a)?,
        Command::Evaluate(a) => return evaluate(a),
        Command::GenerateSynthetic(a) => {
            sentipulse::synth::generate(a.seed, &a.out)?;
            println!("wrote synthetic dataset to {}", a.out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let lexicon = match &a.lexicon {
        Some(p) => load_lexicon(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))?,
        None => Lexicon::bundled(),
    };
    let tsv = a.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv"));
    let input = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let mut out = create(&a.output)?;
    let n = pipeline::score_file(BufReader::new(input), &mut out, &lexicon, &a.rows.options(if tsv { b'\t' } else { b',' }))?;
    out.flush()?;
    println!("scored {n} texts");
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let config = Config::load(&a.calendar)?;
    let summary = pipeline::ingest(&a.tweets, &a.stocks, &config, &a.rows.options(b','), &a.out)?;
    println!(
        "tweets: {} read, {} kept, {} rejected; bars: {} read, {} kept, {} rejected",
        summary.tweets_read, summary.tweets_kept, summary.tweets_rejected, summary.bars_read, summary.bars_kept, summary.bars_rejected
    );
    Ok(())
}

fn build_panel(a: BuildPanelArgs) -> Result<()> {
    let panels = pipeline::build_panels(&a.store, &a.out, a.lag, a.resample)?;
    for p in &panels {
        println!("{}: {} rows", p.company, p.len());
    }
    Ok(())
}

fn company_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "panel".into(), |s| s.to_string_lossy().into_owned())
}

fn correlate(a: CorrelateArgs) -> Result<()> {
    let mut panel = pipeline::load_panel(&a.panel, &company_of(&a.panel))?;
    if a.resample == Some(Resample::Daily) {
        panel = resample_daily(&panel);
    }
    let m = correlation_matrix(&panel)?;
    let mut w = create(&a.out)?;
    m.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Training rows and the rows after them.
fn window(w: &PanelWindow) -> Result<(Panel, Panel)> {
    let panel = pipeline::load_panel(&w.panel, &company_of(&w.panel))?;
    let mut train = Panel { company: panel.company.clone(), rows: Vec::new() };
    let mut rest = train.clone();
    for r in panel.rows {
        let d = r.instant.date_naive();
        if w.train_start.is_some_and(|s| d < s) {
            continue;
        }
        if w.train_end.is_none_or(|e| d <= e) {
            train.rows.push(r);
        } else {
            rest.rows.push(r);
        }
    }
    if train.is_empty() {
        bail!("no training rows in {}", w.panel.display());
    }
    Ok((train, rest))
}

fn labels(covs: &[Covariate]) -> Vec<String> {
    covs.iter().map(|c| c.column().to_string()).collect()
}

#[derive(Serialize)]
struct CandidateOut {
    order: String,
    score: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ArimaOut {
    company: String,
    covariates: Vec<String>,
    train_rows: usize,
    criterion: Criterion,
    fit: ArimaFit,
    candidates: Vec<CandidateOut>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    forecast: Vec<f64>,
}

fn fit_arima(a: FitArimaArgs) -> Result<()> {
    let w = &a.window;
    let (train, rest) = window(w)?;
    let x = (!w.covariates.0.is_empty()).then(|| train.covariate_matrix(&w.covariates.0));
    let sel = auto_select_with(&train.open(), x.as_ref(), &a.grid, a.criterion, &FitOptions::default())?;
    let forecast = if w.horizon > 0 {
        let future = if w.covariates.0.is_empty() {
            None
        } else if rest.len() >= w.horizon {
            let head = Panel { company: rest.company.clone(), rows: rest.rows[..w.horizon].to_vec() };
            Some(head.covariate_matrix(&w.covariates.0))
        } else {
            bail!("forecasting {} steps with covariates needs {} rows after the training window, found {}", w.horizon, w.horizon, rest.len());
        };
        forecast_arima(&sel.best, w.horizon, future.as_ref())?.point
    } else {
        Vec::new()
    };
    println!("{}: ARIMA{} aic={:.4}", train.company, sel.best.order, sel.best.aic);
    let out = ArimaOut {
        company: train.company.clone(),
        covariates: labels(&w.covariates.0),
        train_rows: train.len(),
        criterion: a.criterion,
        candidates: sel
            .candidates
            .iter()
            .map(|c| CandidateOut {
                order: c.order.to_string(),
                score: c.result.as_ref().ok().copied(),
                error: c.result.as_ref().err().map(|e| e.to_string()),
            })
            .collect(),
        fit: sel.best,
        forecast,
    };
    write_json(&w.out, &out)
}

#[derive(Serialize)]
struct VarOut {
    company: String,
    train_rows: usize,
    fit: VarFit,
    granger: Vec<GrangerResult>,
    irf: IrfResult,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    forecast_open: Vec<f64>,
}

fn fit_var(a: FitVarArgs) -> Result<()> {
    let w = &a.window;
    let (train, _) = window(w)?;
    let mut names = vec!["open".to_string()];
    names.extend(labels(&w.covariates.0));
    let data = train.with_open(&w.covariates.0);
    let (n, k) = data.shape();
    let p_max = a.p_max.unwrap_or_else(|| default_p_max(n, k));
    let (p, fit) = select_var_lag(&data, names.clone(), p_max)?;
    let mut granger = Vec::new();
    for cause in &names[1..] {
        granger.push(granger_causality(&data, &names, cause, "open", p)?);
        granger.push(granger_causality(&data, &names, "open", cause, p)?);
    }
    let forecast_open = if w.horizon > 0 { forecast_var(&fit, w.horizon)?.column(0).iter().copied().collect() } else { Vec::new() };
    println!("{}: VAR({p}) aic={:.4}", train.company, fit.aic);
    let out = VarOut {
        company: train.company.clone(),
        train_rows: n,
        irf: impulse_response(&fit, a.irf_horizon),
        fit,
        granger,
        forecast_open,
    };
    write_json(&w.out, &out)
}

fn evaluate(a: EvaluateArgs) -> Result<ExitCode> {
    let config = Config::load(&a.config)?;
    let mut settings = config.eval_settings();
    if a.rolling {
        settings.arima.rolling = true;
        settings.var.rolling = true;
    }
    if let Some(g) = a.grid {
        settings.arima.grid = g;
    }
    if let Some(c) = a.criterion {
        settings.arima.criterion = c;
    }
    if a.p_max.is_some() {
        settings.var.p_max = a.p_max;
    }
    if let Some(d) = a.train_end {
        settings.split.train_end = d;
    }
    if let Some(d) = a.test_start {
        settings.split.test_start = d;
    }
    let families = match a.family {
        FamilyArg::Arima => vec![ModelFamily::Arima],
        FamilyArg::Var => vec![ModelFamily::Var],
        FamilyArg::Both => vec![ModelFamily::Arima, ModelFamily::Var],
    };
    let panels = pipeline::load_panels(&a.panels, &config)?;
    let evals = pipeline::evaluate(&panels, &settings, &families, &a.out)?;
    let mut failed = 0;
    for ev in &evals {
        print!("{}", render_report(&ev.report, ReportFormat::Markdown));
        println!();
        failed += ev.report.failed_cells();
    }
    if failed > 0 {
        eprintln!("{failed} cell(s) failed; see {}", a.out.join("report_meta.json").display());
        if a.strict {
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}
