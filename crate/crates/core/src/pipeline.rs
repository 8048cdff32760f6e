//! File-level stages behind the command-line tool.
//!
//! Store layout written by [`ingest`]:
//!
//! ```text
//! <store>/config.toml            configuration used for the run
//! <store>/tweets/<entity>.csv    tweet_id,instant,neg,neu,pos,compound
//! <store>/prices/<company>.csv   timestamp,open,high,low,close,adj_close,volume
//! ```
//!
//! Raw inputs are `<tweets-dir>/<entity>.csv` (`id,start,end,text`) and
//! `<stocks-dir>/<company>.csv`, where `<entity>` and `<company>` are the
//! [`slug`]s of the tweet query label and the company name.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::Duration;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{slug, Config, ConfigError, EntityKind, Resample};
use crate::eval::{render_report, run_evaluation, CellSummary, EvalError, EvalSettings, Evaluation, ModelFamily, ReportFormat, SplitSpec};
use crate::ingest::{
    apply_calendar, format_market_time, parse_stock_bars, parse_tweets, write_stock_bars, IngestError, ParseOptions, StockBar,
    TweetRecord,
};
use crate::panel::{
    aggregate_entity_sentiment, build_panel, competitor_series, read_panel, read_scored_tweets, resample_daily,
    write_panel, write_scored_tweets, CategorySeries, Panel, PanelError, ScoredTweet, SentimentSeries,
};
use crate::sentiment::{load_lexicon, score_text, Lexicon, RuleConstants, SentimentError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Ingest { path: PathBuf, source: IngestError },
    #[error("{path}: {source}")]
    Panel { path: PathBuf, source: PanelError },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("lexicon: {0}")]
    Sentiment(#[from] SentimentError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn open(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// The configured lexicon, or the bundled one.
pub fn lexicon_for(config: &Config) -> Result<Lexicon, PipelineError> {
    match &config.sentiment.lexicon {
        Some(path) => Ok(load_lexicon(open(path)?)?),
        None => Ok(Lexicon::bundled()),
    }
}

/// Scores tweets, stamping each with its collection-window start.
pub fn score_tweets(tweets: &[TweetRecord], lexicon: &Lexicon, rules: &RuleConstants) -> Vec<ScoredTweet> {
    tweets
        .par_iter()
        .map(|t| ScoredTweet { tweet_id: t.tweet_id.clone(), instant: t.window_start, score: score_text(&t.text, lexicon, rules) })
        .collect()
}

/// Scores an `id,start,end,text` file and writes `tweet_id,neg,neu,pos,compound`.
pub fn score_file<R: Read, W: Write>(
    source: R,
    sink: W,
    lexicon: &Lexicon,
    opts: &ParseOptions,
) -> Result<usize, PipelineError> {
    let parsed = parse_tweets(source, "", opts).map_err(|source| PipelineError::Ingest { path: "<input>".into(), source })?;
    let scored = score_tweets(&parsed.records, lexicon, &RuleConstants::default());
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| PipelineError::Io { path: "<output>".into(), source: e.into() };
    w.write_record(["tweet_id", "neg", "neu", "pos", "compound"]).map_err(err)?;
    for s in &scored {
        let sc = s.score;
        w.write_record([s.tweet_id.clone(), sc.neg.to_string(), sc.neu.to_string(), sc.pos.to_string(), sc.compound.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| PipelineError::Io { path: "<output>".into(), source: e })?;
    Ok(scored.len())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub tweets_read: usize,
    pub tweets_kept: usize,
    pub tweets_rejected: usize,
    pub bars_read: usize,
    pub bars_kept: usize,
    pub bars_rejected: usize,
}

/// Parses, calendar-filters and scores every configured input file and
/// writes the store.
pub fn ingest(tweets_dir: &Path, stocks_dir: &Path, config: &Config, opts: &ParseOptions, store: &Path) -> Result<IngestSummary, PipelineError> {
    config.validate()?;
    let tweet_cal = config.tweet_calendar()?;
    let price_cal = config.price_calendar()?;
    let lexicon = lexicon_for(config)?;
    let rules = RuleConstants::default();
    let mut summary = IngestSummary::default();

    for entity in config.entities() {
        let src = tweets_dir.join(format!("{}.csv", entity.slug()));
        let parsed = parse_tweets(open(&src)?, &entity.label, opts).map_err(|source| PipelineError::Ingest { path: src.clone(), source })?;
        summary.tweets_read += parsed.records.len() + parsed.rejected.len();
        summary.tweets_rejected += parsed.rejected.len();
        let kept = apply_calendar(score_tweets(&parsed.records, &lexicon, &rules), &tweet_cal);
        summary.tweets_kept += kept.len();
        let dst = store.join("tweets").join(format!("{}.csv", entity.slug()));
        write_scored_tweets(create(&dst)?, &kept).map_err(|source| PipelineError::Panel { path: dst.clone(), source })?;
    }

    for company in &config.companies {
        let src = stocks_dir.join(format!("{}.csv", slug(&company.name)));
        let parsed = parse_stock_bars(open(&src)?, &company.name, opts).map_err(|source| PipelineError::Ingest { path: src.clone(), source })?;
        summary.bars_read += parsed.records.len() + parsed.rejected.len();
        summary.bars_rejected += parsed.rejected.len();
        let kept: Vec<StockBar> = apply_calendar(parsed.records, &price_cal);
        summary.bars_kept += kept.len();
        let dst = store.join("prices").join(format!("{}.csv", slug(&company.name)));
        write_stock_bars(create(&dst)?, &kept).map_err(|source| PipelineError::Ingest { path: dst.clone(), source })?;
    }

    let cfg_path = store.join("config.toml");
    create(&cfg_path)?.write_all(config.to_toml().as_bytes()).map_err(io_err(&cfg_path))?;
    Ok(summary)
}

pub fn load_store_config(store: &Path) -> Result<Config, PipelineError> {
    Ok(Config::load(&store.join("config.toml"))?)
}

/// Builds one panel per configured company from the store and writes
/// `<out>/<company>.csv`. `lag` and `resample` override the stored config.
pub fn build_panels(store: &Path, out: &Path, lag: Option<Duration>, resample: Option<Resample>) -> Result<Vec<Panel>, PipelineError> {
    let config = load_store_config(store)?;
    let lag = lag.unwrap_or_else(|| config.lag());
    let resample = resample.unwrap_or(config.panel.resample);
    let bucketing = config.bucketing();

    let mut company_series: Vec<SentimentSeries> = Vec::new();
    let mut ceo_series: Vec<SentimentSeries> = Vec::new();
    let (mut covid, mut vaccine) = (None, None);
    for entity in config.entities() {
        let path = store.join("tweets").join(format!("{}.csv", entity.slug()));
        let tweets = read_scored_tweets(open(&path)?).map_err(|source| PipelineError::Panel { path: path.clone(), source })?;
        match entity.kind {
            EntityKind::Company(i) => company_series.push(aggregate_entity_sentiment(&tweets, &config.companies[i].name, bucketing)),
            EntityKind::Ceo(i) => ceo_series.push(aggregate_entity_sentiment(&tweets, &config.companies[i].ceo, bucketing)),
            EntityKind::Covid => covid = Some(aggregate_entity_sentiment(&tweets, &entity.label, bucketing)),
            EntityKind::Vaccine => vaccine = Some(aggregate_entity_sentiment(&tweets, &entity.label, bucketing)),
        }
    }
    let (covid, vaccine) = (covid.expect("entities include COVID"), vaccine.expect("entities include vaccine"));

    let mut panels = Vec::with_capacity(config.companies.len());
    for (i, company) in config.companies.iter().enumerate() {
        let path = store.join("prices").join(format!("{}.csv", slug(&company.name)));
        let bars = parse_stock_bars(open(&path)?, &company.name, &ParseOptions::default())
            .map_err(|source| PipelineError::Ingest { path: path.clone(), source })?
            .records;
        let categories = CategorySeries {
            company_name: company.name.clone(),
            company: company_series[i].clone(),
            ceo: ceo_series[i].clone(),
            vaccine: vaccine.clone(),
            covid: covid.clone(),
            competitors: competitor_series(&company_series, &company.name).expect("company is in its own list"),
        };
        let mut panel = build_panel(&bars, &categories, lag);
        if resample == Resample::Daily {
            panel = resample_daily(&panel);
        }
        let dst = out.join(format!("{}.csv", slug(&company.name)));
        write_panel(create(&dst)?, &panel).map_err(|source| PipelineError::Panel { path: dst.clone(), source })?;
        panels.push(panel);
    }
    Ok(panels)
}

pub fn load_panel(path: &Path, company: &str) -> Result<Panel, PipelineError> {
    read_panel(open(path)?, company).map_err(|source| PipelineError::Panel { path: path.to_path_buf(), source })
}

/// Reads `<dir>/<company>.csv` for every configured company, in order.
pub fn load_panels(dir: &Path, config: &Config) -> Result<Vec<Panel>, PipelineError> {
    config.companies.iter().map(|c| load_panel(&dir.join(format!("{}.csv", slug(&c.name))), &c.name)).collect()
}

/// `hourly` when some date holds more than one row, else `daily`.
pub fn granularity(panels: &[Panel]) -> &'static str {
    let intraday = panels.iter().any(|p| p.rows.windows(2).any(|w| w[0].instant.date_naive() == w[1].instant.date_naive()));
    if intraday {
        "hourly"
    } else {
        "daily"
    }
}

#[derive(Serialize)]
struct FamilyMeta<'a> {
    family: ModelFamily,
    failed_cells: usize,
    cells: &'a [CellSummary],
}

#[derive(Serialize)]
struct ReportMeta<'a> {
    granularity: &'static str,
    companies: Vec<&'a str>,
    split: &'a SplitSpec,
    settings: &'a EvalSettings,
    families: Vec<FamilyMeta<'a>>,
}

fn family_dir(f: ModelFamily) -> &'static str {
    match f {
        ModelFamily::Arima => "arima",
        ModelFamily::Var => "var",
    }
}

/// Runs the backtest for each family and writes
/// `<out>/{arima,var}_mape.{csv,md}`, per-cell forecast CSVs under
/// `<out>/{arima,var}/` and `<out>/report_meta.json`.
pub fn evaluate(panels: &[Panel], settings: &EvalSettings, families: &[ModelFamily], out: &Path) -> Result<Vec<Evaluation>, PipelineError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut evals = Vec::with_capacity(families.len());
    for &family in families {
        let ev = run_evaluation(panels, settings, family)?;
        let stem = family_dir(family);
        for (ext, fmt) in [("csv", ReportFormat::Csv), ("md", ReportFormat::Markdown)] {
            let path = out.join(format!("{stem}_mape.{ext}"));
            create(&path)?.write_all(render_report(&ev.report, fmt).as_bytes()).map_err(io_err(&path))?;
        }
        for t in &ev.traces {
            let path = out.join(stem).join(format!("forecast_{}_{}.csv", slug(&t.company), t.covariate_set.slug()));
            let mut w = csv::Writer::from_writer(create(&path)?);
            let err = |e: csv::Error| PipelineError::Io { path: path.clone(), source: e.into() };
            w.write_record(["instant", "actual", "predicted"]).map_err(err)?;
            for ((i, a), p) in t.instants.iter().zip(&t.actual).zip(&t.predicted) {
                w.write_record([format_market_time(i), a.to_string(), p.to_string()]).map_err(err)?;
            }
            w.flush().map_err(io_err(&path))?;
        }
        evals.push(ev);
    }
    let meta = ReportMeta {
        granularity: granularity(panels),
        companies: panels.iter().map(|p| p.company.as_str()).collect(),
        split: &settings.split,
        settings,
        families: evals
            .iter()
            .map(|e| FamilyMeta { family: e.report.family, failed_cells: e.report.failed_cells(), cells: &e.cells })
            .collect(),
    };
    let path = out.join("report_meta.json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    create(&path)?.write_all(text.as_bytes()).map_err(io_err(&path))?;
    Ok(evals)
}
