//! Panels built by the pipeline against a from-scratch recomputation over
//! the raw synthetic files.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use chrono::{Duration, NaiveDateTime, Timelike};

use sentipulse::config::{slug, Config};
use sentipulse::ingest::{parse_stock_bars, parse_tweets, MarketTime, ParseOptions};
use sentipulse::panel::{Covariate, Panel};
use sentipulse::pipeline;
use sentipulse::sentiment::{score_text, Lexicon, RuleConstants};

type Buckets = BTreeMap<NaiveDateTime, Vec<f64>>;

/// Compound scores of in-session tweets grouped by their hour bucket
/// starting at :30.
fn raw_buckets(data: &Path, label: &str, config: &Config) -> Buckets {
    let cal = config.tweet_calendar().unwrap();
    let lex = Lexicon::bundled();
    let rules = RuleConstants::default();
    let file = File::open(data.join("tweets").join(format!("{}.csv", slug(label)))).unwrap();
    let mut out = Buckets::new();
    for t in parse_tweets(file, label, &ParseOptions::default()).unwrap().records {
        if !cal.contains(&t.window_start) {
            continue;
        }
        let local = t.window_start.naive_local() - Duration::minutes(30);
        let start = local.with_minute(0).unwrap().with_second(0).unwrap() + Duration::minutes(30);
        out.entry(start).or_default().push(score_text(&t.text, &lex, &rules).compound);
    }
    out
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn build(data: &Path, out: &Path) -> (Config, Vec<Panel>) {
    let config = Config::load(&data.join("config.toml")).unwrap();
    let store = out.join("store");
    pipeline::ingest(&data.join("tweets"), &data.join("stocks"), &config, &ParseOptions::default(), &store).unwrap();
    let panels = pipeline::build_panels(&store, &out.join("panels"), None, None).unwrap();
    (config, panels)
}

#[test]
fn panel_cells_match_raw_recomputation() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    sentipulse::synth::generate(17, &data).unwrap();
    let (config, panels) = build(&data, tmp.path());
    assert_eq!(panels.len(), config.companies.len());

    let price_cal = config.price_calendar().unwrap();
    let companies: Vec<Buckets> = config.companies.iter().map(|c| raw_buckets(&data, &c.query, &config)).collect();
    let ceos: Vec<Buckets> = config.companies.iter().map(|c| raw_buckets(&data, &c.ceo, &config)).collect();
    let covid = raw_buckets(&data, &config.entities.covid, &config);
    let vaccine = raw_buckets(&data, &config.entities.vaccine, &config);

    for (i, (panel, company)) in panels.iter().zip(&config.companies).enumerate() {
        assert_eq!(panel.company, company.name);
        assert!(!panel.is_empty());
        let bars: BTreeMap<MarketTime, f64> = parse_stock_bars(
            File::open(data.join("stocks").join(format!("{}.csv", slug(&company.name)))).unwrap(),
            &company.name,
            &ParseOptions::default(),
        )
        .unwrap()
        .records
        .into_iter()
        .map(|b| (b.timestamp, b.open))
        .collect();

        for row in &panel.rows {
            assert!(price_cal.contains(&row.instant));
            assert_eq!(bars[&row.instant], row.open);
            let bucket = row.instant.naive_local() - Duration::hours(1);
            let close = |got: f64, want: f64, what: &str| {
                assert!((got - want).abs() < 1e-12, "{} {} {what}: {got} vs {want}", company.name, row.instant)
            };
            close(row.get(Covariate::Company), mean(&companies[i][&bucket]), "company");
            close(row.get(Covariate::Ceo), mean(&ceos[i][&bucket]), "ceo");
            close(row.get(Covariate::Covid), mean(&covid[&bucket]), "covid");
            close(row.get(Covariate::Vaccine), mean(&vaccine[&bucket]), "vaccine");
            let others: Vec<f64> = companies
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .filter_map(|(_, b)| b.get(&bucket).map(|v| mean(v)))
                .collect();
            close(row.get(Covariate::Competitors), mean(&others), "competitors");
        }

        let expected_rows = bars
            .keys()
            .filter(|t| price_cal.contains(t))
            .filter(|t| {
                let b = t.naive_local() - Duration::hours(1);
                [&companies[i], &ceos[i], &covid, &vaccine].iter().all(|m| m.contains_key(&b))
                    && companies.iter().enumerate().any(|(j, m)| j != i && m.contains_key(&b))
            })
            .count();
        assert_eq!(panel.len(), expected_rows, "{}", company.name);
    }
}

#[test]
fn panels_on_disk_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    sentipulse::synth::generate(5, &data).unwrap();
    let (config, panels) = build(&data, tmp.path());
    let loaded = pipeline::load_panels(&tmp.path().join("panels"), &config).unwrap();
    assert_eq!(loaded, panels);
}
