//! Seeded synthetic input data: ten fictitious companies over 30 trading
//! days of hourly prices and tweets, in the raw layout read by
//! [`crate::pipeline::ingest`].
//!
//! Each entity carries a latent sentiment that follows a slow AR(1). Tweet
//! texts are drawn from small positive, negative and neutral word lists in
//! proportion to it, and each company's hourly open moves with its own
//! latent sentiment from the previous hour. Some tweets and bars fall on
//! weekends, on the configured holiday and outside session hours so that
//! ingestion has something to filter.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{slug, CompanyEntry, Config};
use crate::eval::SplitSpec;
use crate::ingest::{market_time_from_local, write_stock_bars, write_tweets, MarketTime, StockBar, TweetRecord};
use crate::pipeline::PipelineError;

pub const TRADING_DAYS: usize = 30;

const COMPANIES: [(&str, &str); 10] = [
    ("Altamed", "Mara Quint"),
    ("Brixo", "Tobias Wren"),
    ("Corvana", "Ines Halloway"),
    ("Delphix", "Rafael Odum"),
    ("Eunova", "Priya Castell"),
    ("Fenwick", "Jonah Elsby"),
    ("Galvia", "Noor Aldana"),
    ("Heliox", "Petra Vance"),
    ("Iridon", "Caleb Moreno"),
    ("Juvena", "Lena Frisk"),
];

const POSITIVE: [&str; 10] = ["good", "great", "love", "excellent", "strong", "happy", "win", "promising", "best", "nice"];
const NEGATIVE: [&str; 10] = ["bad", "terrible", "hate", "awful", "weak", "sad", "lose", "disappointing", "worst", "fail"];
const NEUTRAL: [&str; 10] = ["today", "shares", "report", "market", "update", "news", "trial", "quarter", "results", "data"];

/// Configuration matching the generated files.
pub fn synthetic_config() -> Config {
    let companies = COMPANIES
        .iter()
        .map(|&(name, ceo)| CompanyEntry { name: name.into(), query: name.into(), ceo: ceo.into() })
        .collect();
    Config { companies, split: SplitSpec::default(), ..Config::default() }
}

/// The first `TRADING_DAYS` weekdays from 2023-02-01 that are not holidays.
pub fn trading_days(config: &Config) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(TRADING_DAYS);
    let mut d = NaiveDate::from_ymd_opt(2023, 2, 1).expect("valid date");
    while out.len() < TRADING_DAYS {
        let weekend = matches!(d.weekday(), Weekday::Sat | Weekday::Sun);
        if !weekend && !config.calendar.holidays.contains(&d) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

struct Latent {
    value: f64,
}

impl Latent {
    fn step(&mut self, rng: &mut ChaCha8Rng, phi: f64, scale: f64) -> f64 {
        let e: f64 = StandardNormal.sample(rng);
        self.value = phi * self.value + scale * e;
        self.value.tanh()
    }
}

fn text(rng: &mut ChaCha8Rng, label: &str, mood: f64) -> String {
    let n = rng.random_range(4..9);
    let p_pos = 0.5 * (1.0 + mood);
    let mut words = vec![label.to_string()];
    for _ in 0..n {
        let u: f64 = rng.random();
        let list = if u < 0.4 {
            &NEUTRAL
        } else if rng.random::<f64>() < p_pos {
            &POSITIVE
        } else {
            &NEGATIVE
        };
        words.push(list[rng.random_range(0..list.len())].to_string());
    }
    if rng.random::<f64>() < 0.1 {
        words.push("!".into());
    }
    words.join(" ")
}

fn local(day: NaiveDate, h: u32, m: u32) -> MarketTime {
    market_time_from_local(day.and_hms_opt(h, m, 0).expect("valid time"))
}

/// Writes `config.toml`, `tweets/` and `stocks/` under `out`.
pub fn generate(seed: u64, out: &Path) -> Result<Config, PipelineError> {
    let config = synthetic_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let days = trading_days(&config);
    let first = days[0];
    let last = *days.last().expect("non-empty");
    let all_days: Vec<NaiveDate> = first.iter_days().take_while(|d| *d <= last).collect();

    let entities = config.entities();
    let mut latent: Vec<Latent> = entities.iter().map(|_| Latent { value: 0.0 }).collect();
    let mut tweets: Vec<Vec<TweetRecord>> = vec![Vec::new(); entities.len()];
    let n_co = config.companies.len();
    let mut company_mood: Vec<BTreeMap<MarketTime, f64>> = vec![BTreeMap::new(); n_co];

    for &day in &all_days {
        // Buckets from 08:30 through 15:30; the last one straddles the session end.
        for h in 8..=15 {
            for (k, e) in entities.iter().enumerate() {
                let mood = latent[k].step(&mut rng, 0.9, 0.35);
                if k < n_co {
                    company_mood[k].insert(local(day, h, 30), mood);
                }
                let busy = k >= 2 * n_co;
                let count = if busy { rng.random_range(2..6) } else if rng.random::<f64>() < 0.03 { 0 } else { rng.random_range(1..4) };
                for _ in 0..count {
                    let minute = rng.random_range(0..60);
                    let start = local(day, h, 30) + Duration::minutes(minute);
                    let id = format!("{}-{}", e.slug(), tweets[k].len() + 1);
                    tweets[k].push(TweetRecord {
                        tweet_id: id,
                        window_start: start,
                        window_end: start + Duration::hours(1),
                        text: text(&mut rng, &e.label, mood),
                        query: e.label.clone(),
                    });
                }
            }
        }
        for (k, e) in entities.iter().enumerate() {
            let start = local(day, 19, rng.random_range(0..60));
            let id = format!("{}-{}", e.slug(), tweets[k].len() + 1);
            tweets[k].push(TweetRecord {
                tweet_id: id,
                window_start: start,
                window_end: start + Duration::hours(1),
                text: text(&mut rng, &e.label, 0.0),
                query: e.label.clone(),
            });
        }
    }

    let tweets_dir = out.join("tweets");
    let stocks_dir = out.join("stocks");
    for dir in [&tweets_dir, &stocks_dir] {
        fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.clone(), source })?;
    }
    for (e, list) in entities.iter().zip(&tweets) {
        let path = tweets_dir.join(format!("{}.csv", e.slug()));
        let file = fs::File::create(&path).map_err(|source| PipelineError::Io { path: path.clone(), source })?;
        write_tweets(file, list).map_err(|source| PipelineError::Ingest { path: path.clone(), source })?;
    }

    for (i, c) in config.companies.iter().enumerate() {
        let mut price = 40.0 + 15.0 * i as f64;
        let mut bars = Vec::new();
        for &day in &all_days {
            // 16:30 is past the session close.
            for h in 9..=16 {
                let t = local(day, h, 30);
                let prev = company_mood[i].get(&(t - Duration::hours(1))).copied().unwrap_or(0.0);
                let (e, f): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                price *= 1.0 + 0.004 * prev + 0.002 * e;
                let spread = price * 0.002 * (1.0 + rng.random::<f64>());
                let close = price * (1.0 + 0.001 * f);
                bars.push(StockBar {
                    company: c.name.clone(),
                    timestamp: t,
                    open: round4(price),
                    high: round4(price.max(close) + spread),
                    low: round4(price.min(close) - spread),
                    close: round4(close),
                    adj_close: round4(close),
                    volume: rng.random_range(10_000..500_000),
                });
            }
        }
        let path = stocks_dir.join(format!("{}.csv", slug(&c.name)));
        let file = fs::File::create(&path).map_err(|source| PipelineError::Io { path: path.clone(), source })?;
        write_stock_bars(file, &bars).map_err(|source| PipelineError::Ingest { path: path.clone(), source })?;
    }

    let cfg_path = out.join("config.toml");
    fs::write(&cfg_path, config.to_toml()).map_err(|source| PipelineError::Io { path: cfg_path.clone(), source })?;
    Ok(config)
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_trading_days_skip_weekends_and_holiday() {
        let c = synthetic_config();
        let days = trading_days(&c);
        assert_eq!(days.len(), 30);
        assert_eq!(days[0], NaiveDate::from_ymd_opt(2023, 2, 1).unwrap());
        assert!(!days.contains(&NaiveDate::from_ymd_opt(2023, 2, 20).unwrap()));
        assert!(days.iter().all(|d| d.weekday().number_from_monday() <= 5));
        assert_eq!(*days.last().unwrap(), NaiveDate::from_ymd_opt(2023, 3, 15).unwrap());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate(3, a.path()).unwrap();
        generate(3, b.path()).unwrap();
        for sub in ["config.toml", "tweets/altamed.csv", "tweets/covid.csv", "stocks/juvena.csv"] {
            assert_eq!(fs::read(a.path().join(sub)).unwrap(), fs::read(b.path().join(sub)).unwrap(), "{sub}");
        }
        assert_eq!(fs::read_dir(a.path().join("tweets")).unwrap().count(), 22);
        assert_eq!(fs::read_dir(a.path().join("stocks")).unwrap().count(), 10);
    }
}
