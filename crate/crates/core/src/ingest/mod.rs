//! Tweet and stock-bar file parsing, market-time conversion and the trading
//! calendar filter.
//!
//! Files are UTF-8 CSV with a header row and RFC 4180 quoting. Timestamps on
//! disk are ISO-8601 with an explicit offset and are converted to
//! America/New_York on read.

mod bars;
mod calendar;
pub mod time;
mod tweets;

pub use bars::{parse_stock_bars, write_stock_bars, StockBar};
pub use calendar::{apply_calendar, Timestamped, TradingCalendar};
pub use time::{format_market_time, market_time_from_local, parse_market_time, parse_timestamp, to_market_time, MarketTime, ZonePolicy};
pub use tweets::{parse_tweets, write_tweets, TweetRecord};

use chrono::NaiveTime;
use thiserror::Error;

/// What to do with a row that fails to parse or validate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OnError {
    #[default]
    Abort,
    Skip,
}

impl std::str::FromStr for OnError {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abort" => Ok(Self::Abort),
            "skip" => Ok(Self::Skip),
            other => Err(format!("unknown row-error policy {other:?} (expected skip|abort)")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    pub on_error: OnError,
    pub zone_policy: ZonePolicy,
    pub delimiter: u8,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { on_error: OnError::Abort, zone_policy: ZonePolicy::RequireOffset, delimiter: b',' }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

impl RowError {
    fn new(line: u64, reason: impl Into<String>) -> Self {
        Self { line, reason: reason.into() }
    }

    fn from_csv(err: &csv::Error, fallback_line: u64) -> Self {
        let line = err.position().map_or(fallback_line, |p| p.line());
        Self::new(line, err.to_string())
    }
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Parsed records plus the rows skipped under [`OnError::Skip`].
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejected: Vec<RowError>,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Self { records: Vec::new(), rejected: Vec::new() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("row error at {0}")]
    Row(RowError),
    #[error("timestamp {0:?} has no zone offset")]
    Zoneless(String),
    #[error("cannot parse timestamp {0:?}")]
    BadTimestamp(String),
    #[error("missing column (expected one of {0:?})")]
    MissingColumn(Vec<String>),
    #[error("duplicate timestamp {at} for {company}")]
    DuplicateTimestamp { company: String, at: String },
    #[error("session start {start} must precede end {end}")]
    BadSession { start: NaiveTime, end: NaiveTime },
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
}

fn column_index(headers: &csv::StringRecord, aliases: &[&str]) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| {
            let h = h.trim().trim_start_matches('\u{feff}').to_lowercase();
            aliases.contains(&h.as_str())
        })
        .ok_or_else(|| IngestError::MissingColumn(aliases.iter().map(|s| s.to_string()).collect()))
}

fn handle_row_error<T>(parsed: &mut Parsed<T>, err: RowError, policy: OnError) -> Result<(), IngestError> {
    match policy {
        OnError::Abort => Err(IngestError::Row(err)),
        OnError::Skip => {
            log::warn!("skipping {err}");
            parsed.rejected.push(err);
            Ok(())
        }
    }
}
