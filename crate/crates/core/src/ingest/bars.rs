use std::io::{Read, Write};

use serde::Serialize;

use super::time::{format_market_time, parse_market_time, MarketTime};
use super::{column_index, handle_row_error, IngestError, ParseOptions, Parsed, RowError, Timestamped};

/// One OHLCV bar in market time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StockBar {
    pub company: String,
    pub timestamp: MarketTime,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

impl Timestamped for StockBar {
    fn instant(&self) -> MarketTime {
        self.timestamp
    }
}

impl StockBar {
    /// Checks positivity and `low ≤ min(open, close) ≤ max(open, close) ≤ high`.
    pub fn validate(&self) -> Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close, self.adj_close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err("prices must be finite and positive".into());
        }
        let lo = self.open.min(self.close);
        let hi = self.open.max(self.close);
        if !(self.low <= lo && hi <= self.high) {
            return Err(format!(
                "OHLC out of order: low {} open {} close {} high {}",
                self.low, self.open, self.close, self.high
            ));
        }
        Ok(())
    }
}

const TIMESTAMP: &[&str] = &["timestamp", "datetime", "date", "time"];
const OPEN: &[&str] = &["open"];
const HIGH: &[&str] = &["high"];
const LOW: &[&str] = &["low"];
const CLOSE: &[&str] = &["close"];
const ADJ_CLOSE: &[&str] = &["adj_close", "adj close", "adjclose", "adjusted_close"];
const VOLUME: &[&str] = &["volume"];

fn parse_volume(raw: &str) -> Option<u64> {
    let raw = raw.trim();
    raw.parse::<u64>().ok().or_else(|| {
        let v: f64 = raw.parse().ok()?;
        (v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64).then_some(v as u64)
    })
}

/// Reads OHLCV bars and returns them sorted by timestamp. Duplicate
/// timestamps are an error regardless of the row-error policy.
pub fn parse_stock_bars<R: Read>(source: R, company: &str, opts: &ParseOptions) -> Result<Parsed<StockBar>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().delimiter(opts.delimiter).has_headers(true).from_reader(source);
    let headers = reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?.clone();
    let cols = [
        column_index(&headers, TIMESTAMP)?,
        column_index(&headers, OPEN)?,
        column_index(&headers, HIGH)?,
        column_index(&headers, LOW)?,
        column_index(&headers, CLOSE)?,
        column_index(&headers, ADJ_CLOSE)?,
        column_index(&headers, VOLUME)?,
    ];

    let mut parsed = Parsed::default();
    for (idx, row) in reader.records().enumerate() {
        let fallback_line = idx as u64 + 2;
        let result = row.map_err(|e| RowError::from_csv(&e, fallback_line)).and_then(|rec| {
            let line = rec.position().map_or(fallback_line, |p| p.line());
            let field = |i: usize| rec.get(i).ok_or_else(|| RowError::new(line, "missing column"));
            let price = |i: usize| -> Result<f64, RowError> {
                let raw = field(cols[i])?;
                raw.trim().parse::<f64>().map_err(|_| RowError::new(line, format!("bad price {raw:?}")))
            };
            let timestamp =
                parse_market_time(field(cols[0])?, opts.zone_policy).map_err(|e| RowError::new(line, e.to_string()))?;
            let raw_volume = field(cols[6])?;
            let bar = StockBar {
                company: company.to_string(),
                timestamp,
                open: price(1)?,
                high: price(2)?,
                low: price(3)?,
                close: price(4)?,
                adj_close: price(5)?,
                volume: parse_volume(raw_volume)
                    .ok_or_else(|| RowError::new(line, format!("bad volume {raw_volume:?}")))?,
            };
            bar.validate().map_err(|m| RowError::new(line, m))?;
            Ok(bar)
        });
        match result {
            Ok(bar) => parsed.records.push(bar),
            Err(err) => handle_row_error(&mut parsed, err, opts.on_error)?,
        }
    }

    parsed.records.sort_by_key(|b| b.timestamp);
    if let Some(w) = parsed.records.windows(2).find(|w| w[0].timestamp == w[1].timestamp) {
        return Err(IngestError::DuplicateTimestamp { company: company.to_string(), at: format_market_time(&w[0].timestamp) });
    }
    Ok(parsed)
}

pub fn write_stock_bars<W: Write>(sink: W, bars: &[StockBar]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| IngestError::Csv(e.to_string());
    w.write_record(["timestamp", "open", "high", "low", "close", "adj_close", "volume"]).map_err(csv_err)?;
    for b in bars {
        w.write_record([
            format_market_time(&b.timestamp),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.adj_close.to_string(),
            b.volume.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| IngestError::Io(e.to_string()))
}
