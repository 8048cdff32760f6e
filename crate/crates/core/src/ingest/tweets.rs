use std::io::{Read, Write};

use serde::Serialize;

use super::time::{format_market_time, parse_market_time, MarketTime};
use super::{column_index, handle_row_error, IngestError, ParseOptions, Parsed, RowError, Timestamped};

/// One collected tweet. `window_start` is the effective timestamp.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub window_start: MarketTime,
    pub window_end: MarketTime,
    pub text: String,
    pub query: String,
}

impl Timestamped for TweetRecord {
    fn instant(&self) -> MarketTime {
        self.window_start
    }
}

const ID: &[&str] = &["id", "tweet_id", "tweet id"];
const START: &[&str] = &["start", "start_date", "start date", "window_start"];
const END: &[&str] = &["end", "end_date", "end date", "window_end"];
const TEXT: &[&str] = &["text", "tweet_text", "tweet text"];

/// Reads a delimited tweet file with a header naming the id, start, end and
/// text columns. Quoted fields may contain delimiters and newlines.
pub fn parse_tweets<R: Read>(source: R, query: &str, opts: &ParseOptions) -> Result<Parsed<TweetRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().delimiter(opts.delimiter).has_headers(true).from_reader(source);
    let headers = reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?.clone();
    let cols = [
        column_index(&headers, ID)?,
        column_index(&headers, START)?,
        column_index(&headers, END)?,
        column_index(&headers, TEXT)?,
    ];

    let mut parsed = Parsed::default();
    for (idx, row) in reader.records().enumerate() {
        let fallback_line = idx as u64 + 2;
        let result = row.map_err(|e| RowError::from_csv(&e, fallback_line)).and_then(|rec| {
            let line = rec.position().map_or(fallback_line, |p| p.line());
            let field = |i: usize| rec.get(i).ok_or_else(|| RowError::new(line, "missing column"));
            let start = parse_market_time(field(cols[1])?, opts.zone_policy).map_err(|e| RowError::new(line, e.to_string()))?;
            let end = parse_market_time(field(cols[2])?, opts.zone_policy).map_err(|e| RowError::new(line, e.to_string()))?;
            if end < start {
                return Err(RowError::new(line, format!("window end {end} precedes start {start}")));
            }
            Ok(TweetRecord {
                tweet_id: field(cols[0])?.to_string(),
                window_start: start,
                window_end: end,
                text: field(cols[3])?.to_string(),
                query: query.to_string(),
            })
        });
        match result {
            Ok(rec) => parsed.records.push(rec),
            Err(err) => handle_row_error(&mut parsed, err, opts.on_error)?,
        }
    }
    Ok(parsed)
}

/// Writes tweets in the canonical `id,start,end,text` layout.
pub fn write_tweets<W: Write>(sink: W, tweets: &[TweetRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["id", "start", "end", "text"]).map_err(|e| IngestError::Csv(e.to_string()))?;
    for t in tweets {
        w.write_record([
            t.tweet_id.as_str(),
            &format_market_time(&t.window_start),
            &format_market_time(&t.window_end),
            &t.text,
        ])
        .map_err(|e| IngestError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| IngestError::Io(e.to_string()))
}
