use std::io::{Read, Write};

use chrono::Duration;
use nalgebra::DMatrix;

use crate::ingest::{format_market_time, parse_market_time, MarketTime, StockBar, ZonePolicy};

use super::{Covariate, PanelError, SentimentSeries};

/// The five sentiment series that feed one company's panel.
#[derive(Clone, Debug, PartialEq)]
pub struct CategorySeries {
    pub company_name: String,
    pub company: SentimentSeries,
    pub ceo: SentimentSeries,
    pub vaccine: SentimentSeries,
    pub covid: SentimentSeries,
    pub competitors: SentimentSeries,
}

impl CategorySeries {
    pub fn get(&self, c: Covariate) -> &SentimentSeries {
        match c {
            Covariate::Company => &self.company,
            Covariate::Ceo => &self.ceo,
            Covariate::Vaccine => &self.vaccine,
            Covariate::Covid => &self.covid,
            Covariate::Competitors => &self.competitors,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelRow {
    pub instant: MarketTime,
    pub open: f64,
    /// Indexed by [`Covariate::index`].
    pub sentiment: [f64; 5],
}

impl PanelRow {
    pub fn get(&self, c: Covariate) -> f64 {
        self.sentiment[c.index()]
    }
}

/// Open prices joined with lagged sentiment for one company.
#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub company: String,
    pub rows: Vec<PanelRow>,
}

impl Panel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn instants(&self) -> Vec<MarketTime> {
        self.rows.iter().map(|r| r.instant).collect()
    }

    pub fn open(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.open).collect()
    }

    pub fn column(&self, c: Covariate) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(c)).collect()
    }

    /// `n × covs.len()` matrix of the chosen sentiment columns.
    pub fn covariate_matrix(&self, covs: &[Covariate]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), covs.len(), |t, j| self.rows[t].get(covs[j]))
    }

    /// Open price followed by the chosen sentiment columns.
    pub fn with_open(&self, covs: &[Covariate]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), covs.len() + 1, |t, j| if j == 0 { self.rows[t].open } else { self.rows[t].get(covs[j - 1]) })
    }
}

/// Attaches to each price at `t` the sentiment bucket starting at `t − lag`.
/// Prices without a value in every category are dropped.
pub fn build_panel(prices: &[StockBar], series: &CategorySeries, lag: Duration) -> Panel {
    let mut bars: Vec<&StockBar> = prices.iter().collect();
    bars.sort_by_key(|b| b.timestamp);
    bars.dedup_by_key(|b| b.timestamp);
    let rows: Vec<PanelRow> = bars
        .into_iter()
        .filter_map(|bar| {
            let key = bar.timestamp - lag;
            let mut sentiment = [0.0; 5];
            for c in Covariate::ALL {
                sentiment[c.index()] = series.get(c).get(&key)?;
            }
            Some(PanelRow { instant: bar.timestamp, open: bar.open, sentiment })
        })
        .collect();
    if rows.is_empty() {
        log::warn!("panel for {} is empty: no price instant has sentiment in every category", series.company_name);
    }
    Panel { company: series.company_name.clone(), rows }
}

/// One row per New York trading date: the first open of the day and the
/// mean of that day's sentiment values.
pub fn resample_daily(panel: &Panel) -> Panel {
    let mut rows: Vec<PanelRow> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for r in &panel.rows {
        match rows.last_mut() {
            Some(last) if last.instant.date_naive() == r.instant.date_naive() => {
                for (a, b) in last.sentiment.iter_mut().zip(r.sentiment) {
                    *a += b;
                }
                *counts.last_mut().unwrap() += 1;
            }
            _ => {
                rows.push(*r);
                counts.push(1);
            }
        }
    }
    for (r, n) in rows.iter_mut().zip(counts) {
        for s in &mut r.sentiment {
            *s = (*s / n as f64).clamp(-1.0, 1.0);
        }
    }
    Panel { company: panel.company.clone(), rows }
}

const HEADER: [&str; 7] = ["instant", "open", "companyS", "ceoS", "vaccineS", "covidS", "competitorsS"];

pub fn write_panel<W: Write>(sink: W, panel: &Panel) -> Result<(), PanelError> {
    let err = |e: csv::Error| PanelError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER).map_err(err)?;
    for r in &panel.rows {
        let mut rec = vec![format_market_time(&r.instant), r.open.to_string()];
        rec.extend(r.sentiment.iter().map(f64::to_string));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| PanelError::Csv(e.to_string()))
}

pub fn read_panel<R: Read>(source: R, company: &str) -> Result<Panel, PanelError> {
    let mut r = csv::Reader::from_reader(source);
    let headers = r.headers().map_err(|e| PanelError::Csv(e.to_string()))?.clone();
    if headers.iter().map(str::trim).ne(HEADER) {
        return Err(PanelError::Csv(format!("expected header {}", HEADER.join(","))));
    }
    let mut rows: Vec<PanelRow> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 2;
        let bad = |reason: String| PanelError::BadRow { line, reason };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let instant = parse_market_time(&rec[0], ZonePolicy::RequireOffset).map_err(|e| bad(e.to_string()))?;
        let num = |j: usize| rec[j].trim().parse::<f64>().map_err(|e| bad(format!("{}: {e}", HEADER[j])));
        let open = num(1)?;
        if !(open > 0.0 && open.is_finite()) {
            return Err(bad(format!("open price {open} must be positive")));
        }
        let mut sentiment = [0.0; 5];
        for (k, s) in sentiment.iter_mut().enumerate() {
            *s = num(k + 2)?;
            if !(-1.0..=1.0).contains(s) {
                return Err(bad(format!("{} = {s} outside [-1, 1]", HEADER[k + 2])));
            }
        }
        if rows.last().is_some_and(|p| p.instant >= instant) {
            return Err(bad("instants must be strictly increasing".into()));
        }
        rows.push(PanelRow { instant, open, sentiment });
    }
    Ok(Panel { company: company.to_string(), rows })
}
