use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate, NaiveTime, Weekday};
use serde::{Deserialize, Serialize};

use super::{IngestError, MarketTime};

/// Weekday, holiday and session-hour rules for valid observation instants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingCalendar {
    session_start: NaiveTime,
    session_end: NaiveTime,
    holidays: BTreeSet<NaiveDate>,
    weekdays_only: bool,
}

/// Anything that sits at a market-time instant.
pub trait Timestamped {
    fn instant(&self) -> MarketTime;
}

impl Timestamped for MarketTime {
    fn instant(&self) -> MarketTime {
        *self
    }
}

impl TradingCalendar {
    pub fn new(
        session_start: NaiveTime,
        session_end: NaiveTime,
        holidays: impl IntoIterator<Item = NaiveDate>,
        weekdays_only: bool,
    ) -> Result<Self, IngestError> {
        if session_start >= session_end {
            return Err(IngestError::BadSession { start: session_start, end: session_end });
        }
        Ok(Self { session_start, session_end, holidays: holidays.into_iter().collect(), weekdays_only })
    }

    pub fn session_start(&self) -> NaiveTime {
        self.session_start
    }

    pub fn session_end(&self) -> NaiveTime {
        self.session_end
    }

    pub fn holidays(&self) -> &BTreeSet<NaiveDate> {
        &self.holidays
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
        !(self.weekdays_only && weekend) && !self.holidays.contains(&date)
    }

    /// Trading day and time of day within `[session_start, session_end]`.
    pub fn contains(&self, t: &MarketTime) -> bool {
        let local = t.naive_local();
        let tod = local.time();
        self.is_trading_day(local.date()) && tod >= self.session_start && tod <= self.session_end
    }
}

/// Keeps the records the calendar admits, preserving order.
pub fn apply_calendar<T: Timestamped>(records: impl IntoIterator<Item = T>, cal: &TradingCalendar) -> Vec<T> {
    records.into_iter().filter(|r| cal.contains(&r.instant())).collect()
}
