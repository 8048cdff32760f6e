use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone, Utc};
use chrono_tz::America::New_York;
use chrono_tz::Tz;

use super::IngestError;

/// An instant expressed in New York civil time.
pub type MarketTime = DateTime<Tz>;

/// How to treat timestamps that carry no UTC offset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZonePolicy {
    /// Zoneless input is an error.
    #[default]
    RequireOffset,
    /// Zoneless input is read as UTC.
    AssumeUtc,
}

const NAIVE_FORMATS: &[&str] = &["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];
const OFFSET_FORMATS: &[&str] = &["%Y-%m-%d %H:%M:%S%.f%:z", "%Y-%m-%d %H:%M:%S%.f%z", "%Y-%m-%d %H:%M%:z"];

/// Parses an ISO-8601 timestamp. Accepts RFC 3339 (`T` or space separator,
/// `Z` or numeric offset).
pub fn parse_timestamp(raw: &str, policy: ZonePolicy) -> Result<DateTime<FixedOffset>, IngestError> {
    let s = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t);
    }
    for fmt in OFFSET_FORMATS {
        if let Ok(t) = DateTime::parse_from_str(s, fmt) {
            return Ok(t);
        }
    }
    for fmt in NAIVE_FORMATS {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return match policy {
                ZonePolicy::AssumeUtc => Ok(Utc.from_utc_datetime(&naive).fixed_offset()),
                ZonePolicy::RequireOffset => Err(IngestError::Zoneless(s.to_string())),
            };
        }
    }
    Err(IngestError::BadTimestamp(s.to_string()))
}

/// Re-expresses `t` in America/New_York, honouring daylight saving time.
pub fn to_market_time<Z: TimeZone>(t: &DateTime<Z>) -> MarketTime {
    t.with_timezone(&New_York)
}

/// Parses and converts in one step.
pub fn parse_market_time(raw: &str, policy: ZonePolicy) -> Result<MarketTime, IngestError> {
    parse_timestamp(raw, policy).map(|t| to_market_time(&t))
}

/// Canonical on-disk form: RFC 3339 with the New York offset.
pub fn format_market_time(t: &MarketTime) -> String {
    t.fixed_offset().to_rfc3339()
}

/// Interprets a naive New York wall-clock time. Ambiguous (fall-back) times
/// resolve to the earlier instant; skipped (spring-forward) times to the
/// first valid instant after the gap.
pub fn market_time_from_local(naive: NaiveDateTime) -> MarketTime {
    match New_York.from_local_datetime(&naive) {
        chrono::LocalResult::Single(t) => t,
        chrono::LocalResult::Ambiguous(a, _) => a,
        chrono::LocalResult::None => {
            let shifted = naive + chrono::Duration::hours(1);
            New_York.from_local_datetime(&shifted).earliest().expect("one hour past a DST gap is valid")
        }
    }
}
