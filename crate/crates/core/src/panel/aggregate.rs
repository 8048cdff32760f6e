use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::ingest::{format_market_time, Timestamped, market_time_from_local, parse_market_time, MarketTime, ZonePolicy};
use crate::sentiment::SentimentScore;

use super::PanelError;

/// A tweet reduced to its effective instant and score.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredTweet {
    pub tweet_id: String,
    pub instant: MarketTime,
    pub score: SentimentScore,
}

impl Timestamped for ScoredTweet {
    fn instant(&self) -> MarketTime {
        self.instant
    }
}

/// Fixed-width buckets on New York wall-clock time, aligned so that bucket
/// starts fall on `offset_minutes` past a multiple of the width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucketing {
    pub width_minutes: i64,
    pub offset_minutes: i64,
}

impl Default for Bucketing {
    fn default() -> Self {
        Self { width_minutes: 60, offset_minutes: 30 }
    }
}

impl Bucketing {
    pub fn new(width_minutes: i64, offset_minutes: i64) -> Result<Self, PanelError> {
        if width_minutes <= 0 {
            return Err(PanelError::BadBucket);
        }
        Ok(Self { width_minutes, offset_minutes })
    }

    fn start_local(&self, local: NaiveDateTime) -> NaiveDateTime {
        let minutes = local.and_utc().timestamp().div_euclid(60);
        let start = (minutes - self.offset_minutes).div_euclid(self.width_minutes) * self.width_minutes + self.offset_minutes;
        DateTime::from_timestamp(start * 60, 0).expect("bucket start in range").naive_utc()
    }

    /// Start of the bucket containing `t`.
    pub fn bucket_start(&self, t: &MarketTime) -> MarketTime {
        market_time_from_local(self.start_local(t.naive_local()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesPoint {
    pub instant: MarketTime,
    pub mean: f64,
    pub count: usize,
}

/// Per-bucket mean compound score of one entity. Points are strictly
/// increasing in time and only buckets with at least one tweet appear.
#[derive(Clone, Debug, PartialEq)]
pub struct SentimentSeries {
    pub entity: String,
    pub points: Vec<SeriesPoint>,
}

impl SentimentSeries {
    pub fn get(&self, t: &MarketTime) -> Option<f64> {
        self.points.binary_search_by(|p| p.instant.cmp(t)).ok().map(|i| self.points[i].mean)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn aggregate_entity_sentiment(tweets: &[ScoredTweet], entity: &str, bucketing: Bucketing) -> SentimentSeries {
    let mut buckets: BTreeMap<NaiveDateTime, Vec<f64>> = BTreeMap::new();
    for tw in tweets {
        buckets.entry(bucketing.start_local(tw.instant.naive_local())).or_default().push(tw.score.compound);
    }
    let points = buckets
        .into_iter()
        .map(|(start, values)| {
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let mean = (values.iter().sum::<f64>() / values.len() as f64).clamp(lo, hi);
            SeriesPoint { instant: market_time_from_local(start), mean, count: values.len() }
        })
        .collect();
    SentimentSeries { entity: entity.to_string(), points }
}

/// Mean of the other companies' values at `t`, over those that have one.
/// `Ok(None)` when no other company has a value.
pub fn competitor_sentiment(all: &[SentimentSeries], company: &str, t: &MarketTime) -> Result<Option<f64>, PanelError> {
    if !all.iter().any(|s| s.entity == company) {
        return Err(PanelError::UnknownCompany(company.to_string()));
    }
    let (sum, n) = all
        .iter()
        .filter(|s| s.entity != company)
        .filter_map(|s| s.get(t))
        .fold((0.0, 0usize), |(sum, n), v| (sum + v, n + 1));
    Ok((n > 0).then(|| sum / n as f64))
}

/// Competitor sentiment of `company` at every instant where some other
/// company has a value. `count` is the number of contributing companies.
pub fn competitor_series(all: &[SentimentSeries], company: &str) -> Result<SentimentSeries, PanelError> {
    if !all.iter().any(|s| s.entity == company) {
        return Err(PanelError::UnknownCompany(company.to_string()));
    }
    let mut acc: BTreeMap<MarketTime, (f64, usize)> = BTreeMap::new();
    for s in all.iter().filter(|s| s.entity != company) {
        for p in &s.points {
            let e = acc.entry(p.instant).or_insert((0.0, 0));
            e.0 += p.mean;
            e.1 += 1;
        }
    }
    let points = acc
        .into_iter()
        .map(|(instant, (sum, count))| SeriesPoint { instant, mean: (sum / count as f64).clamp(-1.0, 1.0), count })
        .collect();
    Ok(SentimentSeries { entity: format!("{company} competitors"), points })
}

#[derive(Serialize, Deserialize)]
struct ScoredRow {
    tweet_id: String,
    instant: String,
    neg: f64,
    neu: f64,
    pos: f64,
    compound: f64,
}

pub fn write_scored_tweets<W: Write>(sink: W, tweets: &[ScoredTweet]) -> Result<(), PanelError> {
    let mut w = csv::Writer::from_writer(sink);
    for t in tweets {
        let s = t.score;
        w.serialize(ScoredRow {
            tweet_id: t.tweet_id.clone(),
            instant: format_market_time(&t.instant),
            neg: s.neg,
            neu: s.neu,
            pos: s.pos,
            compound: s.compound,
        })
        .map_err(|e| PanelError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| PanelError::Csv(e.to_string()))
}

pub fn read_scored_tweets<R: Read>(source: R) -> Result<Vec<ScoredTweet>, PanelError> {
    let mut r = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<ScoredRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| PanelError::BadRow { line, reason: e.to_string() })?;
        let instant = parse_market_time(&row.instant, ZonePolicy::RequireOffset)
            .map_err(|e| PanelError::BadRow { line, reason: e.to_string() })?;
        if !(-1.0..=1.0).contains(&row.compound) {
            return Err(PanelError::BadRow { line, reason: format!("compound {} outside [-1, 1]", row.compound) });
        }
        out.push(ScoredTweet {
            tweet_id: row.tweet_id,
            instant,
            score: SentimentScore { neg: row.neg, neu: row.neu, pos: row.pos, compound: row.compound },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn at(day: u32, h: u32, m: u32) -> MarketTime {
        market_time_from_local(NaiveDate::from_ymd_opt(2023, 2, day).unwrap().and_hms_opt(h, m, 0).unwrap())
    }

    fn tweet(t: MarketTime, compound: f64) -> ScoredTweet {
        ScoredTweet { tweet_id: "x".into(), instant: t, score: SentimentScore { compound, ..Default::default() } }
    }

    fn series(entity: &str, pts: &[(MarketTime, f64)]) -> SentimentSeries {
        SentimentSeries {
            entity: entity.into(),
            points: pts.iter().map(|&(instant, mean)| SeriesPoint { instant, mean, count: 1 }).collect(),
        }
    }

    #[test]
    fn bucket_alignment() {
        let b = Bucketing::default();
        assert_eq!(b.bucket_start(&at(15, 8, 30)), at(15, 8, 30));
        assert_eq!(b.bucket_start(&at(15, 9, 29)), at(15, 8, 30));
        assert_eq!(b.bucket_start(&at(15, 9, 30)), at(15, 9, 30));
        assert_eq!(b.bucket_start(&at(15, 0, 10)), at(14, 23, 30));
        assert!(Bucketing::new(0, 0).is_err());
    }

    #[test]
    fn mean_of_two_in_one_bucket() {
        let s = aggregate_entity_sentiment(&[tweet(at(15, 9, 40), 0.2), tweet(at(15, 10, 10), 0.4)], "e", Bucketing::default());
        assert_eq!(s.len(), 1);
        assert!((s.points[0].mean - 0.3).abs() < 1e-15);
        assert_eq!(s.points[0].count, 2);
        assert_eq!(s.points[0].instant, at(15, 9, 30));
    }

    #[test]
    fn single_zero_tweet() {
        let s = aggregate_entity_sentiment(&[tweet(at(15, 11, 0), 0.0)], "e", Bucketing::default());
        assert_eq!((s.points[0].mean, s.points[0].count), (0.0, 1));
    }

    #[test]
    fn empty_bucket_is_omitted() {
        let tw = [tweet(at(15, 9, 45), 0.5), tweet(at(15, 11, 45), -0.5)];
        let s = aggregate_entity_sentiment(&tw, "e", Bucketing::default());
        let got: Vec<_> = s.points.iter().map(|p| (p.instant, p.mean)).collect();
        assert_eq!(got, vec![(at(15, 9, 30), 0.5), (at(15, 11, 30), -0.5)]);
    }

    #[test]
    fn dst_day_buckets_stay_on_the_half_hour() {
        let spring = market_time_from_local(NaiveDate::from_ymd_opt(2023, 3, 13).unwrap().and_hms_opt(10, 5, 0).unwrap());
        let start = Bucketing::default().bucket_start(&spring);
        assert_eq!(start.naive_local().to_string(), "2023-03-13 09:30:00");
    }

    #[test]
    fn competitor_symmetry() {
        let t = at(15, 9, 30);
        let all: Vec<_> = (0..10).map(|i| series(&format!("c{i}"), &[(t, 0.37)])).collect();
        for i in 0..10 {
            let v = competitor_sentiment(&all, &format!("c{i}"), &t).unwrap().unwrap();
            assert!((v - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn competitor_hand_arithmetic() {
        let t = at(15, 9, 30);
        let all: Vec<_> = (1..=10).map(|i| series(&format!("c{i}"), &[(t, i as f64 / 10.0)])).collect();
        let v = competitor_sentiment(&all, "c10", &t).unwrap().unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn competitor_missing_and_unknown() {
        let t = at(15, 9, 30);
        let all = vec![series("a", &[(t, 0.1)]), series("b", &[(at(15, 10, 30), 0.2)])];
        assert_eq!(competitor_sentiment(&all, "a", &t).unwrap(), None);
        assert_eq!(competitor_sentiment(&all, "b", &t).unwrap(), Some(0.1));
        assert!(matches!(competitor_sentiment(&all, "zz", &t), Err(PanelError::UnknownCompany(_))));
    }

    #[test]
    fn competitor_series_matches_pointwise() {
        let (t1, t2) = (at(15, 9, 30), at(15, 10, 30));
        let all = vec![series("a", &[(t1, 0.1)]), series("b", &[(t1, 0.3), (t2, -0.2)]), series("c", &[(t2, 0.4)])];
        let cs = competitor_series(&all, "a").unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.points[0].count, 1);
        assert!((cs.get(&t2).unwrap() - 0.1).abs() < 1e-15);
        for p in &cs.points {
            assert_eq!(Some(p.mean), competitor_sentiment(&all, "a", &p.instant).unwrap());
        }
    }

    #[test]
    fn scored_csv_round_trip() {
        let tw = vec![
            ScoredTweet {
                tweet_id: "17".into(),
                instant: at(15, 9, 31),
                score: SentimentScore { neg: 0.1, neu: 0.6, pos: 0.3, compound: 0.4215 },
            },
            tweet(at(16, 14, 0), -0.25),
        ];
        let mut buf = Vec::new();
        write_scored_tweets(&mut buf, &tw).unwrap();
        assert_eq!(read_scored_tweets(buf.as_slice()).unwrap(), tw);
    }

    proptest! {
        #[test]
        fn mean_is_permutation_invariant_and_bounded(values in prop::collection::vec(-1.0f64..=1.0, 1..40), seed in any::<u64>()) {
            let t = at(15, 10, 0);
            let tweets: Vec<_> = values.iter().map(|&v| tweet(t, v)).collect();
            let mut shuffled = tweets.clone();
            let n = shuffled.len();
            for i in 0..n {
                shuffled.swap(i, (seed as usize).wrapping_mul(31).wrapping_add(i * 7) % n);
            }
            let a = aggregate_entity_sentiment(&tweets, "e", Bucketing::default());
            let b = aggregate_entity_sentiment(&shuffled, "e", Bucketing::default());
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            prop_assert!((a.points[0].mean - b.points[0].mean).abs() < 1e-12);
            prop_assert!(a.points[0].mean >= lo && a.points[0].mean <= hi);
        }

        #[test]
        fn leave_one_out_preserves_mean(values in prop::collection::vec(-1.0f64..=1.0, 10)) {
            let t = at(15, 10, 30);
            let all: Vec<_> = values.iter().enumerate().map(|(i, &v)| series(&format!("c{i}"), &[(t, v)])).collect();
            let comp: f64 = (0..10).map(|i| competitor_sentiment(&all, &format!("c{i}"), &t).unwrap().unwrap()).sum::<f64>() / 10.0;
            let own: f64 = values.iter().sum::<f64>() / 10.0;
            prop_assert!((comp - own).abs() < 1e-14);
        }
    }
}
