//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! [[companies]]
//! name = "Pfizer"          # identifier, file stem and report row label
//! query = "Pfizer"         # tweet query label
//! ceo = "Albert Bourla"
//!
//! [entities]
//! covid = "COVID"
//! vaccine = "Vaccine"
//!
//! [calendar]
//! tweet_session = ["08:30", "15:30"]
//! price_session = ["09:30", "15:30"]
//! holidays = ["2023-02-20"]
//! weekdays_only = true
//!
//! [split]
//! train_start = "2023-02-01"
//! train_end = "2023-03-07"
//! test_start = "2023-03-08"
//! test_end = "2023-03-19"
//! excluded_dates = ["2023-02-20"]
//!
//! [panel]
//! lag_minutes = 60
//! bucket_minutes = 60
//! bucket_offset_minutes = 30
//! resample = "hourly"      # or "daily"
//!
//! [arima]
//! grid = "5,2,5"           # max p, d, q
//! criterion = "aic"        # or "bic"
//! covariate_sets = ["Hist. record", "Companies", "Company&vaccine"]
//! rolling = false
//!
//! [var]
//! p_max = 10
//! covariate_sets = ["Companies", "All"]
//! rolling = false
//!
//! [sentiment]
//! lexicon = "my_lexicon.tsv"   # optional; bundled lexicon otherwise
//! ```
//!
//! Every section except `companies` may be omitted and falls back to the
//! defaults shown.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Duration, NaiveDate, NaiveTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arima::{ArimaGrid, Criterion};
use crate::eval::{ArimaSettings, CovariateSet, EvalSettings, SplitSpec, VarSettings};
use crate::ingest::TradingCalendar;
use crate::panel::Bucketing;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config syntax: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyEntry {
    pub name: String,
    pub query: String,
    pub ceo: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntityLabels {
    pub covid: String,
    pub vaccine: String,
}

impl Default for EntityLabels {
    fn default() -> Self {
        Self { covid: "COVID".into(), vaccine: "Vaccine".into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session(#[serde(with = "hhmm")] pub NaiveTime, #[serde(with = "hhmm")] pub NaiveTime);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalendarConfig {
    pub tweet_session: Session,
    pub price_session: Session,
    pub holidays: BTreeSet<NaiveDate>,
    pub weekdays_only: bool,
}

impl Default for CalendarConfig {
    fn default() -> Self {
        let t = |h, m| NaiveTime::from_hms_opt(h, m, 0).expect("valid time");
        Self {
            tweet_session: Session(t(8, 30), t(15, 30)),
            price_session: Session(t(9, 30), t(15, 30)),
            holidays: [NaiveDate::from_ymd_opt(2023, 2, 20).expect("valid date")].into(),
            weekdays_only: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resample {
    #[default]
    Hourly,
    Daily,
}

impl FromStr for Resample {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "hourly" => Ok(Self::Hourly),
            "daily" => Ok(Self::Daily),
            _ => Err(ConfigError::Invalid(format!("unknown resample {s:?} (expected hourly|daily)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PanelConfig {
    pub lag_minutes: i64,
    pub bucket_minutes: i64,
    pub bucket_offset_minutes: i64,
    pub resample: Resample,
}

impl Default for PanelConfig {
    fn default() -> Self {
        Self { lag_minutes: 60, bucket_minutes: 60, bucket_offset_minutes: 30, resample: Resample::Hourly }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArimaConfig {
    #[serde(with = "via_str")]
    pub grid: ArimaGrid,
    pub criterion: Criterion,
    pub covariate_sets: Vec<CovariateSet>,
    pub rolling: bool,
}

impl Default for ArimaConfig {
    fn default() -> Self {
        let s = ArimaSettings::default();
        Self { grid: s.grid, criterion: s.criterion, covariate_sets: s.covariate_sets, rolling: s.rolling }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VarConfig {
    pub p_max: Option<usize>,
    pub covariate_sets: Vec<CovariateSet>,
    pub rolling: bool,
}

impl Default for VarConfig {
    fn default() -> Self {
        let s = VarSettings::default();
        Self { p_max: s.p_max, covariate_sets: s.covariate_sets, rolling: s.rolling }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SentimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub companies: Vec<CompanyEntry>,
    #[serde(default)]
    pub entities: EntityLabels,
    #[serde(default)]
    pub calendar: CalendarConfig,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub panel: PanelConfig,
    #[serde(default)]
    pub arima: ArimaConfig,
    #[serde(default)]
    pub var: VarConfig,
    #[serde(default)]
    pub sentiment: SentimentConfig,
}

/// What a tweet stream is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntityKind {
    /// Index into [`Config::companies`].
    Company(usize),
    Ceo(usize),
    Covid,
    Vaccine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entity {
    pub label: String,
    pub kind: EntityKind,
}

impl Entity {
    /// File stem used for this entity's tweet files.
    pub fn slug(&self) -> String {
        slug(&self.label)
    }
}

/// Lowercase alphanumerics with other runs collapsed to `_`.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for ch in label.chars() {
        if ch.is_alphanumeric() {
            out.extend(ch.to_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

const DEFAULT_COMPANIES: [(&str, &str, &str); 10] = [
    ("AbbVie", "AbbVie", "Richard A. Gonzalez"),
    ("AstraZeneca", "AstraZeneca", "Pascal Soriot"),
    ("EliLilly", "Eli Lilly", "David A. Ricks"),
    ("Johnson", "Johnson & Johnson", "Joaquin Duato"),
    ("Merck", "Merck", "Kenneth C. Frazier"),
    ("Moderna", "Moderna", "Stéphane Bancel"),
    ("Nordisk", "Novo Nordisk", "Lars Fruergaard Jørgensen"),
    ("Novartis", "Novartis", "Vas Narasimhan"),
    ("Pfizer", "Pfizer", "Albert Bourla"),
    ("Roche", "Roche", "Severin Schwan"),
];

impl Default for Config {
    /// The ten pharmaceutical companies and the February–March 2023 study
    /// window.
    fn default() -> Self {
        let companies = DEFAULT_COMPANIES
            .iter()
            .map(|&(name, query, ceo)| CompanyEntry { name: name.into(), query: query.into(), ceo: ceo.into() })
            .collect();
        Self {
            companies,
            entities: EntityLabels::default(),
            calendar: CalendarConfig::default(),
            split: SplitSpec::default(),
            panel: PanelConfig::default(),
            arima: ArimaConfig::default(),
            var: VarConfig::default(),
            sentiment: SentimentConfig::default(),
        }
    }
}

impl FromStr for Config {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cfg: Config = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut cfg: Config = text.parse()?;
        if let Some(lex) = &cfg.sentiment.lexicon {
            if lex.is_relative() {
                cfg.sentiment.lexicon = Some(path.parent().unwrap_or(Path::new(".")).join(lex));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.companies.is_empty() {
            return invalid("at least one company is required".into());
        }
        let mut seen = BTreeSet::new();
        for e in self.entities() {
            if e.label.trim().is_empty() {
                return invalid("entity labels must be non-empty".into());
            }
            if !seen.insert(e.slug()) {
                return invalid(format!("entity {:?} collides with another entity's file name", e.label));
            }
        }
        let mut names = BTreeSet::new();
        for c in &self.companies {
            if !names.insert(slug(&c.name)) {
                return invalid(format!("duplicate company name {:?}", c.name));
            }
        }
        self.tweet_calendar()?;
        self.price_calendar()?;
        self.split.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Bucketing::new(self.panel.bucket_minutes, self.panel.bucket_offset_minutes)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.panel.lag_minutes < 0 {
            return invalid("panel lag must be non-negative".into());
        }
        if self.var.p_max == Some(0) {
            return invalid("var.p_max must be at least 1".into());
        }
        Ok(())
    }

    /// Every tweet stream: companies, then CEOs, then COVID and vaccine.
    pub fn entities(&self) -> Vec<Entity> {
        let mut out: Vec<Entity> =
            self.companies.iter().enumerate().map(|(i, c)| Entity { label: c.query.clone(), kind: EntityKind::Company(i) }).collect();
        out.extend(self.companies.iter().enumerate().map(|(i, c)| Entity { label: c.ceo.clone(), kind: EntityKind::Ceo(i) }));
        out.push(Entity { label: self.entities.covid.clone(), kind: EntityKind::Covid });
        out.push(Entity { label: self.entities.vaccine.clone(), kind: EntityKind::Vaccine });
        out
    }

    fn calendar(&self, s: Session) -> Result<TradingCalendar, ConfigError> {
        TradingCalendar::new(s.0, s.1, self.calendar.holidays.iter().copied(), self.calendar.weekdays_only)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn tweet_calendar(&self) -> Result<TradingCalendar, ConfigError> {
        self.calendar(self.calendar.tweet_session)
    }

    pub fn price_calendar(&self) -> Result<TradingCalendar, ConfigError> {
        self.calendar(self.calendar.price_session)
    }

    pub fn bucketing(&self) -> Bucketing {
        Bucketing { width_minutes: self.panel.bucket_minutes, offset_minutes: self.panel.bucket_offset_minutes }
    }

    pub fn lag(&self) -> Duration {
        Duration::minutes(self.panel.lag_minutes)
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            split: self.split.clone(),
            arima: ArimaSettings {
                grid: self.arima.grid,
                criterion: self.arima.criterion,
                covariate_sets: self.arima.covariate_sets.clone(),
                rolling: self.arima.rolling,
            },
            var: VarSettings {
                p_max: self.var.p_max,
                covariate_sets: self.var.covariate_sets.clone(),
                rolling: self.var.rolling,
            },
        }
    }
}

mod hhmm {
    use super::*;

    pub fn serialize<S: Serializer>(t: &NaiveTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.format("%H:%M").to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveTime, D::Error> {
        let raw = String::deserialize(d)?;
        NaiveTime::parse_from_str(&raw, "%H:%M")
            .or_else(|_| NaiveTime::parse_from_str(&raw, "%H:%M:%S"))
            .map_err(|e| serde::de::Error::custom(format!("time {raw:?}: {e}")))
    }
}

mod via_str {
    use super::*;
    use std::fmt::Display;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
