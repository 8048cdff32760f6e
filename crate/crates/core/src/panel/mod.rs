//! Hourly entity sentiment series, competitor sentiment, price/sentiment
//! panels and their correlation matrices.

mod aggregate;
mod build;
mod correlation;

pub use aggregate::{
    aggregate_entity_sentiment, competitor_sentiment, competitor_series, read_scored_tweets, write_scored_tweets,
    Bucketing, ScoredTweet, SentimentSeries, SeriesPoint,
};
pub use build::{build_panel, read_panel, resample_daily, write_panel, CategorySeries, Panel, PanelRow};
pub use correlation::{correlation_matrix, pearson, CorrelationMatrix};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the five sentiment columns of a [`Panel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Covariate {
    Company,
    Ceo,
    Vaccine,
    Covid,
    Competitors,
}

impl Covariate {
    pub const ALL: [Covariate; 5] =
        [Covariate::Company, Covariate::Ceo, Covariate::Vaccine, Covariate::Covid, Covariate::Competitors];

    /// Column header in panel files.
    pub fn column(self) -> &'static str {
        match self {
            Self::Company => "companyS",
            Self::Ceo => "ceoS",
            Self::Vaccine => "vaccineS",
            Self::Covid => "covidS",
            Self::Competitors => "competitorsS",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Company => "company",
            Self::Ceo => "ceo",
            Self::Vaccine => "vaccine",
            Self::Covid => "covid",
            Self::Competitors => "competitors",
        };
        f.write_str(s)
    }
}

impl FromStr for Covariate {
    type Err = PanelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_lowercase().as_str() {
            "company" | "companies" => Self::Company,
            "ceo" | "ceos" => Self::Ceo,
            "vaccine" | "vaccines" => Self::Vaccine,
            "covid" => Self::Covid,
            "competitor" | "competitors" => Self::Competitors,
            _ => return Err(PanelError::UnknownCovariate(s.to_string())),
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PanelError {
    #[error("sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("unknown company {0:?}")]
    UnknownCompany(String),
    #[error("unknown covariate {0:?}")]
    UnknownCovariate(String),
    #[error("bucket width must be positive")]
    BadBucket,
    #[error("panel row {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("panel file: {0}")]
    Csv(String),
}
