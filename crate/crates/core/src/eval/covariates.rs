use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::slug;
use crate::panel::Covariate;

use super::EvalError;

/// A labelled choice of sentiment columns. The label is kept verbatim for
/// report headers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CovariateSet {
    pub label: String,
    pub columns: Vec<Covariate>,
}

impl CovariateSet {
    pub fn new(label: impl Into<String>, columns: Vec<Covariate>) -> Self {
        Self { label: label.into(), columns }
    }

    /// File-name form of the label.
    pub fn slug(&self) -> String {
        slug(&self.label)
    }

    pub fn arima_defaults() -> Vec<Self> {
        ["Hist. record", "Companies", "CEOs", "Vaccine", "COVID", "Competitors", "All", "Company&vaccine"]
            .iter()
            .map(|s| s.parse().expect("built-in label"))
            .collect()
    }

    pub fn var_defaults() -> Vec<Self> {
        ["Companies", "CEOs", "Vaccine", "COVID", "Competitors", "All"].iter().map(|s| s.parse().expect("built-in label")).collect()
    }
}

/// `Hist. record` / `history` / `none` select no columns, `All` selects all
/// five, anything else is `&`-separated column names.
impl FromStr for CovariateSet {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let label = s.trim();
        let key = slug(label);
        let columns = match key.as_str() {
            "hist_record" | "history" | "hist" | "none" => Vec::new(),
            "all" => Covariate::ALL.to_vec(),
            "" => return Err(EvalError::BadCovariateSet(s.to_string())),
            _ => {
                let mut cols = Vec::new();
                for tok in label.split('&') {
                    let c: Covariate = tok.parse().map_err(|_| EvalError::BadCovariateSet(s.to_string()))?;
                    if !cols.contains(&c) {
                        cols.push(c);
                    }
                }
                cols
            }
        };
        Ok(Self { label: label.to_string(), columns })
    }
}

impl fmt::Display for CovariateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl Serialize for CovariateSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label)
    }
}

impl<'de> Deserialize<'de> for CovariateSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
