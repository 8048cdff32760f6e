use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::panel::Panel;

use super::EvalError;

/// Inclusive date ranges for training and testing, on New York dates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    #[serde(default)]
    pub excluded_dates: BTreeSet<NaiveDate>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        let d = |m, day| NaiveDate::from_ymd_opt(2023, m, day).expect("valid date");
        Self {
            train_start: d(2, 1),
            train_end: d(3, 7),
            test_start: d(3, 8),
            test_end: d(3, 19),
            excluded_dates: [d(2, 20)].into(),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.train_start > self.train_end {
            return Err(EvalError::BadSplit(format!("train start {} after train end {}", self.train_start, self.train_end)));
        }
        if self.train_end >= self.test_start {
            return Err(EvalError::BadSplit(format!("train end {} must precede test start {}", self.train_end, self.test_start)));
        }
        if self.test_start > self.test_end {
            return Err(EvalError::BadSplit(format!("test start {} after test end {}", self.test_start, self.test_end)));
        }
        Ok(())
    }
}

/// Rows dated in the train range go to the first panel and rows in the test
/// range to the second; excluded dates and rows outside both ranges are
/// dropped.
pub fn split_panel(panel: &Panel, spec: &SplitSpec) -> Result<(Panel, Panel), EvalError> {
    spec.validate()?;
    let mut train = Panel { company: panel.company.clone(), rows: Vec::new() };
    let mut test = train.clone();
    for r in &panel.rows {
        let date = r.instant.date_naive();
        if spec.excluded_dates.contains(&date) {
            continue;
        }
        if (spec.train_start..=spec.train_end).contains(&date) {
            train.rows.push(*r);
        } else if (spec.test_start..=spec.test_end).contains(&date) {
            test.rows.push(*r);
        }
    }
    for (part, p) in [("train", &train), ("test", &test)] {
        if p.is_empty() {
            return Err(EvalError::EmptyPart { company: panel.company.clone(), part });
        }
    }
    Ok((train, test))
}
