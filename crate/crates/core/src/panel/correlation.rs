use std::io::Write;

use serde::Serialize;

use super::{Covariate, Panel, PanelError};

/// Sample Pearson correlation, computed in two passes.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, PanelError> {
    if x.len() != y.len() {
        return Err(PanelError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(PanelError::TooFew(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(PanelError::NonFinite);
    }
    if is_constant(x) || is_constant(y) {
        return Err(PanelError::ZeroVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(PanelError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Symmetric matrix of pairwise correlations. Undefined entries (a constant
/// variable) are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn from_columns(labels: Vec<String>, columns: &[Vec<f64>]) -> Result<Self, PanelError> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if n < 2 {
            return Err(PanelError::TooFew(n));
        }
        let mut values = vec![vec![None; k]; k];
        for i in 0..k {
            for j in i..k {
                let r = match pearson(&columns[i], &columns[j]) {
                    Ok(r) => Some(if i == j { 1.0 } else { r }),
                    Err(PanelError::ZeroVariance) => None,
                    Err(e) => return Err(e),
                };
                values[i][j] = r;
                values[j][i] = r;
            }
        }
        Ok(Self { labels, values })
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        self.values[i][j]
    }

    /// Header row of labels, then one labelled row per variable; `NA` marks
    /// undefined entries.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), PanelError> {
        let err = |e: csv::Error| PanelError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).map_err(err)?;
        for (label, row) in self.labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.map_or_else(|| "NA".to_string(), |r| format!("{r:.6}"))));
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| PanelError::Csv(e.to_string()))
    }
}

/// Correlations among the open price and the five sentiment columns.
pub fn correlation_matrix(panel: &Panel) -> Result<CorrelationMatrix, PanelError> {
    let mut labels = vec!["open".to_string()];
    let mut columns = vec![panel.open()];
    for c in Covariate::ALL {
        labels.push(c.column().to_string());
        columns.push(panel.column(c));
    }
    CorrelationMatrix::from_columns(labels, &columns)
}
