use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Mean absolute percentage error in percent.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64, EvalError> {
    if actual.len() != forecast.len() {
        return Err(EvalError::LengthMismatch(actual.len(), forecast.len()));
    }
    if actual.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sum = 0.0;
    for (i, (a, f)) in actual.iter().zip(forecast).enumerate() {
        if !a.is_finite() || !f.is_finite() {
            return Err(EvalError::NonFinite(i));
        }
        if *a == 0.0 {
            return Err(EvalError::ZeroActual(i));
        }
        sum += ((a - f) / a).abs();
    }
    Ok(100.0 * sum / actual.len() as f64)
}

/// Arithmetic mean; `None` for an empty slice.
pub fn column_mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "ARIMA")]
    Arima,
    #[serde(rename = "VAR")]
    Var,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Arima => "ARIMA",
            Self::Var => "VAR",
        })
    }
}

impl FromStr for ModelFamily {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "arima" => Ok(Self::Arima),
            "var" => Ok(Self::Var),
            _ => Err(EvalError::UnknownFamily(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Value(f64),
    Failed(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::Failed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub company: String,
    pub cells: Vec<Cell>,
}

/// Mean over a column's successful cells; `partial` when some cells failed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCell {
    pub value: Option<f64>,
    pub partial: bool,
}

/// Company × covariate-set MAPE table with a mean row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub family: ModelFamily,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub mean_row: Vec<MeanCell>,
}

impl EvaluationReport {
    pub fn new(family: ModelFamily, columns: Vec<String>, rows: Vec<ReportRow>) -> Result<Self, EvalError> {
        for (i, r) in rows.iter().enumerate() {
            if r.cells.len() != columns.len() {
                return Err(EvalError::Shape { row: i, expected: columns.len(), got: r.cells.len() });
            }
            if let Some(bad) = r.cells.iter().filter_map(Cell::value).find(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(EvalError::BadMape(bad));
            }
        }
        let mean_row = (0..columns.len())
            .map(|j| {
                let vals: Vec<f64> = rows.iter().filter_map(|r| r.cells[j].value()).collect();
                MeanCell { value: column_mean(&vals), partial: vals.len() < rows.len() }
            })
            .collect();
        Ok(Self { family, columns, rows, mean_row })
    }

    pub fn failed_cells(&self) -> usize {
        self.rows.iter().flat_map(|r| &r.cells).filter(|c| c.value().is_none()).count()
    }

    pub fn cell(&self, company: &str, column: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.rows.iter().find(|r| r.company == company).map(|r| &r.cells[j])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "md" | "markdown" => Ok(Self::Markdown),
            _ => Err(EvalError::Parse(format!("unknown report format {s:?}"))),
        }
    }
}

const MEAN_LABEL: &str = "Mean";
const FAILED_PREFIX: &str = "failed: ";
const PARTIAL_MARK: char = '*';
const MISSING: &str = "NA";

fn fmt_value(v: f64) -> String {
    format!("{v:.7}")
}

fn fmt_cell(c: &Cell) -> String {
    match c {
        Cell::Value(v) => fmt_value(*v),
        Cell::Failed(reason) => format!("{FAILED_PREFIX}{reason}"),
    }
}

fn fmt_mean(m: &MeanCell) -> String {
    match (m.value, m.partial) {
        (None, _) => MISSING.to_string(),
        (Some(v), false) => fmt_value(v),
        (Some(v), true) => format!("{}{PARTIAL_MARK}", fmt_value(v)),
    }
}

/// Values at 7 decimals; failed cells as `failed: <reason>`; a partial mean
/// carries a trailing `*`. The corner cell names the model family.
pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> String {
    let header: Vec<String> = std::iter::once(report.family.to_string()).chain(report.columns.iter().cloned()).collect();
    let mut body: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| std::iter::once(r.company.clone()).chain(r.cells.iter().map(fmt_cell)).collect())
        .collect();
    body.push(std::iter::once(MEAN_LABEL.to_string()).chain(report.mean_row.iter().map(fmt_mean)).collect());

    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            for rec in std::iter::once(&header).chain(&body) {
                w.write_record(rec).expect("writing to memory");
            }
            String::from_utf8(w.into_inner().expect("flushing to memory")).expect("utf-8 input")
        }
        ReportFormat::Markdown => {
            let esc = |s: &String| s.replace('|', "\\|");
            let line = |rec: &[String]| format!("| {} |\n", rec.iter().map(esc).collect::<Vec<_>>().join(" | "));
            let mut out = line(&header);
            out.push_str("|---|");
            out.push_str(&"---:|".repeat(report.columns.len()));
            out.push('\n');
            for rec in &body {
                out.push_str(&line(rec));
            }
            out
        }
    }
}

/// Parses the CSV rendering. The mean row is recomputed from the cells.
pub fn parse_report(text: &str) -> Result<EvaluationReport, EvalError> {
    let perr = |e: csv::Error| EvalError::Parse(e.to_string());
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut recs = r.records();
    let header = recs.next().ok_or_else(|| EvalError::Parse("empty report".into()))?.map_err(perr)?;
    let family: ModelFamily = header.get(0).unwrap_or_default().parse()?;
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut saw_mean = false;
    for rec in recs {
        let rec = rec.map_err(perr)?;
        if saw_mean {
            return Err(EvalError::Parse("rows after the mean row".into()));
        }
        if &rec[0] == MEAN_LABEL {
            saw_mean = true;
            continue;
        }
        let cells = rec
            .iter()
            .skip(1)
            .map(|s| match s.strip_prefix(FAILED_PREFIX) {
                Some(reason) => Ok(Cell::Failed(reason.to_string())),
                None => s.parse::<f64>().map(Cell::Value).map_err(|e| EvalError::Parse(format!("cell {s:?}: {e}"))),
            })
            .collect::<Result<_, _>>()?;
        rows.push(ReportRow { company: rec[0].to_string(), cells });
    }
    if !saw_mean {
        return Err(EvalError::Parse("missing mean row".into()));
    }
    EvaluationReport::new(family, columns, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!((mape(&[100.0, 200.0], &[110.0, 180.0]).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(mape(&[50.0], &[0.0]).unwrap(), 100.0);
    }

    #[test]
    fn mape_errors() {
        assert_eq!(mape(&[1.0, 0.0], &[1.0, 1.0]), Err(EvalError::ZeroActual(1)));
        assert_eq!(mape(&[1.0], &[1.0, 2.0]), Err(EvalError::LengthMismatch(1, 2)));
        assert_eq!(mape(&[], &[]), Err(EvalError::Empty));
        assert_eq!(mape(&[1.0], &[f64::NAN]), Err(EvalError::NonFinite(0)));
    }

    fn two_by_two() -> EvaluationReport {
        EvaluationReport::new(
            ModelFamily::Arima,
            vec!["Hist. record".into(), "Companies".into()],
            vec![
                ReportRow { company: "Acme".into(), cells: vec![Cell::Value(1.25), Cell::Value(2.0)] },
                ReportRow { company: "Globex".into(), cells: vec![Cell::Value(0.75), Cell::Value(3.5)] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_cell_mean_is_the_cell() {
        let r = EvaluationReport::new(
            ModelFamily::Var,
            vec!["Vaccine".into()],
            vec![ReportRow { company: "a".into(), cells: vec![Cell::Value(0.4321)] }],
        )
        .unwrap();
        assert_eq!(r.mean_row, vec![MeanCell { value: Some(0.4321), partial: false }]);
    }

    #[test]
    fn csv_layout() {
        let text = render_report(&two_by_two(), ReportFormat::Csv);
        assert_eq!(
            text,
            "ARIMA,Hist. record,Companies\nAcme,1.2500000,2.0000000\nGlobex,0.7500000,3.5000000\nMean,1.0000000,2.7500000\n"
        );
    }

    #[test]
    fn markdown_has_the_same_numbers() {
        let r = two_by_two();
        let md = render_report(&r, ReportFormat::Markdown);
        let csv = render_report(&r, ReportFormat::Csv);
        let nums = |s: &str| -> Vec<String> {
            s.split(|c: char| c == ',' || c == '|' || c.is_whitespace())
                .filter(|t| t.parse::<f64>().is_ok())
                .map(str::to_string)
                .collect()
        };
        assert_eq!(nums(&md), nums(&csv));
        assert!(md.starts_with("| ARIMA | Hist. record | Companies |\n|---|---:|---:|\n"));
    }

    #[test]
    fn failures_make_the_mean_partial() {
        let r = EvaluationReport::new(
            ModelFamily::Var,
            vec!["COVID".into(), "All".into()],
            vec![
                ReportRow { company: "a".into(), cells: vec![Cell::Value(1.0), Cell::Failed("rank deficient, p=2".into())] },
                ReportRow { company: "b".into(), cells: vec![Cell::Value(2.0), Cell::Failed("x|y".into())] },
            ],
        )
        .unwrap();
        assert_eq!(r.mean_row[0], MeanCell { value: Some(1.5), partial: false });
        assert_eq!(r.mean_row[1], MeanCell { value: None, partial: true });
        assert_eq!(r.failed_cells(), 2);
        let csv = render_report(&r, ReportFormat::Csv);
        assert!(csv.ends_with("Mean,1.5000000,NA\n"));
        assert_eq!(parse_report(&csv).unwrap(), r);
        assert!(render_report(&r, ReportFormat::Markdown).contains("failed: x\\|y"));

        let half = EvaluationReport::new(
            ModelFamily::Var,
            vec!["c".into()],
            vec![
                ReportRow { company: "a".into(), cells: vec![Cell::Value(1.0)] },
                ReportRow { company: "b".into(), cells: vec![Cell::Failed("no".into())] },
            ],
        )
        .unwrap();
        assert!(render_report(&half, ReportFormat::Csv).ends_with("Mean,1.0000000*\n"));
    }

    #[test]
    fn rejects_malformed() {
        let bad = EvaluationReport::new(ModelFamily::Arima, vec!["a".into()], vec![ReportRow { company: "x".into(), cells: vec![] }]);
        assert!(matches!(bad, Err(EvalError::Shape { .. })));
        let neg = EvaluationReport::new(ModelFamily::Arima, vec!["a".into()], vec![ReportRow { company: "x".into(), cells: vec![Cell::Value(-1.0)] }]);
        assert_eq!(neg, Err(EvalError::BadMape(-1.0)));
        assert!(parse_report("ARIMA,a\nx,1.0\n").is_err());
        assert!(parse_report("LSTM,a\nx,1.0\nMean,1.0\n").is_err());
    }

    fn report_strategy() -> impl Strategy<Value = EvaluationReport> {
        (1usize..5, 1usize..6).prop_flat_map(|(ncol, nrow)| {
            let cell = prop_oneof![
                4 => (0u64..100_000_000_000).prop_map(|v| Cell::Value(v as f64 / 1e7)),
                1 => "[a-z ,]{0,12}".prop_map(Cell::Failed),
            ];
            prop::collection::vec(prop::collection::vec(cell, ncol), nrow).prop_map(move |rows| {
                let columns = (0..ncol).map(|j| format!("set {j}")).collect();
                let rows = rows.into_iter().enumerate().map(|(i, cells)| ReportRow { company: format!("co{i}"), cells }).collect();
                EvaluationReport::new(ModelFamily::Arima, columns, rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_mean_identity(r in report_strategy()) {
            let text = render_report(&r, ReportFormat::Csv);
            let back = parse_report(&text).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(render_report(&back, ReportFormat::Csv), text);
            for (j, m) in r.mean_row.iter().enumerate() {
                let vals: Vec<f64> = r.rows.iter().filter_map(|row| row.cells[j].value()).collect();
                if let Some(v) = m.value {
                    prop_assert!((v - vals.iter().sum::<f64>() / vals.len() as f64).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn mape_is_scale_invariant(pairs in prop::collection::vec((1.0f64..1000.0, 0.0f64..2000.0), 1..30), c in 0.001f64..1000.0) {
            let (a, f): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let ca: Vec<f64> = a.iter().map(|v| c * v).collect();
            let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
            let m = mape(&a, &f).unwrap();
            prop_assert!(m >= 0.0);
            prop_assert!((mape(&ca, &cf).unwrap() - m).abs() <= 1e-9 * (1.0 + m));
        }
    }
}
