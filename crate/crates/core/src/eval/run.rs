use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arima::{
    auto_select_with, fit_arima_with, forecast_arima, ArimaError, ArimaFit, ArimaGrid, Criterion, FitOptions,
};
use crate::ingest::MarketTime;
use crate::panel::Panel;
use crate::var::{default_p_max, fit_var_labeled, forecast_var, select_var_lag, VarFit};

use super::report::{mape, Cell, EvaluationReport, ModelFamily, ReportRow};
use super::{split_panel, CovariateSet, EvalError, SplitSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArimaSettings {
    pub grid: ArimaGrid,
    pub criterion: Criterion,
    pub covariate_sets: Vec<CovariateSet>,
    /// Refit the selected order on an expanding window and forecast one
    /// step at a time.
    pub rolling: bool,
}

impl Default for ArimaSettings {
    fn default() -> Self {
        Self {
            grid: ArimaGrid::default(),
            criterion: Criterion::Aic,
            covariate_sets: CovariateSet::arima_defaults(),
            rolling: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarSettings {
    /// Largest lag order tried; defaults to `min(10, n/(3k))`.
    pub p_max: Option<usize>,
    pub covariate_sets: Vec<CovariateSet>,
    pub rolling: bool,
}

impl Default for VarSettings {
    fn default() -> Self {
        Self { p_max: Some(10), covariate_sets: CovariateSet::var_defaults(), rolling: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub split: SplitSpec,
    pub arima: ArimaSettings,
    pub var: VarSettings,
}

/// Test-window forecast of one (company, covariate set) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastTrace {
    pub company: String,
    pub covariate_set: CovariateSet,
    pub instants: Vec<MarketTime>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub company: String,
    pub covariate_set: String,
    /// Selected model, e.g. `ARIMA(1,1,0)` or `VAR(2)`.
    pub model: Option<String>,
    pub error: Option<String>,
    pub train_rows: usize,
    pub test_rows: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub traces: Vec<ForecastTrace>,
    pub cells: Vec<CellSummary>,
}

struct CellResult {
    summary: CellSummary,
    outcome: Result<(f64, ForecastTrace), String>,
}

/// Fits every (company, covariate set) cell on the training window and
/// scores its test-window forecast. Fit failures become failed cells.
pub fn run_evaluation(panels: &[Panel], settings: &EvalSettings, family: ModelFamily) -> Result<Evaluation, EvalError> {
    if panels.is_empty() {
        return Err(EvalError::NoPanels);
    }
    settings.split.validate()?;
    let sets = match family {
        ModelFamily::Arima => &settings.arima.covariate_sets,
        ModelFamily::Var => &settings.var.covariate_sets,
    };
    let jobs: Vec<(&Panel, &CovariateSet)> = panels.iter().flat_map(|p| sets.iter().map(move |s| (p, s))).collect();
    let results: Vec<CellResult> = jobs.par_iter().map(|&(panel, set)| evaluate_cell(panel, set, settings, family)).collect();

    let mut rows: Vec<ReportRow> = Vec::with_capacity(panels.len());
    let mut traces = Vec::new();
    let mut cells = Vec::with_capacity(results.len());
    for (chunk, panel) in results.chunks(sets.len().max(1)).zip(panels) {
        let mut row = ReportRow { company: panel.company.clone(), cells: Vec::with_capacity(sets.len()) };
        for res in chunk {
            match &res.outcome {
                Ok((m, trace)) => {
                    row.cells.push(Cell::Value(*m));
                    traces.push(trace.clone());
                }
                Err(reason) => row.cells.push(Cell::Failed(reason.clone())),
            }
            cells.push(res.summary.clone());
        }
        rows.push(row);
    }
    let columns = sets.iter().map(|s| s.label.clone()).collect();
    let report = EvaluationReport::new(family, columns, rows)?;
    Ok(Evaluation { report, traces, cells })
}

fn evaluate_cell(panel: &Panel, set: &CovariateSet, settings: &EvalSettings, family: ModelFamily) -> CellResult {
    let mut summary = CellSummary {
        company: panel.company.clone(),
        covariate_set: set.label.clone(),
        model: None,
        error: None,
        train_rows: 0,
        test_rows: 0,
    };
    let outcome = split_panel(panel, &settings.split).map_err(|e| e.to_string()).and_then(|(train, test)| {
        summary.train_rows = train.len();
        summary.test_rows = test.len();
        let (model, predicted) = match family {
            ModelFamily::Arima => arima_cell(&train, &test, set, &settings.arima),
            ModelFamily::Var => var_cell(&train, &test, set, &settings.var),
        }?;
        summary.model = Some(model);
        let actual = test.open();
        let m = mape(&actual, &predicted).map_err(|e| e.to_string())?;
        let trace = ForecastTrace {
            company: panel.company.clone(),
            covariate_set: set.clone(),
            instants: test.instants(),
            actual,
            predicted,
        };
        Ok((m, trace))
    });
    if let Err(e) = &outcome {
        log::warn!("{family} {} / {}: {e}", panel.company, set.label);
        summary.error = Some(e.clone());
    }
    CellResult { summary, outcome }
}

fn covariates(panel: &Panel, set: &CovariateSet) -> Option<DMatrix<f64>> {
    (!set.columns.is_empty()).then(|| panel.covariate_matrix(&set.columns))
}

fn stack(a: &Panel, b: &Panel, take: usize) -> Panel {
    let mut rows = a.rows.clone();
    rows.extend_from_slice(&b.rows[..take]);
    Panel { company: a.company.clone(), rows }
}

fn arima_cell(train: &Panel, test: &Panel, set: &CovariateSet, s: &ArimaSettings) -> Result<(String, Vec<f64>), String> {
    let opts = FitOptions::default();
    let sel = auto_select_with(&train.open(), covariates(train, set).as_ref(), &s.grid, s.criterion, &opts)
        .map_err(|e| e.to_string())?;
    let fit = sel.best;
    let model = format!("ARIMA{}", fit.order);
    if !s.rolling {
        let pred = forecast_arima(&fit, test.len(), covariates(test, set).as_ref()).map_err(|e| e.to_string())?;
        return Ok((model, pred.point));
    }
    let mut out = Vec::with_capacity(test.len());
    for i in 0..test.len() {
        let window = stack(train, test, i);
        let refit = refit_arima(&window, set, &fit, &opts)?;
        let next = Panel { company: test.company.clone(), rows: vec![test.rows[i]] };
        let pred = forecast_arima(&refit, 1, covariates(&next, set).as_ref()).map_err(|e| e.to_string())?;
        out.push(pred.point[0]);
    }
    Ok((model, out))
}

/// Refits the already selected order; an unconverged refit keeps its best
/// iterate.
fn refit_arima(window: &Panel, set: &CovariateSet, chosen: &ArimaFit, opts: &FitOptions) -> Result<ArimaFit, String> {
    match fit_arima_with(&window.open(), chosen.order, covariates(window, set).as_ref(), opts) {
        Ok(f) => Ok(f),
        Err(ArimaError::NonConvergence { best, .. }) => Ok(*best),
        Err(e) => Err(e.to_string()),
    }
}

fn var_cell(train: &Panel, test: &Panel, set: &CovariateSet, s: &VarSettings) -> Result<(String, Vec<f64>), String> {
    let labels: Vec<String> =
        std::iter::once("open".to_string()).chain(set.columns.iter().map(|c| c.column().to_string())).collect();
    let k = labels.len();
    let data = train.with_open(&set.columns);
    let n = data.nrows();
    let feasible = n.saturating_sub(10) / k;
    let p_max = s.p_max.unwrap_or_else(|| default_p_max(n, k)).min(feasible);
    if p_max == 0 {
        return Err(format!("{n} training rows are too few for a VAR in {k} variables"));
    }
    let (p, fit) = select_var_lag(&data, labels.clone(), p_max).map_err(|e| e.to_string())?;
    let model = format!("VAR({p})");
    if !s.rolling {
        let f = forecast_var(&fit, test.len()).map_err(|e| e.to_string())?;
        return Ok((model, f.column(0).iter().copied().collect()));
    }
    let mut out = Vec::with_capacity(test.len());
    for i in 0..test.len() {
        let window = stack(train, test, i).with_open(&set.columns);
        let refit: VarFit = fit_var_labeled(&window, labels.clone(), p).map_err(|e| e.to_string())?;
        out.push(forecast_var(&refit, 1).map_err(|e| e.to_string())?[(0, 0)]);
    }
    Ok((model, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::market_time_from_local;
    use crate::panel::PanelRow;
    use chrono::{Duration, NaiveDate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Hourly trading rows Feb 1 – Mar 17, with the open following an AR(1)
    /// around 100 and driven by the lagged company sentiment.
    fn synthetic_panel(seed: u64, name: &str) -> Panel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut level: f64 = 100.0;
        let mut day = NaiveDate::from_ymd_opt(2023, 2, 1).unwrap();
        while day <= NaiveDate::from_ymd_opt(2023, 3, 17).unwrap() {
            if chrono::Datelike::weekday(&day).number_from_monday() <= 5 {
                for h in 0..7 {
                    let s: [f64; 5] = std::array::from_fn(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (0.3 * z).tanh()
                    });
                    let e: f64 = StandardNormal.sample(&mut rng);
                    level = 100.0 + 0.8 * (level - 100.0) + 0.5 * e + 2.0 * s[0];
                    let instant = market_time_from_local(day.and_hms_opt(9, 30, 0).unwrap()) + Duration::hours(h);
                    rows.push(PanelRow { instant, open: level, sentiment: s });
                }
            }
            day = day.succ_opt().unwrap();
        }
        Panel { company: name.into(), rows }
    }

    fn small_settings() -> EvalSettings {
        EvalSettings {
            split: SplitSpec::default(),
            arima: ArimaSettings {
                grid: ArimaGrid { max_p: 1, max_d: 1, max_q: 1 },
                covariate_sets: ["Hist. record", "Companies"].iter().map(|s| s.parse().unwrap()).collect(),
                ..Default::default()
            },
            var: VarSettings { p_max: Some(3), covariate_sets: vec!["Companies".parse().unwrap(), "All".parse().unwrap()], rolling: false },
        }
    }

    #[test]
    fn arima_report_shape_and_traces() {
        let panels = vec![synthetic_panel(1, "Acme"), synthetic_panel(2, "Globex")];
        let ev = run_evaluation(&panels, &small_settings(), ModelFamily::Arima).unwrap();
        assert_eq!(ev.report.columns, ["Hist. record", "Companies"]);
        assert_eq!(ev.report.rows.iter().map(|r| r.company.as_str()).collect::<Vec<_>>(), ["Acme", "Globex"]);
        assert_eq!(ev.report.failed_cells(), 0);
        assert_eq!(ev.traces.len(), 4);
        let t = &ev.traces[1];
        assert_eq!(t.actual.len(), t.predicted.len());
        assert!(t.instants.iter().all(|i| i.date_naive() >= NaiveDate::from_ymd_opt(2023, 3, 8).unwrap()));
        let recomputed = mape(&t.actual, &t.predicted).unwrap();
        assert_eq!(ev.report.rows[0].cells[1], Cell::Value(recomputed));
        // The sentiment drives the price, so the observed covariate helps.
        for row in &ev.report.rows {
            assert!(row.cells[1].value().unwrap() < row.cells[0].value().unwrap());
        }
        assert!(ev.cells.iter().all(|c| c.model.as_deref().is_some_and(|m| m.starts_with("ARIMA("))));
    }

    #[test]
    fn var_report_and_determinism() {
        let panels = vec![synthetic_panel(3, "Acme")];
        let a = run_evaluation(&panels, &small_settings(), ModelFamily::Var).unwrap();
        let b = run_evaluation(&panels, &small_settings(), ModelFamily::Var).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.report.failed_cells(), 0);
        assert!(a.cells[1].model.as_deref().unwrap().starts_with("VAR("));
    }

    #[test]
    fn rolling_forecasts_track_the_series() {
        let panels = vec![synthetic_panel(4, "Acme")];
        let mut s = small_settings();
        s.arima.rolling = true;
        s.var.rolling = true;
        let fixed = run_evaluation(&panels, &small_settings(), ModelFamily::Arima).unwrap();
        let rolling = run_evaluation(&panels, &s, ModelFamily::Arima).unwrap();
        let hist = |e: &Evaluation| e.report.rows[0].cells[0].value().unwrap();
        assert!(hist(&rolling) < hist(&fixed));
        let var = run_evaluation(&panels, &s, ModelFamily::Var).unwrap();
        assert_eq!(var.report.failed_cells(), 0);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let mut short = synthetic_panel(5, "Tiny");
        short.rows.retain(|r| r.instant.date_naive() >= NaiveDate::from_ymd_opt(2023, 3, 7).unwrap());
        let panels = vec![synthetic_panel(6, "Acme"), short];
        let ev = run_evaluation(&panels, &small_settings(), ModelFamily::Var).unwrap();
        assert_eq!(ev.report.rows[1].cells.iter().filter(|c| c.value().is_none()).count(), 2);
        assert!(ev.report.mean_row.iter().all(|m| m.partial && m.value.is_some()));
        assert!(ev.cells.iter().filter(|c| c.company == "Tiny").all(|c| c.error.is_some()));
        assert_eq!(run_evaluation(&[], &small_settings(), ModelFamily::Var), Err(EvalError::NoPanels));
    }
}
