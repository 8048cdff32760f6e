//! Social-media sentiment and stock-price forecasting.
//!
//! The crate is organised as a pipeline:
//!
//! * [`sentiment`] scores text with a valence lexicon.
//! * [`ingest`] parses tweet and price files and applies the trading calendar.
//! * [`panel`] aggregates sentiment per entity and joins it with prices.
//! * [`arima`] and [`var`] fit, select and forecast the price models.
//! * [`eval`] runs the train/test backtest and renders MAPE reports.
//! * [`pipeline`] wires the stages to the on-disk store used by the CLI.

pub mod arima;
pub mod config;
pub mod eval;
pub mod ingest;
mod linalg;
pub mod optim;
pub mod panel;
pub mod pipeline;
pub mod sentiment;
pub mod synth;
pub mod var;
