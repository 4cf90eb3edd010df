//! Datasets, events, and the counting estimator.

mod dataset;
mod estimator;
mod event;

pub use dataset::{bin_labels, CsvOptions, Dataset};
pub use estimator::{check_identified, Estimator, ZeroMassPolicy, MAX_SMOOTHED_CELLS};
pub use event::{CompiledEvent, EventSpec};
