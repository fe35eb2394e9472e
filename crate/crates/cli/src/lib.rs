//! Batch pipeline around `cbct_radon`: configuration, stage orchestration
//! with persisted artifacts, metrics reports and slice export.

pub mod config;
pub mod error;
pub mod export;
pub mod pipeline;

pub use config::{ConfigFile, PhantomSource, RunConfig, Stage};
pub use error::PipelineError;
pub use pipeline::{run_pipeline, MetricRow, RunReport};
