//! File formats, the end-to-end pipeline and plotting on top of `edgeclust-core`.

mod error;
pub mod io;
pub mod pipeline;
pub mod svg;

pub use error::{AppError, AppResult, StageExt};
pub use pipeline::{run_pipeline, Algorithm, DataSource, ResultsReport, RunConfig};
