use thiserror::Error;

use crate::dataset::DatasetError;
use crate::learners::LearnerError;
use crate::metrics::MetricsError;
use crate::report::ReportError;
use crate::search::SearchError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Any failure raised by the engine, tagged by the stage that produced it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("learner: {0}")]
    Learner(#[from] LearnerError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("search: {0}")]
    Search(#[from] SearchError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Short name of the pipeline stage that failed.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::Dataset(_) => "dataset",
            Error::Learner(_) => "train",
            Error::Metrics(_) => "metrics",
            Error::Search(_) => "search",
            Error::Report(_) => "report",
            Error::Config(_) => "config",
        }
    }
}
