//! Detection of automation-vulnerable occupations from task-attribute data:
//! factor analysis of standardized attribute importances, quantile-based
//! susceptibility flags, PAM clustering in factor space and employment
//! growth comparison.

pub mod adequacy;
pub mod clustering;
pub mod config;
pub mod corpus;
pub mod error;
pub mod factors;
pub mod linalg;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod synthetic;
pub mod trends;
pub mod vulnerability;

pub use adequacy::{AdequacyResult, CorrelationMatrix};
pub use clustering::{ClusterSolution, DissimilarityMatrix, Metric, PamInit};
pub use config::PipelineConfig;
pub use corpus::{AttributeCatalog, EmploymentSeries, OccupationMatrix, SocCode};
pub use error::{Error, ErrorKind, Result};
pub use factors::FactorSolution;
pub use nalgebra::DMatrix;
pub use pipeline::{run_command, run_pipeline, Command, RunManifest, Stage};
pub use trends::TrendReport;
pub use vulnerability::VulnerabilityReport;
