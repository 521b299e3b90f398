//! Core library for a human-in-the-loop platform that curates long, dense
//! image descriptions.

pub mod error;
pub mod eval;
pub mod export;
pub mod metrics;
pub mod model;
pub mod project;
pub mod report;
pub mod seeding;
pub mod store;
pub mod sxs;
pub mod workflow;

pub use error::{ClientError, Error, Result};
pub use model::{
    BoundingBox, DescriptionRound, FiveMetricRating, ImageRecord, Metric, ObjectAnnotation, Provenance,
    SeedCaption, Task2Config, Task2State, Task2Status, Validate, Violation,
};
pub use project::{Project, ProjectConfig, Subset, SubsetSource};
pub use store::{Command, LogEntry, Store};
pub use sxs::{PresentedItem, SxSAggregate, SxSItem, SxSSource};
