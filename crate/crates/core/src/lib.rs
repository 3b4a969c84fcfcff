//! Mock-based unit testing for tabular deep-learning pipelines.
//!
//! The data-preparation stage is tested against an auto-generated mock model
//! and the model-design stage against auto-generated mock data. Each stage
//! produces a [`report::Report`] of findings with suggested fixes.

pub mod checks;
pub mod engine;
pub mod error;
pub mod mock;
pub mod report;
pub mod spec;

pub use error::{Error, Result};
