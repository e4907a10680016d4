//! Pipeline orchestration, tabular ingest and the clerical-review service.

pub mod config;
pub mod ingest;
pub mod pipeline;
pub mod review;
pub mod server;
