//! Mobility warehouse: normalizes weekly point-of-interest visit files into a
//! relational snapshot, answers visit/dwell queries over it, derives policy
//! analytics, renders report bundles, serves aggregates over HTTP, and
//! generates deterministic synthetic inputs for testing.

pub mod analytics;
pub mod api;
pub mod ingest;
pub mod model;
pub mod query;
pub mod report;
pub mod synth;
