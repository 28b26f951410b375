//! Scenario runner and table emitter on top of `pv-core`.

pub mod cache;
pub mod fixtures;
pub mod report;
pub mod scenario;
pub mod tables;
