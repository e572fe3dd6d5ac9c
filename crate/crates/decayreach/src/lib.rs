//! File formats, index storage, workloads and tooling around
//! `decayreach-core`.

pub mod bench;
pub mod error;
pub mod gen;
pub mod report;
pub mod store;
pub mod trajfile;
pub mod tune;
pub mod verify;
pub mod workload;

pub use error::{Error, Result};
