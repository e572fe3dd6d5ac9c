//! Reachability with transfer decay over trajectory data.
//!
//! This crate holds the allocation-only algorithmic core: decay arithmetic,
//! contact and meeting detection, the per-block hop-reachability sweep, the
//! two-phase query engines and a brute-force oracle. Everything that touches
//! files, randomness or threads lives in the `decayreach` crate, which plugs a
//! paged on-disk index into the [`source::BlockSource`] trait defined here.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod contact;
pub mod dataset;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod oracle;
pub mod query;
pub mod reach;
pub mod source;
pub mod topk;

mod sweep;

pub use contact::{BlockSpec, Meeting};
pub use dataset::{Point, TrajectoryDataset};
pub use io::IoStats;
pub use model::{DecayParams, HopBudget, ObjectId, ReachState, Tau, TimeGrid};
pub use query::{DecayAnswer, DecayQuery, HopQuery, Phase};
pub use reach::{BlockReachRecord, ReachEntry};
pub use source::{BlockInfo, BlockSource, MemoryIndex, StoredMeeting};
pub use topk::{TopKAnswer, TopKQuery};
