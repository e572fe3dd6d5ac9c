//! Read interface over a preprocessed block index.
//!
//! Query engines are generic over [`BlockSource`]; the paged file store in the
//! `decayreach` crate implements it with I/O accounting, [`MemoryIndex`]
//! implements it in memory for tests and small experiments.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::convert::Infallible;

use crate::contact::{self, BlockSpec, Meeting};
use crate::dataset::TrajectoryDataset;
use crate::io::IoStats;
use crate::model::{ObjectId, Tau};
use crate::reach::{self, BoundaryMode, ReachEntry};

/// Time range of one block as recorded in the time block index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockInfo {
    pub block_id: u32,
    pub tau_first: Tau,
    pub tau_last: Tau,
}

impl BlockInfo {
    pub fn contains(&self, tau: Tau) -> bool {
        self.tau_first <= tau && tau <= self.tau_last
    }
}

impl From<&BlockSpec> for BlockInfo {
    fn from(b: &BlockSpec) -> Self {
        BlockInfo {
            block_id: b.block_id,
            tau_first: b.tau_first,
            tau_last: b.tau_last,
        }
    }
}

/// A block meeting as stored under one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StoredMeeting {
    pub peer: ObjectId,
    pub tau_start: Tau,
    pub tau_end: Tau,
    pub boundary_start: bool,
    pub boundary_end: bool,
}

pub trait BlockSource {
    type Error;

    fn n_objects(&self) -> u32;

    /// Minimum meeting duration the index was built with.
    fn mu(&self) -> Tau;

    fn blocks(&mut self) -> Result<&[BlockInfo], Self::Error>;

    /// Reach entries, excluding the source itself, for each listed source.
    /// Sources without entries may be omitted from the result.
    fn reached(
        &mut self,
        block: u32,
        sources: &[ObjectId],
    ) -> Result<Vec<(ObjectId, Vec<ReachEntry>)>, Self::Error>;

    /// Meetings of each listed object in `block`, sorted by start.
    /// Objects without meetings may be omitted from the result.
    fn meetings(
        &mut self,
        block: u32,
        objects: &[ObjectId],
    ) -> Result<Vec<(ObjectId, Vec<StoredMeeting>)>, Self::Error>;

    /// Pages charged so far by this source.
    fn io(&self) -> IoStats {
        IoStats::default()
    }
}

/// Fully in-memory block index with the same content as the on-disk one.
#[derive(Debug, Clone, Default)]
pub struct MemoryIndex {
    n_objects: u32,
    mu: Tau,
    blocks: Vec<BlockInfo>,
    meetings: Vec<BTreeMap<ObjectId, Vec<StoredMeeting>>>,
    reached: Vec<BTreeMap<ObjectId, Vec<ReachEntry>>>,
    /// Number of (block, object) lookups served, by file.
    pub meeting_lookups: u64,
    pub reached_lookups: u64,
}

impl MemoryIndex {
    /// Runs the contact pipeline and the open-ended reach precomputation on
    /// every block of `ds`.
    pub fn build(
        ds: &TrajectoryDataset,
        ticks_per_block: u32,
        cell_side: f64,
        mu: Tau,
        d_cont: f64,
    ) -> Self {
        let specs = contact::plan_blocks(
            ds.n_ticks(),
            ds.grid.tau_per_tick,
            ticks_per_block,
            cell_side,
        );
        let blocks = specs
            .iter()
            .map(|spec| {
                (
                    BlockInfo::from(spec),
                    contact::detect_block(ds, spec, d_cont, mu),
                )
            })
            .collect();
        Self::from_block_meetings(ds.n_objects(), mu, blocks)
    }

    /// Builds from already assembled block meetings.
    pub fn from_block_meetings(
        n_objects: u32,
        mu: Tau,
        blocks: Vec<(BlockInfo, Vec<Meeting>)>,
    ) -> Self {
        let mut out = MemoryIndex {
            n_objects,
            mu,
            ..Default::default()
        };
        for (info, meetings) in blocks {
            let reach = reach::reach_all(&meetings, mu, &info, BoundaryMode::OpenEnded);
            out.reached.push(
                reach
                    .into_iter()
                    .filter(|r| r.reached.len() > 1)
                    .map(|r| {
                        let src = r.source;
                        (
                            src,
                            r.reached.into_iter().filter(|e| e.object != src).collect(),
                        )
                    })
                    .collect(),
            );
            out.meetings.push(contact::meetings_by_object(&meetings));
            out.blocks.push(info);
        }
        out
    }

    pub fn block_meetings(&self, block: u32) -> &BTreeMap<ObjectId, Vec<StoredMeeting>> {
        &self.meetings[block as usize]
    }

    pub fn block_reached(&self, block: u32) -> &BTreeMap<ObjectId, Vec<ReachEntry>> {
        &self.reached[block as usize]
    }

    /// Mutable access for fault-injection tests.
    pub fn block_meetings_mut(
        &mut self,
        block: u32,
    ) -> &mut BTreeMap<ObjectId, Vec<StoredMeeting>> {
        &mut self.meetings[block as usize]
    }
}

impl BlockSource for MemoryIndex {
    type Error = Infallible;

    fn n_objects(&self) -> u32 {
        self.n_objects
    }

    fn mu(&self) -> Tau {
        self.mu
    }

    fn blocks(&mut self) -> Result<&[BlockInfo], Infallible> {
        Ok(&self.blocks)
    }

    fn reached(
        &mut self,
        block: u32,
        sources: &[ObjectId],
    ) -> Result<Vec<(ObjectId, Vec<ReachEntry>)>, Infallible> {
        self.reached_lookups += sources.len() as u64;
        let map = &self.reached[block as usize];
        Ok(sources
            .iter()
            .filter_map(|s| map.get(s).map(|v| (*s, v.clone())))
            .collect())
    }

    fn meetings(
        &mut self,
        block: u32,
        objects: &[ObjectId],
    ) -> Result<Vec<(ObjectId, Vec<StoredMeeting>)>, Infallible> {
        self.meeting_lookups += objects.len() as u64;
        let map = &self.meetings[block as usize];
        Ok(objects
            .iter()
            .filter_map(|o| map.get(o).map(|v| (*o, v.clone())))
            .collect())
    }
}
