//! Per-block hop reachability records.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::contact::{self, Meeting};
use crate::model::{ObjectId, Tau};
use crate::source::{BlockInfo, StoredMeeting};
use crate::sweep::{Arrival, Edge, Spread};

/// One object reached from a block source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReachEntry {
    pub object: ObjectId,
    /// Earliest reach time.
    pub tau_r: Tau,
    /// Fewest hops over everything reached by the end of the block.
    pub hops: u32,
}

/// Everything one source reaches inside one block, source first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockReachRecord {
    pub source: ObjectId,
    pub reached: Vec<ReachEntry>,
}

impl BlockReachRecord {
    pub fn get(&self, object: ObjectId) -> Option<&ReachEntry> {
        self.reached.iter().find(|e| e.object == object)
    }
}

/// How meetings touching the block end are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Only transfers that complete inside the block count.
    InBlock,
    /// A meeting still running at the block end is treated as unbounded, so
    /// the record over-approximates what a continuation could deliver. This
    /// is what index records store: it keeps composed records a superset of
    /// the exact reach set.
    OpenEnded,
}

fn run(
    source: ObjectId,
    meetings: &BTreeMap<ObjectId, Vec<StoredMeeting>>,
    mu: Tau,
    block: &BlockInfo,
    mode: BoundaryMode,
    trace: Option<&mut Vec<Arrival>>,
) -> BlockReachRecord {
    let edge = match mode {
        BoundaryMode::InBlock => Edge::Closed,
        BoundaryMode::OpenEnded => Edge::Open,
    };
    let mut spread = Spread::new(source, block.tau_first, u32::MAX, Tau::MAX, edge);
    let mut lookup = meetings;
    let Ok(_) = spread.run_block(
        block.tau_first,
        block.tau_last,
        mu,
        &mut lookup,
        None,
        trace,
    );
    let mut reached: Vec<ReachEntry> = spread
        .first_arrivals()
        .iter()
        .map(|(&object, &(tau_r, _))| ReachEntry {
            object,
            tau_r,
            hops: spread.hops(object).expect("reached objects are held"),
        })
        .collect();
    reached.sort_by_key(|e| (e.object != source, e.object));
    BlockReachRecord { source, reached }
}

/// Objects reached from `source` within the block, starting at its first
/// instant, with in-block transfers only.
pub fn reach_hop(
    source: ObjectId,
    meetings: &BTreeMap<ObjectId, Vec<StoredMeeting>>,
    mu: Tau,
    block: &BlockInfo,
) -> BlockReachRecord {
    run(source, meetings, mu, block, BoundaryMode::InBlock, None)
}

pub fn reach_hop_with(
    source: ObjectId,
    meetings: &BTreeMap<ObjectId, Vec<StoredMeeting>>,
    mu: Tau,
    block: &BlockInfo,
    mode: BoundaryMode,
) -> BlockReachRecord {
    run(source, meetings, mu, block, mode, None)
}

/// [`reach_hop`] together with every non-dominated `(object, tau, hops)`
/// label in the order the sweep settled them.
pub fn reach_hop_traced(
    source: ObjectId,
    meetings: &BTreeMap<ObjectId, Vec<StoredMeeting>>,
    mu: Tau,
    block: &BlockInfo,
) -> (BlockReachRecord, Vec<(ObjectId, Tau, u32)>) {
    let mut trace = Vec::new();
    let rec = run(
        source,
        meetings,
        mu,
        block,
        BoundaryMode::InBlock,
        Some(&mut trace),
    );
    (
        rec,
        trace
            .into_iter()
            .map(|a| (a.object, a.tau, a.hops))
            .collect(),
    )
}

/// One record per object that takes part in at least one meeting, ordered
/// by source.
pub fn reach_all(
    meetings: &[Meeting],
    mu: Tau,
    block: &BlockInfo,
    mode: BoundaryMode,
) -> Vec<BlockReachRecord> {
    let by_object = contact::meetings_by_object(meetings);
    by_object
        .keys()
        .map(|&s| run(s, &by_object, mu, block, mode, None))
        .collect()
}
