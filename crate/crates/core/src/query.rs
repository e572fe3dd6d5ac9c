//! Single-target reachability queries with transfer decay.
//!
//! A decay query is first rewritten to a hop budget. The reached-hop phase
//! then composes per-block reach records into a superset of every object the
//! source could reach, with a lower bound on its hops, and stops at the first
//! block where the target is admitted. The meetings phase replays the exact
//! sweep up to that block. If the exact sweep has not reached the target yet,
//! composition resumes from the exact frontier after that block.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::io::IoStats;
use crate::model::{assigned_weight, max_hops, DecayParams, HopBudget, ObjectId, Tau};
use crate::reach::ReachEntry;
use crate::source::{BlockInfo, BlockSource, StoredMeeting};
use crate::sweep::{Edge, MeetingLookup, Spread};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayQuery {
    pub source: ObjectId,
    pub target: ObjectId,
    pub decay: DecayParams,
    pub tau_start: Tau,
    pub tau_end: Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopQuery {
    pub source: ObjectId,
    pub target: ObjectId,
    pub budget: HopBudget,
    pub tau_start: Tau,
    pub tau_end: Tau,
}

/// Where the search settled its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Source and target coincide; nothing was read.
    SourceIsTarget,
    /// The composed records never admitted the target: unreachable.
    PrunedAtReachedHop,
    /// The exact sweep reached the target.
    ConfirmedViaMeetings,
    /// The exact sweep ran through the last block without reaching the target.
    ExhaustedBlocks,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::SourceIsTarget => "source_is_target",
            Phase::PrunedAtReachedHop => "pruned_at_reached_hop",
            Phase::ConfirmedViaMeetings => "confirmed_via_meetings",
            Phase::ExhaustedBlocks => "exhausted_blocks",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayAnswer {
    pub reachable: bool,
    pub tau_reached: Option<Tau>,
    /// Fewest hops among arrivals at `tau_reached`.
    pub h_min: Option<u32>,
    /// Weight of the item on arrival, zero when unreachable.
    pub delivered_weight: f64,
    pub phase: Phase,
    pub io: IoStats,
    /// Blocks whose reach records were composed.
    pub reached_blocks: u32,
    /// Blocks swept with meetings.
    pub meeting_blocks: u32,
}

impl DecayAnswer {
    fn unreached(phase: Phase) -> Self {
        DecayAnswer {
            reachable: false,
            tau_reached: None,
            h_min: None,
            delivered_weight: 0.0,
            phase,
            io: IoStats::default(),
            reached_blocks: 0,
            meeting_blocks: 0,
        }
    }

    fn reached(&mut self, tau: Tau, hops: u32, phase: Phase) {
        self.reachable = true;
        self.tau_reached = Some(tau);
        self.h_min = Some(hops);
        self.phase = phase;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryError<E> {
    Source(E),
    EmptyIndex,
    InvalidInterval { start: Tau, end: Tau },
    OutsideIndex { tau: Tau, last: Tau },
    UnknownObject(ObjectId),
    DuplicateSource(ObjectId),
    NoSources,
    ZeroK,
}

impl<E: fmt::Display> fmt::Display for QueryError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryError::Source(e) => write!(f, "index read failed: {e}"),
            QueryError::EmptyIndex => f.write_str("index has no blocks"),
            QueryError::InvalidInterval { start, end } => {
                write!(f, "query interval is empty: start {start} after end {end}")
            }
            QueryError::OutsideIndex { tau, last } => {
                write!(
                    f,
                    "instant {tau} lies beyond the indexed range ending at {last}"
                )
            }
            QueryError::UnknownObject(o) => write!(f, "object {o} is not in the index"),
            QueryError::DuplicateSource(o) => write!(f, "object {o} is listed as a source twice"),
            QueryError::NoSources => f.write_str("at least one source is required"),
            QueryError::ZeroK => f.write_str("k must be at least 1"),
        }
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for QueryError<E> {}

pub fn rewrite_to_hop(q: &DecayQuery) -> HopQuery {
    HopQuery {
        source: q.source,
        target: q.target,
        budget: max_hops(&q.decay),
        tau_start: q.tau_start,
        tau_end: q.tau_end,
    }
}

/// Validated block range of a query interval.
pub(crate) struct Plan {
    pub blocks: Vec<BlockInfo>,
    pub first: usize,
    pub last: usize,
    pub mu: Tau,
}

impl Plan {
    pub fn new<S: BlockSource>(
        src: &mut S,
        tau_start: Tau,
        tau_end: Tau,
        objects: &[ObjectId],
    ) -> Result<Plan, QueryError<S::Error>> {
        if tau_start > tau_end {
            return Err(QueryError::InvalidInterval {
                start: tau_start,
                end: tau_end,
            });
        }
        let n = src.n_objects();
        if let Some(o) = objects.iter().find(|o| o.0 >= n) {
            return Err(QueryError::UnknownObject(*o));
        }
        let mu = src.mu();
        let blocks = src.blocks().map_err(QueryError::Source)?.to_vec();
        let Some(end) = blocks.last() else {
            return Err(QueryError::EmptyIndex);
        };
        if tau_end > end.tau_last {
            return Err(QueryError::OutsideIndex {
                tau: tau_end,
                last: end.tau_last,
            });
        }
        let locate = |tau: Tau| blocks.partition_point(|b| b.tau_last < tau);
        let (first, last) = (locate(tau_start), locate(tau_end));
        Ok(Plan {
            blocks,
            first,
            last,
            mu,
        })
    }
}

/// Meetings of one block, fetched on demand and kept for the block.
pub(crate) struct BlockCache<'a, S: BlockSource> {
    src: &'a mut S,
    block: u32,
    map: BTreeMap<ObjectId, Vec<StoredMeeting>>,
}

impl<'a, S: BlockSource> BlockCache<'a, S> {
    pub fn new(src: &'a mut S, block: u32) -> Self {
        BlockCache {
            src,
            block,
            map: BTreeMap::new(),
        }
    }

    /// Fetches all missing objects in one batched read.
    pub fn prefetch(&mut self, objects: &[ObjectId]) -> Result<(), S::Error> {
        let mut missing: Vec<ObjectId> = objects
            .iter()
            .copied()
            .filter(|o| !self.map.contains_key(o))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        if missing.is_empty() {
            return Ok(());
        }
        for (o, ms) in self.src.meetings(self.block, &missing)? {
            self.map.insert(o, ms);
        }
        for o in missing {
            self.map.entry(o).or_default();
        }
        Ok(())
    }
}

impl<S: BlockSource> MeetingLookup for BlockCache<'_, S> {
    type Error = S::Error;

    fn meetings_of(&mut self, object: ObjectId) -> Result<&[StoredMeeting], S::Error> {
        if !self.map.contains_key(&object) {
            self.prefetch(&[object])?;
        }
        Ok(self.map.get(&object).map(Vec::as_slice).unwrap_or(&[]))
    }
}

/// Advances every member set by one block of reach records. Each set maps an
/// object to a lower bound on its hops; members at their cap are not
/// expanded. Updates use the bounds held at the block start.
pub(crate) fn compose_block<S: BlockSource>(
    src: &mut S,
    block: u32,
    sets: &mut [BTreeMap<ObjectId, u32>],
    caps: &[u32],
) -> Result<(), S::Error> {
    let mut expand: Vec<ObjectId> = sets
        .iter()
        .zip(caps)
        .flat_map(|(set, &cap)| set.iter().filter(move |(_, h)| **h < cap).map(|(o, _)| *o))
        .collect();
    expand.sort_unstable();
    expand.dedup();
    if expand.is_empty() {
        return Ok(());
    }
    let records: BTreeMap<ObjectId, Vec<ReachEntry>> =
        src.reached(block, &expand)?.into_iter().collect();
    for (set, &cap) in sets.iter_mut().zip(caps) {
        let snapshot: Vec<(ObjectId, u32)> = set
            .iter()
            .filter(|(_, h)| **h < cap)
            .map(|(o, h)| (*o, *h))
            .collect();
        for (member, hops) in snapshot {
            for e in records.get(&member).map(Vec::as_slice).unwrap_or(&[]) {
                let bound = hops.saturating_add(e.hops);
                if bound <= cap {
                    let slot = set.entry(e.object).or_insert(bound);
                    *slot = (*slot).min(bound);
                }
            }
        }
    }
    Ok(())
}

fn sweep_block<S: BlockSource>(
    src: &mut S,
    spread: &mut Spread,
    info: &BlockInfo,
    mu: Tau,
    target: ObjectId,
) -> Result<Option<(Tau, u32)>, S::Error> {
    let mut cache = BlockCache::new(src, info.block_id);
    cache.prefetch(&spread.senders())?;
    spread.run_block(
        info.tau_first,
        info.tau_last,
        mu,
        &mut cache,
        Some(target),
        None,
    )
}

/// Objects the composed records admit over the whole interval, with their
/// hop lower bounds. Always a superset of the exactly reachable objects.
pub fn reached_superset<S: BlockSource>(
    src: &mut S,
    q: &HopQuery,
) -> Result<BTreeMap<ObjectId, u32>, QueryError<S::Error>> {
    let plan = Plan::new(src, q.tau_start, q.tau_end, &[q.source, q.target])?;
    let mut members = BTreeMap::from([(q.source, 0)]);
    let Some(cap) = q.budget.cap() else {
        return Ok(members);
    };
    for info in &plan.blocks[plan.first..=plan.last] {
        compose_block(
            src,
            info.block_id,
            core::slice::from_mut(&mut members),
            &[cap],
        )
        .map_err(QueryError::Source)?;
    }
    Ok(members)
}

pub fn answer<S: BlockSource>(
    src: &mut S,
    q: &DecayQuery,
) -> Result<DecayAnswer, QueryError<S::Error>> {
    let mut ans = answer_hop(src, &rewrite_to_hop(q))?;
    ans.delivered_weight = if ans.reachable {
        assigned_weight(&q.decay, ans.h_min)
    } else {
        0.0
    };
    Ok(ans)
}

/// The same query answered by sweeping meetings block by block only.
pub fn answer_baseline<S: BlockSource>(
    src: &mut S,
    q: &DecayQuery,
) -> Result<DecayAnswer, QueryError<S::Error>> {
    let mut ans = baseline_hop(src, &rewrite_to_hop(q))?;
    ans.delivered_weight = if ans.reachable {
        assigned_weight(&q.decay, ans.h_min)
    } else {
        0.0
    };
    Ok(ans)
}

pub fn answer_hop<S: BlockSource>(
    src: &mut S,
    q: &HopQuery,
) -> Result<DecayAnswer, QueryError<S::Error>> {
    run(src, q, true)
}

pub fn baseline_hop<S: BlockSource>(
    src: &mut S,
    q: &HopQuery,
) -> Result<DecayAnswer, QueryError<S::Error>> {
    run(src, q, false)
}

fn run<S: BlockSource>(
    src: &mut S,
    q: &HopQuery,
    two_phase: bool,
) -> Result<DecayAnswer, QueryError<S::Error>> {
    let before = src.io();
    let plan = Plan::new(src, q.tau_start, q.tau_end, &[q.source, q.target])?;
    let mut ans = DecayAnswer::unreached(Phase::PrunedAtReachedHop);
    if q.source == q.target {
        ans.reached(q.tau_start, 0, Phase::SourceIsTarget);
    } else if let Some(cap) = q.budget.cap() {
        if two_phase {
            two_phase_search(src, q, &plan, cap, &mut ans).map_err(QueryError::Source)?;
        } else {
            meetings_search(src, q, &plan, cap, &mut ans).map_err(QueryError::Source)?;
        }
    }
    ans.io = src.io() - before;
    Ok(ans)
}

fn meetings_search<S: BlockSource>(
    src: &mut S,
    q: &HopQuery,
    plan: &Plan,
    cap: u32,
    ans: &mut DecayAnswer,
) -> Result<(), S::Error> {
    let mut spread = Spread::new(q.source, q.tau_start, cap, q.tau_end, Edge::Carry);
    ans.phase = Phase::ExhaustedBlocks;
    for info in &plan.blocks[plan.first..=plan.last] {
        ans.meeting_blocks += 1;
        if let Some((tau, hops)) = sweep_block(src, &mut spread, info, plan.mu, q.target)? {
            ans.reached(tau, hops, Phase::ConfirmedViaMeetings);
            return Ok(());
        }
        if spread.is_settled() {
            break;
        }
    }
    Ok(())
}

fn two_phase_search<S: BlockSource>(
    src: &mut S,
    q: &HopQuery,
    plan: &Plan,
    cap: u32,
    ans: &mut DecayAnswer,
) -> Result<(), S::Error> {
    let mut spread = Spread::new(q.source, q.tau_start, cap, q.tau_end, Edge::Carry);
    let mut members = BTreeMap::from([(q.source, 0)]);
    let mut next = plan.first;
    let mut swept = plan.first;
    loop {
        // Reached-hop phase: find the first block admitting the target.
        let mut admitted = members.contains_key(&q.target).then_some(next);
        let mut k = next;
        while admitted.is_none() && k <= plan.last {
            ans.reached_blocks += 1;
            compose_block(
                src,
                plan.blocks[k].block_id,
                core::slice::from_mut(&mut members),
                &[cap],
            )?;
            if members.contains_key(&q.target) {
                admitted = Some(k);
            }
            k += 1;
        }
        let Some(admitted) = admitted else {
            ans.phase = Phase::PrunedAtReachedHop;
            return Ok(());
        };

        // Meetings phase: exact sweep through the admitting block.
        for info in &plan.blocks[swept..=admitted] {
            ans.meeting_blocks += 1;
            if let Some((tau, hops)) = sweep_block(src, &mut spread, info, plan.mu, q.target)? {
                ans.reached(tau, hops, Phase::ConfirmedViaMeetings);
                return Ok(());
            }
        }
        if admitted == plan.last {
            ans.phase = Phase::ExhaustedBlocks;
            return Ok(());
        }
        swept = admitted + 1;
        next = admitted + 1;
        members = spread.frontier();
    }
}
