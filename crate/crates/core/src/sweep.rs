//! Hop-bounded earliest-arrival sweep over block meetings.
//!
//! Every object keeps a Pareto set of `(tau, hops)` labels: a label survives
//! only if no other label of the same object is both no later and uses no
//! more hops. Labels are expanded in `(tau, hops)` order, so the first label
//! popped for an object carries its earliest reach time and the fewest hops
//! at that time. Between blocks the labels of each object collapse into one
//! label at the next block start with the fewest hops seen so far.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::model::{ObjectId, Tau};
use crate::source::StoredMeeting;

/// How meetings that touch the last instant of the block are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Edge {
    /// Nothing outlives the block.
    Closed,
    /// Meetings flagged `boundary_end` are assumed to last forever.
    Open,
    /// Transfers that overflow a `boundary_end` meeting wait for the
    /// continuation of the same meeting in the next block.
    Carry,
}

pub(crate) trait MeetingLookup {
    type Error;

    fn meetings_of(&mut self, object: ObjectId) -> Result<&[StoredMeeting], Self::Error>;
}

impl MeetingLookup for &BTreeMap<ObjectId, Vec<StoredMeeting>> {
    type Error = core::convert::Infallible;

    fn meetings_of(&mut self, object: ObjectId) -> Result<&[StoredMeeting], Self::Error> {
        Ok(self.get(&object).map(Vec::as_slice).unwrap_or(&[]))
    }
}

/// A transfer still in progress when its meeting reached the block end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pending {
    pub sender: ObjectId,
    pub receiver: ObjectId,
    pub completes_at: Tau,
    pub hops: u32,
}

/// A surviving label, in pop order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Arrival {
    pub object: ObjectId,
    pub tau: Tau,
    pub hops: u32,
}

type Label = (Tau, u32);

#[derive(Debug, Clone)]
pub(crate) struct Spread {
    cap: u32,
    horizon: Tau,
    edge: Edge,
    seed: Option<(ObjectId, Tau)>,
    /// Fewest hops of every object reached in earlier blocks.
    hold: BTreeMap<ObjectId, u32>,
    first: BTreeMap<ObjectId, Label>,
    pending: Vec<Pending>,
}

impl Spread {
    pub fn new(source: ObjectId, start: Tau, cap: u32, horizon: Tau, edge: Edge) -> Self {
        Spread {
            cap,
            horizon,
            edge,
            seed: Some((source, start)),
            hold: BTreeMap::new(),
            first: BTreeMap::new(),
            pending: Vec::new(),
        }
    }

    /// Earliest reach time and the fewest hops at that time, per object.
    pub fn first_arrivals(&self) -> &BTreeMap<ObjectId, Label> {
        &self.first
    }

    /// Fewest hops over all completed blocks, counting an unplanted seed.
    pub fn hops(&self, object: ObjectId) -> Option<u32> {
        match self.seed {
            Some((s, _)) if s == object => Some(0),
            _ => self.hold.get(&object).copied(),
        }
    }

    /// Objects whose labels may still be expanded.
    pub fn senders(&self) -> Vec<ObjectId> {
        let mut out: Vec<ObjectId> = self
            .hold
            .iter()
            .filter(|(_, h)| **h < self.cap)
            .map(|(o, _)| *o)
            .collect();
        out.extend(self.seed.map(|(s, _)| s));
        out.extend(self.pending.iter().map(|p| p.sender));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Known and in-flight objects with their fewest hops.
    pub fn frontier(&self) -> BTreeMap<ObjectId, u32> {
        let mut out = self.hold.clone();
        if let Some((s, _)) = self.seed {
            out.insert(s, 0);
        }
        for p in &self.pending {
            let e = out.entry(p.receiver).or_insert(p.hops);
            *e = (*e).min(p.hops);
        }
        out
    }

    /// No later block can change any label.
    pub fn is_settled(&self) -> bool {
        self.seed.is_none() && self.pending.is_empty() && self.hold.values().all(|h| *h >= self.cap)
    }

    /// Sweeps one block. Returns the first arrival of `stop_at` as soon as it
    /// is popped; the spread is then left mid-block and must not be resumed.
    pub fn run_block<L: MeetingLookup>(
        &mut self,
        tau_first: Tau,
        tau_last: Tau,
        mu: Tau,
        lookup: &mut L,
        stop_at: Option<ObjectId>,
        mut trace: Option<&mut Vec<Arrival>>,
    ) -> Result<Option<Label>, L::Error> {
        let mut heap: BinaryHeap<Reverse<(Tau, u32, ObjectId, bool)>> = BinaryHeap::new();
        let mut labels: BTreeMap<ObjectId, Vec<Label>> = BTreeMap::new();

        for (&o, &h) in &self.hold {
            labels.entry(o).or_default().push((tau_first, h));
            if h < self.cap {
                heap.push(Reverse((tau_first, h, o, true)));
            }
        }
        if let Some((s, t0)) = self.seed {
            if t0 <= tau_last {
                self.seed = None;
                offer(&mut labels, &mut heap, s, t0.max(tau_first), 0);
            }
        }
        if self.edge == Edge::Carry {
            for p in core::mem::take(&mut self.pending) {
                let Some(m) =
                    lookup.meetings_of(p.sender)?.iter().copied().find(|m| {
                        m.peer == p.receiver && m.boundary_start && m.tau_start == tau_first
                    })
                else {
                    continue;
                };
                if p.completes_at <= m.tau_end {
                    offer(&mut labels, &mut heap, p.receiver, p.completes_at, p.hops);
                } else if m.boundary_end {
                    self.pending.push(p);
                }
            }
        }

        while let Some(Reverse((t, h, o, carried))) = heap.pop() {
            if !labels[&o].contains(&(t, h)) {
                continue;
            }
            if !carried {
                if h > 0 {
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.push(Arrival {
                            object: o,
                            tau: t,
                            hops: h,
                        });
                    }
                }
                if let alloc::collections::btree_map::Entry::Vacant(e) = self.first.entry(o) {
                    e.insert((t, h));
                    if stop_at == Some(o) {
                        return Ok(Some((t, h)));
                    }
                }
            }
            if h >= self.cap {
                continue;
            }
            for m in lookup.meetings_of(o)? {
                let open_end = self.edge == Edge::Open && m.boundary_end;
                if !open_end && m.tau_end < t {
                    continue;
                }
                let done = m.tau_start.max(t).saturating_add(mu);
                if done > self.horizon {
                    continue;
                }
                if open_end || done <= m.tau_end {
                    offer(&mut labels, &mut heap, m.peer, done, h + 1);
                } else if self.edge == Edge::Carry && m.boundary_end {
                    let p = Pending {
                        sender: o,
                        receiver: m.peer,
                        completes_at: done,
                        hops: h + 1,
                    };
                    let covered = self.pending.iter().any(|q| {
                        q.sender == p.sender
                            && q.receiver == p.receiver
                            && q.completes_at <= p.completes_at
                            && q.hops <= p.hops
                    });
                    if !covered {
                        self.pending.push(p);
                    }
                }
            }
        }

        for (o, ls) in labels {
            let h = ls
                .iter()
                .map(|l| l.1)
                .min()
                .expect("label list is never empty");
            let e = self.hold.entry(o).or_insert(h);
            *e = (*e).min(h);
        }
        Ok(None)
    }
}

fn offer(
    labels: &mut BTreeMap<ObjectId, Vec<Label>>,
    heap: &mut BinaryHeap<Reverse<(Tau, u32, ObjectId, bool)>>,
    o: ObjectId,
    t: Tau,
    h: u32,
) {
    let ls = labels.entry(o).or_default();
    if ls.iter().any(|&(t2, h2)| t2 <= t && h2 <= h) {
        return;
    }
    ls.retain(|&(t2, h2)| !(t <= t2 && h <= h2));
    ls.push((t, h));
    heap.push(Reverse((t, h, o, false)));
}
