//! Brute-force reference answers.
//!
//! Nothing here knows about blocks, grids or indexes: meetings come from an
//! all-pairs scan of every instant of the whole timeline, and reachability
//! from hop-layered earliest-arrival relaxation over those meetings.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::contact::Meeting;
use crate::dataset::TrajectoryDataset;
use crate::model::{aggregate_weight, max_hops, DecayParams, HopBudget, ObjectId, Tau};
use crate::query::DecayQuery;
use crate::topk::TopKQuery;

/// All maximal contact runs of at least `mu` instants, over the full
/// timeline. Boundary flags are always false.
pub fn oracle_meetings(ds: &TrajectoryDataset, d_cont: f64, mu: Tau) -> Vec<Meeting> {
    let n = ds.n_objects();
    let d2 = d_cont * d_cont;
    let mut open: BTreeMap<(u32, u32), Tau> = BTreeMap::new();
    let mut out = Vec::new();
    let last = ds.last_tau();
    for tau in 0..=last {
        let pos: Vec<_> = (0..n).map(|o| ds.at_tau(tau, ObjectId(o))).collect();
        for a in 0..n {
            for b in a + 1..n {
                let close = pos[a as usize].dist2(pos[b as usize]) <= d2;
                match (close, open.get(&(a, b)).copied()) {
                    (true, None) => {
                        open.insert((a, b), tau);
                    }
                    (false, Some(s)) => {
                        open.remove(&(a, b));
                        push_meeting(&mut out, a, b, s, tau - 1, mu);
                    }
                    _ => {}
                }
            }
        }
    }
    for ((a, b), s) in open {
        push_meeting(&mut out, a, b, s, last, mu);
    }
    out.sort_by_key(|m| (m.tau_start, m.a, m.b));
    out
}

fn push_meeting(out: &mut Vec<Meeting>, a: u32, b: u32, s: Tau, f: Tau, mu: Tau) {
    if f - s >= mu {
        out.push(Meeting {
            a: ObjectId(a),
            b: ObjectId(b),
            tau_start: s,
            tau_end: f,
            boundary_start: false,
            boundary_end: false,
        });
    }
}

/// Earliest arrival per object for each hop allowance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReach {
    /// `layers[h][o]`: earliest arrival at `o` using at most `h` transfers.
    pub layers: Vec<Vec<Option<Tau>>>,
}

impl OracleReach {
    pub fn tau_r(&self, o: ObjectId) -> Option<Tau> {
        self.layers.last().and_then(|l| l[o.index()])
    }

    /// Fewest transfers that reach `o` by `tau`.
    pub fn hops_by(&self, o: ObjectId, tau: Tau) -> Option<u32> {
        self.layers
            .iter()
            .position(|l| l[o.index()].is_some_and(|t| t <= tau))
            .map(|h| h as u32)
    }

    /// Fewest transfers among arrivals at the earliest time.
    pub fn hops_at_earliest(&self, o: ObjectId) -> Option<u32> {
        let t = self.tau_r(o)?;
        self.hops_by(o, t)
    }

    /// Fewest transfers reaching `o` at any time in the interval.
    pub fn hops_any(&self, o: ObjectId) -> Option<u32> {
        self.layers
            .iter()
            .position(|l| l[o.index()].is_some())
            .map(|h| h as u32)
    }
}

/// Hop-layered relaxation from `source` over `[tau_start, tau_end]`. With
/// `cap == None` layers are added until nothing changes.
pub fn oracle_reach(
    meetings: &[Meeting],
    n_objects: u32,
    source: ObjectId,
    tau_start: Tau,
    tau_end: Tau,
    mu: Tau,
    cap: Option<u32>,
) -> OracleReach {
    let mut base = vec![None; n_objects as usize];
    base[source.index()] = Some(tau_start);
    let mut layers = vec![base];
    let mut h = 0u32;
    while cap.is_none_or(|c| h < c) {
        let prev = layers.last().expect("at least one layer");
        let mut next = prev.clone();
        for m in meetings {
            for (x, y) in [(m.a, m.b), (m.b, m.a)] {
                let Some(t) = prev[x.index()] else { continue };
                let done = m.tau_start.max(t).saturating_add(mu);
                if t <= m.tau_end && done <= m.tau_end && done <= tau_end {
                    let slot = &mut next[y.index()];
                    if slot.is_none_or(|cur| done < cur) {
                        *slot = Some(done);
                    }
                }
            }
        }
        let unchanged = &next == prev;
        layers.push(next);
        h += 1;
        if unchanged && cap.is_none() {
            break;
        }
    }
    OracleReach { layers }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDecay {
    pub reachable: bool,
    pub tau_reached: Option<Tau>,
    pub h_min: Option<u32>,
    pub delivered_weight: f64,
}

pub fn oracle_decay(meetings: &[Meeting], n_objects: u32, q: &DecayQuery, mu: Tau) -> OracleDecay {
    let cap = match max_hops(&q.decay) {
        HopBudget::Bounded(h) => Some(h),
        HopBudget::Unbounded => None,
        HopBudget::SourceOnly => Some(0),
    };
    let reach = oracle_reach(
        meetings,
        n_objects,
        q.source,
        q.tau_start,
        q.tau_end,
        mu,
        cap,
    );
    let tau = reach.tau_r(q.target);
    let source_only = max_hops(&q.decay) == HopBudget::SourceOnly;
    if tau.is_none() || (source_only && q.source != q.target) {
        return OracleDecay {
            reachable: false,
            tau_reached: None,
            h_min: None,
            delivered_weight: 0.0,
        };
    }
    let h = reach.hops_at_earliest(q.target);
    OracleDecay {
        reachable: true,
        tau_reached: tau,
        h_min: h,
        delivered_weight: aggregate_weight(&[(q.decay, h)]),
    }
}

/// Exact top-k: each source contributes according to the fewest transfers
/// it needs to reach an object by the end of the interval.
pub fn oracle_topk(
    meetings: &[Meeting],
    n_objects: u32,
    q: &TopKQuery,
    mu: Tau,
) -> Vec<(ObjectId, f64)> {
    let reaches: Vec<(DecayParams, OracleReach)> = q
        .sources
        .iter()
        .map(|(o, p)| {
            let cap = match max_hops(p) {
                HopBudget::Bounded(h) => Some(h),
                HopBudget::Unbounded => None,
                HopBudget::SourceOnly => Some(0),
            };
            (
                *p,
                oracle_reach(meetings, n_objects, *o, q.tau_start, q.tau_end, mu, cap),
            )
        })
        .collect();
    let mut out: Vec<(ObjectId, f64)> = (0..n_objects)
        .map(ObjectId)
        .map(|o| {
            let terms: Vec<(DecayParams, Option<u32>)> =
                reaches.iter().map(|(p, r)| (*p, r.hops_any(o))).collect();
            (o, aggregate_weight(&terms))
        })
        .filter(|(o, w)| *w > 0.0 || q.sources.iter().any(|s| s.0 == *o))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out.truncate(q.k);
    out
}
