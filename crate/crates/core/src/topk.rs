//! Top-k objects by aggregate decayed weight from several sources.
//!
//! The bound phase composes reach records per source to get, for every
//! object, an upper bound on the weight it can collect. The refine phase runs
//! one exact sweep per source, block by block, and drops candidates whose
//! upper bound falls below the current k-th best exact weight.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::io::IoStats;
use crate::model::{aggregate_weight, max_hops, DecayParams, ObjectId, Tau};
use crate::query::{compose_block, BlockCache, Plan, QueryError};
use crate::source::BlockSource;
use crate::sweep::{Edge, Spread};

#[derive(Debug, Clone, PartialEq)]
pub struct TopKQuery {
    pub sources: Vec<(ObjectId, DecayParams)>,
    pub tau_start: Tau,
    pub tau_end: Tau,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEntry {
    pub object: ObjectId,
    /// Upper bound on the aggregate weight.
    pub f_max: f64,
    /// Aggregate weight over the blocks swept so far.
    pub f_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopKOptions {
    /// Stop as soon as the surviving candidates are exactly the answer.
    pub early_termination: bool,
}

impl Default for TopKOptions {
    fn default() -> Self {
        TopKOptions {
            early_termination: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopKAnswer {
    /// At most `k` objects, heaviest first, ties by id.
    pub ranked: Vec<(ObjectId, f64)>,
    /// Candidates with a positive upper bound after the bound phase.
    pub initial_candidates: usize,
    /// Id of the last block swept by the refine phase.
    pub last_block_swept: Option<u32>,
    pub early_terminated: bool,
    pub io: IoStats,
}

fn by_weight(a: &(ObjectId, f64), b: &(ObjectId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

fn validate<E>(q: &TopKQuery) -> Result<(), QueryError<E>> {
    if q.sources.is_empty() {
        return Err(QueryError::NoSources);
    }
    if q.k == 0 {
        return Err(QueryError::ZeroK);
    }
    let mut seen = BTreeSet::new();
    for (o, _) in &q.sources {
        if !seen.insert(*o) {
            return Err(QueryError::DuplicateSource(*o));
        }
    }
    Ok(())
}

fn plan<S: BlockSource>(src: &mut S, q: &TopKQuery) -> Result<Plan, QueryError<S::Error>> {
    validate(q)?;
    let objects: Vec<ObjectId> = q.sources.iter().map(|s| s.0).collect();
    Plan::new(src, q.tau_start, q.tau_end, &objects)
}

/// Weight of `object` given each source's hop count to it.
fn weight_of(q: &TopKQuery, hops: impl Fn(usize) -> Option<u32>) -> f64 {
    let terms: Vec<(DecayParams, Option<u32>)> = q
        .sources
        .iter()
        .enumerate()
        .map(|(r, (_, p))| (*p, hops(r)))
        .collect();
    aggregate_weight(&terms)
}

/// Sources and every object with a positive weight bound, ordered by id.
pub fn bound_phase<S: BlockSource>(
    src: &mut S,
    q: &TopKQuery,
) -> Result<Vec<CandidateEntry>, QueryError<S::Error>> {
    let plan = plan(src, q)?;
    bounds(src, q, &plan).map_err(QueryError::Source)
}

fn bounds<S: BlockSource>(
    src: &mut S,
    q: &TopKQuery,
    plan: &Plan,
) -> Result<Vec<CandidateEntry>, S::Error> {
    let caps: Vec<u32> = q
        .sources
        .iter()
        .map(|(_, p)| max_hops(p).cap().unwrap_or(0))
        .collect();
    let mut sets: Vec<BTreeMap<ObjectId, u32>> = q
        .sources
        .iter()
        .map(|(o, _)| BTreeMap::from([(*o, 0)]))
        .collect();
    for info in &plan.blocks[plan.first..=plan.last] {
        compose_block(src, info.block_id, &mut sets, &caps)?;
    }
    let mut universe: BTreeSet<ObjectId> = q.sources.iter().map(|s| s.0).collect();
    universe.extend(sets.iter().flat_map(|s| s.keys().copied()));
    Ok(universe
        .into_iter()
        .map(|o| CandidateEntry {
            object: o,
            f_max: weight_of(q, |r| sets[r].get(&o).copied()),
            f_w: 0.0,
        })
        .filter(|c| c.f_max > 0.0 || q.sources.iter().any(|s| s.0 == c.object))
        .collect())
}

/// Exact sweep over the candidates from the bound phase.
pub fn refine_phase<S: BlockSource>(
    src: &mut S,
    q: &TopKQuery,
    candidates: Vec<CandidateEntry>,
    options: TopKOptions,
) -> Result<TopKAnswer, QueryError<S::Error>> {
    let before = src.io();
    let plan = plan(src, q)?;
    let mut ans = refine(src, q, &plan, candidates, options).map_err(QueryError::Source)?;
    ans.io = src.io() - before;
    Ok(ans)
}

pub fn answer_topk<S: BlockSource>(
    src: &mut S,
    q: &TopKQuery,
) -> Result<TopKAnswer, QueryError<S::Error>> {
    answer_topk_with(src, q, TopKOptions::default())
}

pub fn answer_topk_with<S: BlockSource>(
    src: &mut S,
    q: &TopKQuery,
    options: TopKOptions,
) -> Result<TopKAnswer, QueryError<S::Error>> {
    let before = src.io();
    let plan = plan(src, q)?;
    let run = |src: &mut S| -> Result<TopKAnswer, S::Error> {
        let candidates = bounds(src, q, &plan)?;
        refine(src, q, &plan, candidates, options)
    };
    let mut ans = run(src).map_err(QueryError::Source)?;
    ans.io = src.io() - before;
    Ok(ans)
}

struct Refiner<'q> {
    q: &'q TopKQuery,
    spreads: Vec<Option<Spread>>,
    candidates: BTreeMap<ObjectId, CandidateEntry>,
}

impl Refiner<'_> {
    fn exact_hops(&self, r: usize, o: ObjectId) -> Option<u32> {
        match &self.spreads[r] {
            Some(s) => s.hops(o),
            None => (self.q.sources[r].0 == o).then_some(0),
        }
    }

    /// Recomputes exact weights and drops candidates that cannot enter the
    /// top k. Returns true when the survivors are final.
    fn update(&mut self) -> bool {
        let weights: Vec<(ObjectId, f64)> = self
            .candidates
            .keys()
            .map(|&o| (o, weight_of(self.q, |r| self.exact_hops(r, o))))
            .collect();
        for (o, w) in &weights {
            self.candidates
                .get_mut(o)
                .expect("weights cover candidates")
                .f_w = *w;
        }
        let mut ranked = weights;
        ranked.sort_by(by_weight);
        let k = self.q.k;
        if ranked.len() >= k {
            let threshold = ranked[k - 1].1;
            let keep: BTreeSet<ObjectId> = ranked[..k].iter().map(|r| r.0).collect();
            self.candidates
                .retain(|o, c| keep.contains(o) || c.f_max >= threshold);
        }
        self.candidates.len() <= k && self.candidates.values().all(|c| c.f_w == c.f_max)
    }

    fn senders(&self) -> Vec<ObjectId> {
        let mut out: Vec<ObjectId> = self
            .spreads
            .iter()
            .flatten()
            .flat_map(Spread::senders)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn settled(&self) -> bool {
        self.spreads.iter().flatten().all(Spread::is_settled)
    }
}

fn refine<S: BlockSource>(
    src: &mut S,
    q: &TopKQuery,
    plan: &Plan,
    candidates: Vec<CandidateEntry>,
    options: TopKOptions,
) -> Result<TopKAnswer, S::Error> {
    let spreads = q
        .sources
        .iter()
        .map(|(o, p)| {
            max_hops(p)
                .cap()
                .map(|cap| Spread::new(*o, q.tau_start, cap, q.tau_end, Edge::Carry))
        })
        .collect();
    let initial_candidates = candidates.len();
    let mut st = Refiner {
        q,
        spreads,
        candidates: candidates.into_iter().map(|c| (c.object, c)).collect(),
    };
    let mut ans = TopKAnswer {
        ranked: Vec::new(),
        initial_candidates,
        last_block_swept: None,
        early_terminated: false,
        io: IoStats::default(),
    };
    let mut done = st.update() && options.early_termination;
    for (i, info) in plan.blocks[plan.first..=plan.last].iter().enumerate() {
        if done || st.settled() {
            break;
        }
        let mut cache = BlockCache::new(src, info.block_id);
        cache.prefetch(&st.senders())?;
        for spread in st.spreads.iter_mut().flatten() {
            spread.run_block(
                info.tau_first,
                info.tau_last,
                plan.mu,
                &mut cache,
                None,
                None,
            )?;
        }
        ans.last_block_swept = Some(info.block_id);
        done = st.update() && options.early_termination;
        if done && plan.first + i < plan.last {
            ans.early_terminated = true;
        }
    }
    let mut ranked: Vec<(ObjectId, f64)> = st
        .candidates
        .values()
        .filter(|c| c.f_w > 0.0 || q.sources.iter().any(|s| s.0 == c.object))
        .map(|c| (c.object, c.f_w))
        .collect();
    ranked.sort_by(by_weight);
    ranked.truncate(q.k);
    ans.ranked = ranked;
    Ok(ans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::source::{BlockInfo, MemoryIndex};
    use alloc::vec;

    fn chain_index() -> MemoryIndex {
        let info = BlockInfo {
            block_id: 0,
            tau_first: 0,
            tau_last: 9,
        };
        MemoryIndex::from_block_meetings(5, 2, vec![(info, fixtures::chain_meetings())])
    }

    fn params(w: f64, d: f64, nu: f64) -> DecayParams {
        DecayParams::new(w, d, nu).unwrap()
    }

    #[test]
    fn two_sources_aggregate() {
        let mut idx = chain_index();
        let q = TopKQuery {
            sources: vec![
                (ObjectId(1), params(1.0, 0.2, 0.6)),
                (ObjectId(2), params(2.0, 0.5, 0.4)),
            ],
            tau_start: 0,
            tau_end: 9,
            k: 5,
        };
        let a = answer_topk(&mut idx, &q).unwrap();
        // From object 1: 3 at one hop, 2 and 4 at two hops.
        // From object 2 (cap 2): 3 at one hop, 4 at one hop, 1 never (meeting over).
        let mut expect = vec![
            (ObjectId(2), 0.64 + 2.0),
            (ObjectId(4), 0.64 + 1.0),
            (ObjectId(3), 0.8 + 1.0),
            (ObjectId(1), 1.0),
        ];
        expect.sort_by(by_weight);
        assert_eq!(a.ranked.len(), expect.len());
        for (got, want) in a.ranked.iter().zip(&expect) {
            assert_eq!(got.0, want.0);
            assert!((got.1 - want.1).abs() < 1e-12);
        }
    }

    #[test]
    fn early_termination_does_not_change_answer() {
        let mut idx = chain_index();
        for k in 1..=5 {
            let q = TopKQuery {
                sources: vec![
                    (ObjectId(1), params(1.0, 0.2, 0.6)),
                    (ObjectId(4), params(1.0, 0.1, 0.5)),
                ],
                tau_start: 0,
                tau_end: 9,
                k,
            };
            let fast = answer_topk(&mut idx, &q).unwrap();
            let full = answer_topk_with(
                &mut idx,
                &q,
                TopKOptions {
                    early_termination: false,
                },
            )
            .unwrap();
            assert_eq!(fast.ranked, full.ranked, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_queries() {
        let mut idx = chain_index();
        let p = params(1.0, 0.2, 0.6);
        let mut q = TopKQuery {
            sources: vec![],
            tau_start: 0,
            tau_end: 9,
            k: 1,
        };
        assert_eq!(answer_topk(&mut idx, &q), Err(QueryError::NoSources));
        q.sources = vec![(ObjectId(1), p), (ObjectId(1), p)];
        assert_eq!(
            answer_topk(&mut idx, &q),
            Err(QueryError::DuplicateSource(ObjectId(1)))
        );
        q.sources = vec![(ObjectId(1), p)];
        q.k = 0;
        assert_eq!(answer_topk(&mut idx, &q), Err(QueryError::ZeroK));
    }
}
