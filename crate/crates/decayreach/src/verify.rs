//! Cross-checks of the index-backed engines against the brute-force oracle.

use rayon::prelude::*;
use serde::Serialize;

use decayreach_core::contact::Meeting;
use decayreach_core::model::{max_hops, HopBudget};
use decayreach_core::oracle::{
    oracle_decay, oracle_meetings, oracle_reach, oracle_topk, OracleDecay,
};
use decayreach_core::query::{answer, answer_baseline, reached_superset, rewrite_to_hop};
use decayreach_core::topk::{bound_phase, refine_phase, TopKOptions};
use decayreach_core::{DecayAnswer, DecayQuery, ObjectId, Phase, TopKQuery, TrajectoryDataset};

use crate::error::{Error, Result};
use crate::store::IndexPackage;

pub const THREADS_ENV: &str = "DECAYREACH_THREADS";

/// Worker pool sized by `DECAYREACH_THREADS`, or by rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Error::Invalid(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Invalid(e.to_string()))
}

/// Oracle meetings for the dataset an index was built from.
pub fn reference_meetings(pkg: &IndexPackage, ds: &TrajectoryDataset) -> Result<Vec<Meeting>> {
    let m = pkg.meta();
    if ds.n_objects() != m.n_objects
        || ds.n_ticks() != m.n_ticks
        || ds.grid.tau_per_tick != m.tau_per_tick
    {
        return Err(Error::Format {
            path: pkg.dir().to_path_buf(),
            msg: "dataset does not match the index".into(),
        });
    }
    Ok(oracle_meetings(ds, m.d_cont, m.mu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheck {
    pub query: DecayQuery,
    pub engine: DecayAnswer,
    pub baseline: DecayAnswer,
    pub oracle: OracleDecay,
    /// Every object the oracle reaches is in the composed superset with a
    /// hop bound no larger than its exact hop count.
    pub superset_holds: bool,
}

impl DecayCheck {
    fn key(a: &DecayAnswer) -> (bool, Option<u32>, Option<u32>) {
        (a.reachable, a.tau_reached, a.h_min)
    }

    pub fn engine_matches(&self) -> bool {
        Self::key(&self.engine)
            == (
                self.oracle.reachable,
                self.oracle.tau_reached,
                self.oracle.h_min,
            )
    }

    pub fn baseline_matches(&self) -> bool {
        Self::key(&self.baseline)
            == (
                self.oracle.reachable,
                self.oracle.tau_reached,
                self.oracle.h_min,
            )
    }

    pub fn pruned(&self) -> bool {
        self.engine.phase == Phase::PrunedAtReachedHop
    }
}

pub fn check_decay(
    pkg: &IndexPackage,
    meetings: &[Meeting],
    queries: &[DecayQuery],
) -> Result<Vec<DecayCheck>> {
    let meta = pkg.meta();
    let run = |q: &DecayQuery| -> Result<DecayCheck> {
        let engine = answer(&mut pkg.session(), q)?;
        let baseline = answer_baseline(&mut pkg.session(), q)?;
        let oracle = oracle_decay(meetings, meta.n_objects, q, meta.mu);
        let superset = reached_superset(&mut pkg.session(), &rewrite_to_hop(q))?;
        let cap = match max_hops(&q.decay) {
            HopBudget::Bounded(h) => Some(h),
            HopBudget::Unbounded => None,
            HopBudget::SourceOnly => Some(0),
        };
        let exact = oracle_reach(
            meetings,
            meta.n_objects,
            q.source,
            q.tau_start,
            q.tau_end,
            meta.mu,
            cap,
        );
        let superset_holds = (0..meta.n_objects)
            .map(ObjectId)
            .all(|o| match exact.hops_any(o) {
                Some(h) => superset.get(&o).is_some_and(|b| *b <= h),
                None => true,
            });
        Ok(DecayCheck {
            query: *q,
            engine,
            baseline,
            oracle,
            superset_holds,
        })
    };
    worker_pool()?.install(|| queries.par_iter().map(run).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopKCheck {
    pub query: TopKQuery,
    pub ranked: Vec<(ObjectId, f64)>,
    pub oracle: Vec<(ObjectId, f64)>,
    /// Objects whose exact weight exceeds the bound from the bound phase.
    pub bound_violations: Vec<ObjectId>,
}

impl TopKCheck {
    pub fn matches(&self) -> bool {
        self.ranked == self.oracle
    }
}

pub fn check_topk(
    pkg: &IndexPackage,
    meetings: &[Meeting],
    queries: &[TopKQuery],
) -> Result<Vec<TopKCheck>> {
    let meta = pkg.meta();
    let run = |q: &TopKQuery| -> Result<TopKCheck> {
        let mut session = pkg.session();
        let candidates = bound_phase(&mut session, q)?;
        let answer = refine_phase(&mut session, q, candidates.clone(), TopKOptions::default())?;
        let oracle = oracle_topk(meetings, meta.n_objects, q, meta.mu);
        let everyone = TopKQuery {
            k: meta.n_objects as usize,
            ..q.clone()
        };
        let exact = oracle_topk(meetings, meta.n_objects, &everyone, meta.mu);
        let bound_violations = exact
            .iter()
            .filter(|(o, w)| {
                let bound = candidates
                    .iter()
                    .find(|c| c.object == *o)
                    .map_or(0.0, |c| c.f_max);
                *w > bound
            })
            .map(|(o, _)| *o)
            .collect();
        Ok(TopKCheck {
            query: q.clone(),
            ranked: answer.ranked,
            oracle,
            bound_violations,
        })
    };
    worker_pool()?.install(|| queries.par_iter().map(run).collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerifySummary {
    pub decay_queries: usize,
    pub decay_mismatches: usize,
    pub baseline_mismatches: usize,
    pub pruned: usize,
    pub pruned_but_reachable: usize,
    pub superset_violations: usize,
    pub topk_queries: usize,
    pub topk_mismatches: usize,
    pub bound_violations: usize,
}

impl VerifySummary {
    pub fn new(decay: &[DecayCheck], topk: &[TopKCheck]) -> Self {
        VerifySummary {
            decay_queries: decay.len(),
            decay_mismatches: decay.iter().filter(|c| !c.engine_matches()).count(),
            baseline_mismatches: decay.iter().filter(|c| !c.baseline_matches()).count(),
            pruned: decay.iter().filter(|c| c.pruned()).count(),
            pruned_but_reachable: decay
                .iter()
                .filter(|c| c.pruned() && c.oracle.reachable)
                .count(),
            superset_violations: decay.iter().filter(|c| !c.superset_holds).count(),
            topk_queries: topk.len(),
            topk_mismatches: topk.iter().filter(|c| !c.matches()).count(),
            bound_violations: topk.iter().map(|c| c.bound_violations.len()).sum(),
        }
    }

    pub fn passed(&self) -> bool {
        self.decay_mismatches == 0
            && self.baseline_mismatches == 0
            && self.pruned_but_reachable == 0
            && self.superset_violations == 0
            && self.topk_mismatches == 0
            && self.bound_violations == 0
    }
}
