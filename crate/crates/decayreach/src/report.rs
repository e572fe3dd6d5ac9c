//! Machine-readable run reports.

use serde::Serialize;

use decayreach_core::model::{max_hops, HopBudget};
use decayreach_core::topk::TopKAnswer;
use decayreach_core::{DecayAnswer, DecayQuery, IoStats, TopKQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IoReport {
    pub sequential_pages: u64,
    pub random_pages: u64,
    pub weighted_cost: u64,
}

impl From<IoStats> for IoReport {
    fn from(io: IoStats) -> Self {
        IoReport {
            sequential_pages: io.sequential_pages,
            random_pages: io.random_pages,
            weighted_cost: io.weighted_cost(),
        }
    }
}

/// Outcome of one single-target query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub variant: &'static str,
    pub source: u32,
    pub target: u32,
    pub from: u32,
    pub to: u32,
    pub w: f64,
    pub d: f64,
    pub nu: f64,
    /// `bounded`, `unbounded` or `source_only`.
    pub hop_budget: &'static str,
    pub h_max: Option<u32>,
    pub reachable: bool,
    pub tau_reached: Option<u32>,
    pub h_min: Option<u32>,
    pub delivered_weight: f64,
    pub phase: &'static str,
    pub reached_blocks: u32,
    pub meeting_blocks: u32,
    pub io: IoReport,
    pub wall_ms: f64,
}

pub fn budget_fields(budget: HopBudget) -> (&'static str, Option<u32>) {
    match budget {
        HopBudget::Bounded(h) => ("bounded", Some(h)),
        HopBudget::Unbounded => ("unbounded", None),
        HopBudget::SourceOnly => ("source_only", None),
    }
}

impl RunReport {
    pub fn new(variant: &'static str, q: &DecayQuery, a: &DecayAnswer, wall_ms: f64) -> Self {
        let (hop_budget, h_max) = budget_fields(max_hops(&q.decay));
        RunReport {
            command: "query",
            variant,
            source: q.source.0,
            target: q.target.0,
            from: q.tau_start,
            to: q.tau_end,
            w: q.decay.w(),
            d: q.decay.d(),
            nu: q.decay.nu(),
            hop_budget,
            h_max,
            reachable: a.reachable,
            tau_reached: a.tau_reached,
            h_min: a.h_min,
            delivered_weight: a.delivered_weight,
            phase: a.phase.as_str(),
            reached_blocks: a.reached_blocks,
            meeting_blocks: a.meeting_blocks,
            io: a.io.into(),
            wall_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceReport {
    pub object: u32,
    pub w: f64,
    pub d: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedReport {
    pub object: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopKReport {
    pub command: &'static str,
    pub from: u32,
    pub to: u32,
    pub k: usize,
    pub sources: Vec<SourceReport>,
    pub ranked: Vec<RankedReport>,
    pub initial_candidates: usize,
    /// Last block swept before the answer was final.
    pub termination_block: Option<u32>,
    pub early_terminated: bool,
    pub io: IoReport,
    pub wall_ms: f64,
}

impl TopKReport {
    pub fn new(q: &TopKQuery, a: &TopKAnswer, wall_ms: f64) -> Self {
        TopKReport {
            command: "topk",
            from: q.tau_start,
            to: q.tau_end,
            k: q.k,
            sources: q
                .sources
                .iter()
                .map(|(o, p)| SourceReport {
                    object: o.0,
                    w: p.w(),
                    d: p.d(),
                    nu: p.nu(),
                })
                .collect(),
            ranked: a
                .ranked
                .iter()
                .map(|(o, w)| RankedReport {
                    object: o.0,
                    weight: *w,
                })
                .collect(),
            initial_candidates: a.initial_candidates,
            termination_block: a.last_block_swept,
            early_terminated: a.early_terminated,
            io: a.io.into(),
            wall_ms,
        }
    }
}
