//! I/O benchmark: the two-phase engine against a meetings-only sweep.

use rayon::prelude::*;
use serde::Serialize;

use decayreach_core::query::{answer, answer_baseline};
use decayreach_core::{DecayParams, DecayQuery, IoStats, Phase, TimeGrid};

use crate::error::{Error, Result};
use crate::store::IndexPackage;
use crate::verify::worker_pool;
use crate::workload::{decay_queries, DecayWorkload};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    /// `h_max` or `length_s`.
    pub axis: &'static str,
    pub value: f64,
    /// `decay` (two-phase) or `baseline` (meetings only).
    pub variant: &'static str,
    pub queries: usize,
    pub reachable_fraction: f64,
    pub pruned_fraction: f64,
    pub sequential_pages: u64,
    pub random_pages: u64,
    pub total_weighted_io: u64,
    pub mean_weighted_io: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub queries: usize,
    pub seed: u64,
    pub hop_budgets: Vec<u32>,
    pub lengths_s: Vec<f64>,
    /// Hop budget used on the length axis.
    pub length_axis_hops: u32,
    pub d: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            queries: 200,
            seed: 1,
            hop_budgets: vec![1, 2, 3, 4],
            lengths_s: vec![600.0, 1200.0, 1800.0, 2400.0, 3000.0, 3600.0, 4200.0],
            length_axis_hops: 2,
            d: 0.2,
        }
    }
}

/// Per-query costs of both variants on one workload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedCost {
    pub decay: IoStats,
    pub baseline: IoStats,
    pub reachable: bool,
    pub pruned: bool,
}

pub fn paired_costs(pkg: &IndexPackage, queries: &[DecayQuery]) -> Result<Vec<PairedCost>> {
    let run = |q: &DecayQuery| -> Result<PairedCost> {
        let a = answer(&mut pkg.session(), q)?;
        let b = answer_baseline(&mut pkg.session(), q)?;
        Ok(PairedCost {
            decay: a.io,
            baseline: b.io,
            reachable: a.reachable,
            pruned: a.phase == Phase::PrunedAtReachedHop,
        })
    };
    worker_pool()?.install(|| queries.par_iter().map(run).collect())
}

fn rows(axis: &'static str, value: f64, costs: &[PairedCost]) -> [BenchRow; 2] {
    let n = costs.len();
    let frac =
        |f: &dyn Fn(&PairedCost) -> bool| costs.iter().filter(|c| f(c)).count() as f64 / n as f64;
    let make = |variant: &'static str, pick: &dyn Fn(&PairedCost) -> IoStats| {
        let total = costs
            .iter()
            .fold(IoStats::default(), |acc, c| acc + pick(c));
        let weighted: u64 = costs.iter().map(|c| pick(c).weighted_cost()).sum();
        BenchRow {
            axis,
            value,
            variant,
            queries: n,
            reachable_fraction: frac(&|c| c.reachable),
            pruned_fraction: if variant == "decay" {
                frac(&|c| c.pruned)
            } else {
                0.0
            },
            sequential_pages: total.sequential_pages,
            random_pages: total.random_pages,
            total_weighted_io: weighted,
            mean_weighted_io: weighted as f64 / n as f64,
        }
    };
    [
        make("decay", &|c| c.decay),
        make("baseline", &|c| c.baseline),
    ]
}

/// Sweeps the hop budget and the query length over seeded workloads.
pub fn run_bench(pkg: &IndexPackage, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.queries == 0 {
        return Err(Error::Invalid("benchmark workload is empty".into()));
    }
    let meta = pkg.meta();
    let grid = TimeGrid::new(meta.delta_t, meta.tau_per_tick)?;
    let base = DecayWorkload {
        count: cfg.queries,
        seed: cfg.seed,
        d: cfg.d,
        ..Default::default()
    };
    let mut out = Vec::new();
    for &h in &cfg.hop_budgets {
        let spec = DecayWorkload {
            hop_budgets: h..=h,
            ..base.clone()
        };
        let qs = decay_queries(meta.n_objects, &grid, meta.tau_last, &spec)?;
        out.extend(rows("h_max", h as f64, &paired_costs(pkg, &qs)?));
    }
    for &len in &cfg.lengths_s {
        let spec = DecayWorkload {
            hop_budgets: cfg.length_axis_hops..=cfg.length_axis_hops,
            length_s: (len, len),
            ..base.clone()
        };
        let qs = decay_queries(meta.n_objects, &grid, meta.tau_last, &spec)?;
        out.extend(rows("length_s", len, &paired_costs(pkg, &qs)?));
    }
    Ok(out)
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Invalid(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}

/// Same queries with the hop budget replaced.
pub fn with_hop_budget(queries: &[DecayQuery], h: u32) -> Result<Vec<DecayQuery>> {
    queries
        .iter()
        .map(|q| {
            Ok(DecayQuery {
                decay: DecayParams::for_hop_budget(q.decay.w(), q.decay.d(), h)?,
                ..*q
            })
        })
        .collect()
}
