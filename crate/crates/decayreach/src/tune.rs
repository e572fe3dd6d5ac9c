//! Picks block length and grid cell side by measuring a workload on a prefix
//! of the dataset.

use serde::Serialize;

use decayreach_core::{DecayQuery, Tau, TrajectoryDataset};

use crate::bench::paired_costs;
use crate::error::{Error, Result};
use crate::store::{preprocess, PreprocessParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuneCell {
    pub ticks_per_block: u32,
    pub cell_side: f64,
    pub total_weighted_io: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub prefix_ticks: u32,
    pub best: TuneCell,
    pub grid: Vec<TuneCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSpace {
    pub ticks_per_block: Vec<u32>,
    pub cell_side: Vec<f64>,
    pub mu: Tau,
    pub d_cont: f64,
    /// Share of the timeline used for tuning.
    pub prefix_fraction: f64,
}

/// Ticks kept for tuning: at least two, never more than the dataset has.
pub fn prefix_ticks(n_ticks: u32, fraction: f64) -> u32 {
    ((n_ticks as f64 * fraction).ceil() as u32).clamp(2.min(n_ticks), n_ticks)
}

/// Weighted I/O of the two-phase engine over `queries`, summed.
pub fn workload_cost(pkg: &crate::store::IndexPackage, queries: &[DecayQuery]) -> Result<u64> {
    Ok(paired_costs(pkg, queries)?
        .iter()
        .map(|c| c.decay.weighted_cost())
        .sum())
}

/// Grid search over the candidate pairs. Ties go to the shorter block, then
/// to the smaller cell.
pub fn tune(
    ds: &TrajectoryDataset,
    space: &TuneSpace,
    queries: &[DecayQuery],
) -> Result<TuneResult> {
    if space.ticks_per_block.is_empty() || space.cell_side.is_empty() {
        return Err(Error::Invalid(
            "tuning needs at least one block length and one cell side".into(),
        ));
    }
    if queries.is_empty() {
        return Err(Error::Invalid("tuning workload is empty".into()));
    }
    if !(space.prefix_fraction > 0.0 && space.prefix_fraction <= 1.0) {
        return Err(Error::Invalid("prefix fraction must lie in (0, 1]".into()));
    }
    let ticks = prefix_ticks(ds.n_ticks(), space.prefix_fraction);
    let prefix = ds.prefix(ticks);
    if let Some(q) = queries.iter().find(|q| q.tau_end > prefix.last_tau()) {
        return Err(Error::Invalid(format!(
            "tuning query ends at {} past the prefix end {}",
            q.tau_end,
            prefix.last_tau()
        )));
    }
    let mut grid = Vec::new();
    for &c in &space.ticks_per_block {
        for &h in &space.cell_side {
            let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
            let params = PreprocessParams {
                ticks_per_block: c,
                cell_side: h,
                mu: space.mu,
                d_cont: space.d_cont,
            };
            let pkg = preprocess(&prefix, &params, dir.path())?;
            grid.push(TuneCell {
                ticks_per_block: c,
                cell_side: h,
                total_weighted_io: workload_cost(&pkg, queries)?,
            });
        }
    }
    let best = *grid
        .iter()
        .min_by(|a, b| {
            a.total_weighted_io
                .cmp(&b.total_weighted_io)
                .then(a.ticks_per_block.cmp(&b.ticks_per_block))
                .then(a.cell_side.total_cmp(&b.cell_side))
        })
        .expect("grid is non-empty");
    Ok(TuneResult {
        prefix_ticks: ticks,
        best,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenConfig};
    use crate::workload::{decay_queries, DecayWorkload};

    fn space() -> TuneSpace {
        TuneSpace {
            ticks_per_block: vec![5, 10],
            cell_side: vec![200.0, 400.0],
            mu: 2,
            d_cont: 10.0,
            prefix_fraction: 0.5,
        }
    }

    #[test]
    fn picks_the_cheapest_pair() {
        let ds = generate(&GenConfig {
            n_objects: 30,
            area_side: 800.0,
            duration_ticks: 60,
            ..Default::default()
        })
        .unwrap();
        let ticks = prefix_ticks(ds.n_ticks(), 0.5);
        let spec = DecayWorkload {
            count: 20,
            length_s: (30.0, 120.0),
            ..Default::default()
        };
        let qs = decay_queries(30, &ds.grid, ds.prefix(ticks).last_tau(), &spec).unwrap();
        let r = tune(&ds, &space(), &qs).unwrap();
        assert_eq!(r.grid.len(), 4);
        assert!(r
            .grid
            .iter()
            .all(|c| c.total_weighted_io >= r.best.total_weighted_io));
    }

    #[test]
    fn rejects_bad_inputs() {
        let ds = generate(&GenConfig {
            n_objects: 10,
            duration_ticks: 40,
            ..Default::default()
        })
        .unwrap();
        let spec = DecayWorkload {
            count: 3,
            length_s: (30.0, 60.0),
            ..Default::default()
        };
        let far = decay_queries(
            10,
            &ds.grid,
            ds.last_tau(),
            &DecayWorkload {
                length_s: (200.0, 200.0),
                ..spec.clone()
            },
        )
        .unwrap();
        assert!(tune(&ds, &space(), &[]).is_err());
        assert!(tune(
            &ds,
            &TuneSpace {
                cell_side: vec![],
                ..space()
            },
            &far
        )
        .is_err());
        assert!(tune(&ds, &space(), &far).is_err());
    }
}
