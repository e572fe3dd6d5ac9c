//! Seeded random query workloads.

use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decayreach_core::{
    DecayParams, DecayQuery, ObjectId, Tau, TimeGrid, TopKQuery, TrajectoryDataset,
};

use crate::error::{Error, Result};

/// Random single-target queries. Each query draws a hop budget and a length,
/// then a start time that keeps the whole interval inside `[0, tau_last]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayWorkload {
    pub count: usize,
    pub seed: u64,
    pub hop_budgets: RangeInclusive<u32>,
    /// Query length range in seconds.
    pub length_s: (f64, f64),
    pub w: f64,
    pub d: f64,
}

impl Default for DecayWorkload {
    fn default() -> Self {
        DecayWorkload {
            count: 500,
            seed: 1,
            hop_budgets: 1..=4,
            length_s: (600.0, 4200.0),
            w: 1.0,
            d: 0.2,
        }
    }
}

fn check_range(n_objects: u32, tau_last: Tau) -> Result<()> {
    if n_objects < 2 {
        return Err(Error::Invalid("workloads need at least two objects".into()));
    }
    if tau_last == 0 {
        return Err(Error::Invalid(
            "workloads need a time range longer than one instant".into(),
        ));
    }
    Ok(())
}

fn interval(
    rng: &mut ChaCha8Rng,
    grid: &TimeGrid,
    tau_last: Tau,
    length_s: (f64, f64),
) -> (Tau, Tau) {
    let (lo, hi) = length_s;
    let secs = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    let len = grid.taus_for_seconds(secs).clamp(1, tau_last);
    let start = rng.gen_range(0..=tau_last - len);
    (start, start + len)
}

pub fn decay_queries(
    n_objects: u32,
    grid: &TimeGrid,
    tau_last: Tau,
    spec: &DecayWorkload,
) -> Result<Vec<DecayQuery>> {
    check_range(n_objects, tau_last)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let pair = sample(&mut rng, n_objects as usize, 2);
        let h = rng.gen_range(spec.hop_budgets.clone());
        let (tau_start, tau_end) = interval(&mut rng, grid, tau_last, spec.length_s);
        out.push(DecayQuery {
            source: ObjectId(pair.index(0) as u32),
            target: ObjectId(pair.index(1) as u32),
            decay: DecayParams::for_hop_budget(spec.w, spec.d, h)?,
            tau_start,
            tau_end,
        });
    }
    Ok(out)
}

/// Multi-source queries whose sources sit together: a random anchor plus
/// its nearest neighbours at the query start.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKWorkload {
    pub count: usize,
    pub seed: u64,
    /// One decay per source.
    pub decays: Vec<f64>,
    pub w: f64,
    pub nu: f64,
    pub k: RangeInclusive<usize>,
    pub length_s: (f64, f64),
}

impl Default for TopKWorkload {
    fn default() -> Self {
        TopKWorkload {
            count: 100,
            seed: 1,
            decays: vec![0.10, 0.15, 0.20, 0.25],
            w: 1.0,
            nu: 0.6,
            k: 4..=20,
            length_s: (4200.0, 4200.0),
        }
    }
}

pub fn topk_queries(ds: &TrajectoryDataset, spec: &TopKWorkload) -> Result<Vec<TopKQuery>> {
    let n = ds.n_objects();
    check_range(n, ds.last_tau())?;
    if spec.decays.is_empty() || spec.decays.len() > n as usize {
        return Err(Error::Invalid(
            "source count must lie between 1 and the number of objects".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let anchor = ObjectId(rng.gen_range(0..n));
        let k = rng.gen_range(spec.k.clone());
        let (tau_start, tau_end) = interval(&mut rng, &ds.grid, ds.last_tau(), spec.length_s);
        let at = ds.at_tau(tau_start, anchor);
        let mut others: Vec<(f64, ObjectId)> = ds
            .objects()
            .filter(|&o| o != anchor)
            .map(|o| (ds.at_tau(tau_start, o).dist2(at), o))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let ids = std::iter::once(anchor).chain(others.into_iter().map(|x| x.1));
        let sources = ids
            .zip(&spec.decays)
            .map(|(o, &d)| Ok((o, DecayParams::new(spec.w, d, spec.nu)?)))
            .collect::<Result<Vec<_>>>()?;
        out.push(TopKQuery {
            sources,
            tau_start,
            tau_end,
            k,
        });
    }
    Ok(out)
}
