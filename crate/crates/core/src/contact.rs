//! Candidate contacts, per-τ contact verification and meeting assembly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dataset::{Point, TrajectoryDataset};
use crate::model::{ObjectId, Tau};
use crate::source::StoredMeeting;

/// One time block: a run of `ticks_per_block` reporting times plus the grid
/// resolution used to lay out its records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec {
    pub block_id: u32,
    pub first_tick: u32,
    pub last_tick: u32,
    pub tau_first: Tau,
    pub tau_last: Tau,
    pub ticks_per_block: u32,
    pub cell_side: f64,
}

impl BlockSpec {
    pub fn contains(&self, tau: Tau) -> bool {
        self.tau_first <= tau && tau <= self.tau_last
    }
}

/// Splits `n_ticks` reporting times into blocks of `c` ticks.
///
/// Block `k` owns the τ instants of its reporting intervals
/// `[t_first, t_last+1)`; the final block ends on the last reporting tick.
pub fn plan_blocks(n_ticks: u32, tau_per_tick: u32, c: u32, cell_side: f64) -> Vec<BlockSpec> {
    assert!(c >= 1 && tau_per_tick >= 1);
    let last_tau = n_ticks.saturating_sub(1) * tau_per_tick;
    let mut blocks = Vec::new();
    let mut first = 0;
    while first < n_ticks {
        let last = (first + c - 1).min(n_ticks - 1);
        let tau_first = first * tau_per_tick;
        let tau_last = if last + 1 >= n_ticks {
            last_tau
        } else {
            (last + 1) * tau_per_tick - 1
        };
        blocks.push(BlockSpec {
            block_id: blocks.len() as u32,
            first_tick: first,
            last_tick: last,
            tau_first,
            tau_last,
            ticks_per_block: c,
            cell_side,
        });
        first = last + 1;
    }
    blocks
}

/// A maximal run of consecutive τ-instant contacts between `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Meeting {
    pub a: ObjectId,
    pub b: ObjectId,
    pub tau_start: Tau,
    pub tau_end: Tau,
    pub boundary_start: bool,
    pub boundary_end: bool,
}

impl Meeting {
    pub fn duration(&self) -> Tau {
        self.tau_end - self.tau_start
    }

    /// The meeting as seen from `me`, which must be one of its endpoints.
    pub fn view_from(&self, me: ObjectId) -> StoredMeeting {
        let peer = if me == self.a { self.b } else { self.a };
        StoredMeeting {
            peer,
            tau_start: self.tau_start,
            tau_end: self.tau_end,
            boundary_start: self.boundary_start,
            boundary_end: self.boundary_end,
        }
    }
}

/// Groups meetings under both endpoints, each list sorted by `tau_start`.
pub fn meetings_by_object(meetings: &[Meeting]) -> BTreeMap<ObjectId, Vec<StoredMeeting>> {
    let mut out: BTreeMap<ObjectId, Vec<StoredMeeting>> = BTreeMap::new();
    for m in meetings {
        out.entry(m.a).or_default().push(m.view_from(m.a));
        out.entry(m.b).or_default().push(m.view_from(m.b));
    }
    for list in out.values_mut() {
        list.sort_by_key(|m| (m.tau_start, m.tau_end, m.peer));
    }
    out
}

/// Cell index of `p` on a square grid of side `side`.
pub fn cell_of(p: Point, side: f64) -> (i64, i64) {
    (floor_div(p.x, side), floor_div(p.y, side))
}

fn floor_div(v: f64, side: f64) -> i64 {
    let q = v / side;
    let t = q as i64;
    if (t as f64) > q {
        t - 1
    } else {
        t
    }
}

/// Candidate contact distance `2·d_max + d_cont`.
pub fn candidate_distance(ds: &TrajectoryDataset, d_cont: f64) -> f64 {
    2.0 * ds.d_max + d_cont
}

/// All pairs within the candidate contact distance at `tick`, found by
/// bucketing objects into cells of that side and comparing neighbours only.
pub fn candidate_pairs(
    ds: &TrajectoryDataset,
    tick: u32,
    d_cont: f64,
) -> Vec<(ObjectId, ObjectId)> {
    let d_cc = candidate_distance(ds, d_cont);
    // Pad the radius by a relative hair so rounding in d_max never drops a pair.
    let radius = d_cc * (1.0 + 1e-9) + 1e-9;
    let side = radius.max(1e-6);
    let pts = ds.tick_slice(tick);
    let mut cells: BTreeMap<(i64, i64), Vec<u32>> = BTreeMap::new();
    for (i, p) in pts.iter().enumerate() {
        cells.entry(cell_of(*p, side)).or_default().push(i as u32);
    }
    let r2 = radius * radius;
    let mut pairs = Vec::new();
    for (&(cx, cy), members) in &cells {
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                let Some(others) = cells.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &i in members {
                    for &j in others {
                        if j > i && pts[i as usize].dist2(pts[j as usize]) <= r2 {
                            pairs.push((ObjectId(i), ObjectId(j)));
                        }
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// τ instants of the reporting interval starting at `tick` at which the
/// linearly interpolated positions of `pair` are within `d_cont`.
///
/// The final reporting tick owns only its own instant.
pub fn verify_contacts(
    ds: &TrajectoryDataset,
    pair: (ObjectId, ObjectId),
    tick: u32,
    d_cont: f64,
) -> Vec<Tau> {
    let r = ds.grid.tau_per_tick;
    let (a, b) = pair;
    let a0 = ds.at(tick, a);
    let b0 = ds.at(tick, b);
    let last = tick + 1 >= ds.n_ticks();
    let (a1, b1) = if last {
        (a0, b0)
    } else {
        (ds.at(tick + 1, a), ds.at(tick + 1, b))
    };
    let d2 = d_cont * d_cont;
    let subs = if last { 1 } else { r };
    (0..subs)
        .filter(|&j| {
            let f = j as f64 / r as f64;
            a0.lerp(a1, f).dist2(b0.lerp(b1, f)) <= d2
        })
        .map(|j| tick * r + j)
        .collect()
}

/// Merges per-pair contact instants into maximal meetings, dropping interior
/// meetings shorter than `mu`. Meetings touching either block edge are kept
/// whatever their length since they may continue in a neighbouring block.
pub fn build_meetings(
    contacts: &BTreeMap<(ObjectId, ObjectId), Vec<Tau>>,
    block: &BlockSpec,
    mu: Tau,
) -> Vec<Meeting> {
    let mut out = Vec::new();
    for (&(a, b), taus) in contacts {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let mut iter = taus.iter().copied().filter(|t| block.contains(*t));
        let Some(mut start) = iter.next() else {
            continue;
        };
        let mut end = start;
        let flush = |start: Tau, end: Tau, out: &mut Vec<Meeting>| {
            let m = Meeting {
                a,
                b,
                tau_start: start,
                tau_end: end,
                boundary_start: start == block.tau_first,
                boundary_end: end == block.tau_last,
            };
            if m.duration() >= mu || m.boundary_start || m.boundary_end {
                out.push(m);
            }
        };
        for t in iter {
            if t == end + 1 {
                end = t;
            } else if t > end {
                flush(start, end, &mut out);
                start = t;
                end = t;
            }
        }
        flush(start, end, &mut out);
    }
    out.sort_by_key(|m| (m.tau_start, m.a, m.b, m.tau_end));
    out
}

/// Full contact pipeline for one block: candidates per tick, verification,
/// then meeting assembly and pruning.
pub fn detect_block(
    ds: &TrajectoryDataset,
    block: &BlockSpec,
    d_cont: f64,
    mu: Tau,
) -> Vec<Meeting> {
    let mut contacts: BTreeMap<(ObjectId, ObjectId), Vec<Tau>> = BTreeMap::new();
    for tick in block.first_tick..=block.last_tick {
        for pair in candidate_pairs(ds, tick, d_cont) {
            let taus = verify_contacts(ds, pair, tick, d_cont);
            if !taus.is_empty() {
                contacts.entry(pair).or_default().extend(taus);
            }
        }
    }
    build_meetings(&contacts, block, mu)
}

/// Object layout order inside a block: by grid cell (side `block.cell_side`)
/// at the block's first tick, then by id.
pub fn layout_order(ds: &TrajectoryDataset, block: &BlockSpec) -> Vec<ObjectId> {
    let mut objs: Vec<((i64, i64), ObjectId)> = ds
        .objects()
        .map(|o| (cell_of(ds.at(block.first_tick, o), block.cell_side), o))
        .collect();
    objs.sort_unstable();
    objs.into_iter().map(|(_, o)| o).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeGrid;
    use alloc::vec;

    fn ds_two(r: u32, a: [Point; 2], b: [Point; 2]) -> TrajectoryDataset {
        let grid = TimeGrid::new(1.0, r).unwrap();
        TrajectoryDataset::new(grid, 2, 2, vec![a[0], b[0], a[1], b[1]]).unwrap()
    }

    #[test]
    fn blocks_partition_the_timeline() {
        let blocks = plan_blocks(10, 3, 4, 100.0);
        assert_eq!(blocks.len(), 3);
        assert_eq!((blocks[0].tau_first, blocks[0].tau_last), (0, 11));
        assert_eq!((blocks[1].tau_first, blocks[1].tau_last), (12, 23));
        assert_eq!((blocks[2].first_tick, blocks[2].last_tick), (8, 9));
        assert_eq!((blocks[2].tau_first, blocks[2].tau_last), (24, 27));
    }

    #[test]
    fn coincident_pair_is_candidate() {
        let p = Point::new(5.0, 5.0);
        let ds = ds_two(1, [p, p], [p, p]);
        assert_eq!(
            candidate_pairs(&ds, 0, 10.0),
            vec![(ObjectId(0), ObjectId(1))]
        );
    }

    #[test]
    fn far_pair_is_not_candidate() {
        // Stationary, so d_max = 0 and d_cc = d_cont = 10.
        let a = Point::new(0.0, 0.0);
        let b = Point::new(31.0, 0.0);
        let ds = ds_two(1, [a, a], [b, b]);
        assert_eq!(candidate_distance(&ds, 10.0), 10.0);
        assert!(candidate_pairs(&ds, 0, 10.0).is_empty());
        let b = Point::new(11.0, 0.0);
        let ds = ds_two(1, [a, a], [b, b]);
        assert!(candidate_pairs(&ds, 0, 10.0).is_empty());
    }

    #[test]
    fn stationary_pair_contacts_every_instant() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(5.0, 0.0);
        let ds = ds_two(4, [a, a], [b, b]);
        assert_eq!(
            verify_contacts(&ds, (ObjectId(0), ObjectId(1)), 0, 10.0),
            vec![0, 1, 2, 3]
        );
        // Final tick owns one instant.
        assert_eq!(
            verify_contacts(&ds, (ObjectId(0), ObjectId(1)), 1, 10.0),
            vec![4]
        );
    }

    #[test]
    fn exact_contact_distance_is_inclusive() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        let ds = ds_two(2, [a, a], [b, b]);
        assert_eq!(
            verify_contacts(&ds, (ObjectId(0), ObjectId(1)), 0, 10.0),
            vec![0, 1]
        );
    }

    #[test]
    fn crossing_pair_contacts_middle_run() {
        // Distance 15 -> 5 -> 15 along a straight pass at offset 5.
        let half = 200f64.sqrt();
        let r = 10;
        let ds = ds_two(
            r,
            [Point::new(-half, 5.0), Point::new(half, 5.0)],
            [Point::default(); 2],
        );
        let got = verify_contacts(&ds, (ObjectId(0), ObjectId(1)), 0, 10.0);
        // Analytic: x(j)^2 + 25 <= 100.
        let expected: Vec<Tau> = (0..r)
            .filter(|&j| {
                let x = -half + 2.0 * half * j as f64 / r as f64;
                x * x + 25.0 <= 100.0
            })
            .collect();
        assert_eq!(got, expected);
        assert_eq!(got, vec![2, 3, 4, 5, 6, 7, 8]);
    }

    fn block(tau_first: Tau, tau_last: Tau) -> BlockSpec {
        BlockSpec {
            block_id: 0,
            first_tick: tau_first,
            last_tick: tau_last,
            tau_first,
            tau_last,
            ticks_per_block: tau_last - tau_first + 1,
            cell_side: 100.0,
        }
    }

    fn contacts(pair: (u32, u32), taus: &[Tau]) -> BTreeMap<(ObjectId, ObjectId), Vec<Tau>> {
        let mut m = BTreeMap::new();
        m.insert((ObjectId(pair.0), ObjectId(pair.1)), taus.to_vec());
        m
    }

    #[test]
    fn meeting_at_block_start_is_boundary() {
        let got = build_meetings(&contacts((1, 3), &[0, 1, 2, 3]), &block(0, 9), 2);
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].tau_start, got[0].tau_end), (0, 3));
        assert!(got[0].boundary_start && !got[0].boundary_end);
    }

    #[test]
    fn short_interior_meeting_is_pruned() {
        assert!(build_meetings(&contacts((0, 1), &[4]), &block(0, 9), 2).is_empty());
        assert!(build_meetings(&contacts((0, 1), &[4, 5]), &block(0, 9), 2).is_empty());
        assert_eq!(
            build_meetings(&contacts((0, 1), &[4, 5, 6]), &block(0, 9), 2).len(),
            1
        );
    }

    #[test]
    fn contact_at_final_instant_is_kept() {
        let got = build_meetings(&contacts((0, 1), &[9]), &block(0, 9), 2);
        assert_eq!(got.len(), 1);
        assert!(got[0].boundary_end);
        assert_eq!(got[0].duration(), 0);
    }

    #[test]
    fn runs_are_split_at_gaps() {
        let got = build_meetings(&contacts((0, 1), &[1, 2, 3, 5, 6, 7, 8]), &block(0, 9), 2);
        let spans: Vec<(Tau, Tau)> = got.iter().map(|m| (m.tau_start, m.tau_end)).collect();
        assert_eq!(spans, vec![(1, 3), (5, 8)]);
    }

    #[test]
    fn by_object_lists_both_endpoints() {
        let m = Meeting {
            a: ObjectId(1),
            b: ObjectId(4),
            tau_start: 2,
            tau_end: 5,
            boundary_start: false,
            boundary_end: false,
        };
        let grouped = meetings_by_object(&[m]);
        assert_eq!(grouped[&ObjectId(1)][0].peer, ObjectId(4));
        assert_eq!(grouped[&ObjectId(4)][0].peer, ObjectId(1));
    }

    #[test]
    fn floor_div_handles_negatives() {
        assert_eq!(cell_of(Point::new(-0.5, 10.0), 10.0), (-1, 1));
        assert_eq!(cell_of(Point::new(-10.0, 9.99), 10.0), (-1, 0));
    }
}
