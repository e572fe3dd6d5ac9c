//! Small hand-checked scenarios shared by tests and examples.
//!
//! Object ids 1 to 4 are the actors; object 0 idles far away so that ids
//! stay dense.

use alloc::vec::Vec;

use crate::contact::Meeting;
use crate::dataset::{Point, TrajectoryDataset};
use crate::model::{ObjectId, Tau, TimeGrid};

/// Contact distance used by [`chain_dataset`].
pub const CHAIN_D_CONT: f64 = 10.0;
/// Minimum meeting duration used by the chain and detour scenarios.
pub const FIXTURE_MU: Tau = 2;

fn meeting(a: u32, b: u32, tau_start: Tau, tau_end: Tau, boundary_start: bool) -> Meeting {
    Meeting {
        a: ObjectId(a),
        b: ObjectId(b),
        tau_start,
        tau_end,
        boundary_start,
        boundary_end: false,
    }
}

/// Ten ticks, one instant per tick. Object 3 parks at the origin; objects 1,
/// 2 and 4 pass by so that the meetings are exactly [`chain_meetings`].
pub fn chain_dataset() -> TrajectoryDataset {
    let grid = TimeGrid::new(1.0, 1).expect("valid grid");
    let o1 = |t: u32| {
        if t <= 3 {
            Point::new(-8.0, 0.0)
        } else {
            Point::new(-100.0, 0.0)
        }
    };
    let o2 = |t: u32| match t {
        0 => Point::new(50.0, 0.0),
        1..=5 => Point::new(8.0, 0.0),
        6 => Point::new(12.0, 0.0),
        _ => Point::new(100.0, 0.0),
    };
    let o4 = |t: u32| match t {
        0..=3 => Point::new(200.0, 0.0),
        4 => Point::new(15.0, 0.0),
        5 => Point::new(5.0, 5.0),
        6 | 7 => Point::new(6.0, 0.0),
        _ => Point::new(300.0, 0.0),
    };
    let mut positions = Vec::new();
    for t in 0..10 {
        positions.extend([
            Point::new(1000.0, 1000.0),
            o1(t),
            o2(t),
            Point::new(0.0, 0.0),
            o4(t),
        ]);
    }
    TrajectoryDataset::new(grid, 5, 10, positions).expect("well-formed fixture")
}

/// Meetings of [`chain_dataset`] in one block spanning all ten instants,
/// in detection order.
pub fn chain_meetings() -> Vec<Meeting> {
    alloc::vec![
        meeting(1, 3, 0, 3, true),
        meeting(2, 3, 1, 5, false),
        meeting(2, 4, 4, 6, false),
        meeting(3, 4, 5, 7, false),
    ]
}

/// A four-meeting loop where object 3 is first reached after three hops and
/// later directly from object 1.
pub fn detour_meetings() -> Vec<Meeting> {
    alloc::vec![
        meeting(1, 2, 0, 2, false),
        meeting(2, 4, 2, 4, false),
        meeting(3, 4, 4, 6, false),
        meeting(1, 3, 6, 8, false),
    ]
}
