use alloc::vec::Vec;
use core::fmt;

use crate::model::{ObjectId, Tau, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Point, frac: f64) -> Point {
        Point {
            x: self.x + (other.x - self.x) * frac,
            y: self.y + (other.y - self.y) * frac,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    Empty,
    ShapeMismatch { expected: usize, got: usize },
    NonFinite { tick: u32, object: u32 },
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::Empty => f.write_str("dataset has no objects or no ticks"),
            DatasetError::ShapeMismatch { expected, got } => {
                write!(f, "expected {expected} positions, got {got}")
            }
            DatasetError::NonFinite { tick, object } => {
                write!(f, "non-finite position for object {object} at tick {tick}")
            }
        }
    }
}

impl core::error::Error for DatasetError {}

/// Positions of every object at every reporting tick.
///
/// Storage is tick-major, matching the order in which location reports
/// arrive. `d_max` is the largest displacement of any object between two
/// consecutive ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    pub grid: TimeGrid,
    n_objects: u32,
    n_ticks: u32,
    positions: Vec<Point>,
    pub d_max: f64,
}

impl TrajectoryDataset {
    /// Builds a dataset and computes `d_max` from the observed displacements.
    pub fn new(
        grid: TimeGrid,
        n_objects: u32,
        n_ticks: u32,
        positions: Vec<Point>,
    ) -> Result<Self, DatasetError> {
        let d_max = observed_d_max(n_objects, n_ticks, &positions)?;
        Ok(TrajectoryDataset {
            grid,
            n_objects,
            n_ticks,
            positions,
            d_max,
        })
    }

    /// Builds a dataset with an externally supplied `d_max`, which must be at
    /// least the observed maximum displacement.
    pub fn with_d_max(
        grid: TimeGrid,
        n_objects: u32,
        n_ticks: u32,
        positions: Vec<Point>,
        d_max: f64,
    ) -> Result<Self, DatasetError> {
        let observed = observed_d_max(n_objects, n_ticks, &positions)?;
        Ok(TrajectoryDataset {
            grid,
            n_objects,
            n_ticks,
            positions,
            d_max: d_max.max(observed),
        })
    }

    pub fn n_objects(&self) -> u32 {
        self.n_objects
    }

    pub fn n_ticks(&self) -> u32 {
        self.n_ticks
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.n_objects).map(ObjectId)
    }

    pub fn last_tau(&self) -> Tau {
        self.grid.last_tau(self.n_ticks)
    }

    #[inline]
    pub fn at(&self, tick: u32, object: ObjectId) -> Point {
        self.positions[tick as usize * self.n_objects as usize + object.index()]
    }

    pub fn tick_slice(&self, tick: u32) -> &[Point] {
        let n = self.n_objects as usize;
        let start = tick as usize * n;
        &self.positions[start..start + n]
    }

    /// Linearly interpolated position at τ instant `tau`.
    pub fn at_tau(&self, tau: Tau, object: ObjectId) -> Point {
        let r = self.grid.tau_per_tick;
        let tick = tau / r;
        let sub = tau % r;
        let here = self.at(tick, object);
        if sub == 0 || tick + 1 >= self.n_ticks {
            return here;
        }
        here.lerp(self.at(tick + 1, object), sub as f64 / r as f64)
    }

    /// The first `n_ticks` reporting times, with `d_max` recomputed.
    pub fn prefix(&self, n_ticks: u32) -> TrajectoryDataset {
        let n_ticks = n_ticks.clamp(1, self.n_ticks);
        let end = n_ticks as usize * self.n_objects as usize;
        let positions = self.positions[..end].to_vec();
        let d_max = observed_d_max(self.n_objects, n_ticks, &positions).unwrap_or(0.0);
        TrajectoryDataset {
            grid: self.grid,
            n_objects: self.n_objects,
            n_ticks,
            positions,
            d_max,
        }
    }
}

fn observed_d_max(n_objects: u32, n_ticks: u32, positions: &[Point]) -> Result<f64, DatasetError> {
    if n_objects == 0 || n_ticks == 0 {
        return Err(DatasetError::Empty);
    }
    let n = n_objects as usize;
    let expected = n * n_ticks as usize;
    if positions.len() != expected {
        return Err(DatasetError::ShapeMismatch {
            expected,
            got: positions.len(),
        });
    }
    if let Some(i) = positions
        .iter()
        .position(|p| !(p.x.is_finite() && p.y.is_finite()))
    {
        return Err(DatasetError::NonFinite {
            tick: (i / n) as u32,
            object: (i % n) as u32,
        });
    }
    let mut d2 = 0.0f64;
    for t in 1..n_ticks as usize {
        let prev = &positions[(t - 1) * n..t * n];
        let cur = &positions[t * n..(t + 1) * n];
        for (a, b) in prev.iter().zip(cur) {
            d2 = d2.max(a.dist2(*b));
        }
    }
    Ok(sqrt(d2))
}

/// Square root by Newton iteration; `core` has no `f64::sqrt`.
pub(crate) fn sqrt(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        return if v.is_nan() { v } else { v.max(0.0) };
    }
    let mut x = if v >= 1.0 { v } else { 1.0 };
    loop {
        let next = 0.5 * (x + v / x);
        if next >= x {
            return x;
        }
        x = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sqrt_matches_std() {
        for v in [0.0, 1e-12, 0.25, 1.0, 2.0, 576.0, 1e6, 12345.678] {
            let ours = sqrt(v);
            let std = std::primitive::f64::sqrt(v);
            assert!(
                (ours - std).abs() <= 1e-9 * std.max(1.0),
                "{v}: {ours} vs {std}"
            );
        }
    }

    #[test]
    fn d_max_and_interpolation() {
        let grid = TimeGrid::new(6.0, 6).unwrap();
        let ds = TrajectoryDataset::new(
            grid,
            1,
            3,
            vec![
                Point::new(0.0, 0.0),
                Point::new(6.0, 8.0),
                Point::new(6.0, 8.0),
            ],
        )
        .unwrap();
        assert!((ds.d_max - 10.0).abs() < 1e-12);
        assert_eq!(ds.at_tau(3, ObjectId(0)), Point::new(3.0, 4.0));
        assert_eq!(ds.at_tau(12, ObjectId(0)), Point::new(6.0, 8.0));
        assert_eq!(ds.last_tau(), 12);
    }

    #[test]
    fn rejects_wrong_shape() {
        let grid = TimeGrid::new(1.0, 1).unwrap();
        assert_eq!(
            TrajectoryDataset::new(grid, 2, 2, vec![Point::default(); 3]),
            Err(DatasetError::ShapeMismatch {
                expected: 4,
                got: 3
            })
        );
        assert_eq!(
            TrajectoryDataset::new(grid, 0, 2, vec![]),
            Err(DatasetError::Empty)
        );
    }
}
