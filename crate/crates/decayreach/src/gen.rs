//! Random-waypoint style trajectory generator.
//!
//! A fixed share of objects keeps taking trips: a uniform direction, a
//! uniform speed and a uniform trip duration, then a fresh trip. The others
//! never move. Walls reflect.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decayreach_core::{Point, TimeGrid, TrajectoryDataset};

use crate::error::{Error, Result};

/// Objects per square kilometer used when no area is given.
pub const DEFAULT_DENSITY_PER_KM2: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_objects: u32,
    /// Side of the square area in meters.
    pub area_side: f64,
    pub duration_ticks: u32,
    pub delta_t: f64,
    pub tau_per_tick: u32,
    pub speed_min: f64,
    pub speed_max: f64,
    pub moving_fraction: f64,
    /// Trip duration range in seconds.
    pub trip_duration: (f64, f64),
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_objects: 200,
            area_side: GenConfig::side_for_density(200, DEFAULT_DENSITY_PER_KM2),
            duration_ticks: 1200,
            delta_t: 6.0,
            tau_per_tick: 6,
            speed_min: 1.5,
            speed_max: 4.0,
            moving_fraction: 0.9,
            trip_duration: (60.0, 600.0),
            seed: 1,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        if self.n_objects == 0 {
            return bad("at least one object is required");
        }
        if self.duration_ticks == 0 {
            return bad("duration must cover at least one tick");
        }
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return bad("area side must be positive");
        }
        if !(self.speed_min >= 0.0
            && self.speed_min <= self.speed_max
            && self.speed_max.is_finite())
        {
            return bad("speeds must satisfy 0 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.moving_fraction) {
            return bad("moving fraction must lie in [0, 1]");
        }
        let (lo, hi) = self.trip_duration;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("trip durations must satisfy 0 < min <= max");
        }
        TimeGrid::new(self.delta_t, self.tau_per_tick)?;
        Ok(())
    }

    /// Side of the square that holds `n_objects` at `per_km2` objects per
    /// square kilometer.
    pub fn side_for_density(n_objects: u32, per_km2: f64) -> f64 {
        (n_objects as f64 / per_km2 * 1e6).sqrt()
    }

    /// Number of objects that move.
    pub fn moving_count(&self) -> u32 {
        (self.n_objects as f64 * self.moving_fraction).round() as u32
    }
}

struct Trip {
    vx: f64,
    vy: f64,
    left: f64,
}

fn new_trip(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Trip {
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let speed = if cfg.speed_min < cfg.speed_max {
        rng.gen_range(cfg.speed_min..=cfg.speed_max)
    } else {
        cfg.speed_min
    };
    let (lo, hi) = cfg.trip_duration;
    let left = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    Trip {
        vx: speed * angle.cos(),
        vy: speed * angle.sin(),
        left,
    }
}

/// Moves along one axis for `dt` seconds, reflecting off `0` and `side`.
fn reflect(pos: f64, vel: f64, dt: f64, side: f64) -> (f64, f64) {
    let mut p = pos + vel * dt;
    let mut v = vel;
    while !(0.0..=side).contains(&p) {
        if p < 0.0 {
            p = -p;
        } else {
            p = 2.0 * side - p;
        }
        v = -v;
    }
    (p, v)
}

pub fn generate(cfg: &GenConfig) -> Result<TrajectoryDataset> {
    cfg.validate()?;
    let grid = TimeGrid::new(cfg.delta_t, cfg.tau_per_tick)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_objects as usize;
    let mut pos: Vec<Point> = (0..n)
        .map(|_| {
            Point::new(
                rng.gen_range(0.0..=cfg.area_side),
                rng.gen_range(0.0..=cfg.area_side),
            )
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut trips: Vec<Option<Trip>> = (0..n).map(|_| None).collect();
    for &o in &order[..cfg.moving_count() as usize] {
        trips[o] = Some(new_trip(cfg, &mut rng));
    }

    let mut positions = Vec::with_capacity(n * cfg.duration_ticks as usize);
    positions.extend_from_slice(&pos);
    for _ in 1..cfg.duration_ticks {
        for (o, slot) in trips.iter_mut().enumerate() {
            let Some(trip) = slot else { continue };
            let mut remaining = cfg.delta_t;
            while remaining > 0.0 {
                let step = remaining.min(trip.left);
                let (x, vx) = reflect(pos[o].x, trip.vx, step, cfg.area_side);
                let (y, vy) = reflect(pos[o].y, trip.vy, step, cfg.area_side);
                pos[o] = Point::new(x, y);
                trip.vx = vx;
                trip.vy = vy;
                trip.left -= step;
                remaining -= step;
                if trip.left <= 0.0 {
                    *trip = new_trip(cfg, &mut rng);
                }
            }
        }
        positions.extend_from_slice(&pos);
    }
    Ok(TrajectoryDataset::new(
        grid,
        cfg.n_objects,
        cfg.duration_ticks,
        positions,
    )?)
}
