//! Trajectory files.
//!
//! Binary layout, little-endian: magic `STRJ1`, `n_objects: u32`,
//! `delta_t: f64`, `tau_per_tick: u32`, `n_ticks: u32`, `d_max: f64`, then
//! one `(tick: u32, object: u32, x: f64, y: f64)` record per object and tick,
//! ordered by tick then object.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use decayreach_core::{Point, TimeGrid, TrajectoryDataset};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"STRJ1";
const HEADER_LEN: usize = 5 + 4 + 8 + 4 + 4 + 8;
const RECORD_LEN: usize = 24;

pub fn encode(ds: &TrajectoryDataset) -> Vec<u8> {
    let n = ds.n_objects();
    let mut out = Vec::with_capacity(HEADER_LEN + ds.positions().len() * RECORD_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&ds.grid.delta_t.to_le_bytes());
    out.extend_from_slice(&ds.grid.tau_per_tick.to_le_bytes());
    out.extend_from_slice(&ds.n_ticks().to_le_bytes());
    out.extend_from_slice(&ds.d_max.to_le_bytes());
    for (i, p) in ds.positions().iter().enumerate() {
        let tick = (i / n as usize) as u32;
        let object = (i % n as usize) as u32;
        out.extend_from_slice(&tick.to_le_bytes());
        out.extend_from_slice(&object.to_le_bytes());
        out.extend_from_slice(&p.x.to_le_bytes());
        out.extend_from_slice(&p.y.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<TrajectoryDataset> {
    if bytes.len() < HEADER_LEN || &bytes[..5] != MAGIC {
        return Err(Error::format(
            path,
            "malformed header: not a trajectory file",
        ));
    }
    let n = u32_at(bytes, 5);
    let delta_t = f64_at(bytes, 9);
    let tau_per_tick = u32_at(bytes, 17);
    let n_ticks = u32_at(bytes, 21);
    let d_max = f64_at(bytes, 25);
    let grid = TimeGrid::new(delta_t, tau_per_tick)
        .map_err(|e| Error::format(path, format!("malformed header: {e}")))?;
    let expected = n as usize * n_ticks as usize;
    let body = &bytes[HEADER_LEN..];
    if !body.len().is_multiple_of(RECORD_LEN) || body.len() / RECORD_LEN < expected {
        return Err(Error::format(
            path,
            format!(
                "truncated: expected {expected} records, found {:.1}",
                body.len() as f64 / RECORD_LEN as f64
            ),
        ));
    }
    if body.len() / RECORD_LEN > expected {
        return Err(Error::format(
            path,
            "trailing records beyond the declared size",
        ));
    }
    let key = |rec: &[u8]| (u32_at(rec, 0), u32_at(rec, 4));
    let records = || body.chunks_exact(RECORD_LEN);
    for (a, b) in records().zip(records().skip(1)) {
        let (ka, kb) = (key(a), key(b));
        if kb <= ka {
            return Err(Error::format(
                path,
                format!(
                    "out-of-order record: tick {} object {} after tick {} object {}",
                    kb.0, kb.1, ka.0, ka.1
                ),
            ));
        }
    }
    let mut positions = Vec::with_capacity(expected);
    for (i, rec) in records().enumerate() {
        let want = ((i / n as usize) as u32, (i % n as usize) as u32);
        if key(rec) != want {
            return Err(Error::format(
                path,
                format!("missing record for tick {} object {}", want.0, want.1),
            ));
        }
        positions.push(Point::new(f64_at(rec, 8), f64_at(rec, 16)));
    }
    Ok(TrajectoryDataset::with_d_max(
        grid, n, n_ticks, positions, d_max,
    )?)
}

pub fn write_dataset(ds: &TrajectoryDataset, path: &Path) -> Result<()> {
    fs::write(path, encode(ds)).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<TrajectoryDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

/// Imports `t,object_id,x,y` rows with `t` in seconds from time zero. Every
/// object must report at every tick `round(t / delta_t)`.
pub fn read_csv(path: &Path, delta_t: f64, tau_per_tick: u32) -> Result<TrajectoryDataset> {
    let grid = TimeGrid::new(delta_t, tau_per_tick)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let mut rows: BTreeMap<(u32, u32), Point> = BTreeMap::new();
    for (line, rec) in reader.deserialize::<(f64, u32, f64, f64)>().enumerate() {
        let (t, object, x, y) = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let tick = (t / delta_t).round();
        if !(tick >= 0.0 && tick <= u32::MAX as f64) {
            return Err(Error::format(
                path,
                format!("row {}: time {t} is out of range", line + 2),
            ));
        }
        if rows
            .insert((tick as u32, object), Point::new(x, y))
            .is_some()
        {
            return Err(Error::format(
                path,
                format!("row {}: duplicate report for object {object}", line + 2),
            ));
        }
    }
    let Some(&(last_tick, _)) = rows.keys().next_back() else {
        return Err(Error::format(path, "no rows"));
    };
    let n = rows.keys().map(|k| k.1).max().expect("nonempty") + 1;
    let n_ticks = last_tick + 1;
    let mut positions = Vec::with_capacity(n as usize * n_ticks as usize);
    for tick in 0..n_ticks {
        for object in 0..n {
            let p = rows.get(&(tick, object)).ok_or_else(|| {
                Error::format(
                    path,
                    format!("missing report for object {object} at tick {tick}"),
                )
            })?;
            positions.push(*p);
        }
    }
    Ok(TrajectoryDataset::new(grid, n, n_ticks, positions)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrajectoryDataset {
        let grid = TimeGrid::new(6.0, 6).unwrap();
        let pts = (0..6)
            .map(|i| Point::new(i as f64, 2.0 * i as f64))
            .collect();
        TrajectoryDataset::new(grid, 2, 3, pts).unwrap()
    }

    #[test]
    fn round_trip_is_canonical() {
        let ds = sample();
        let bytes = encode(&ds);
        let back = decode(&bytes, Path::new("mem")).unwrap();
        assert_eq!(back, ds);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn rejects_empty_and_truncated() {
        assert!(
            matches!(decode(&[], Path::new("x")), Err(Error::Format { msg, .. }) if msg.contains("header"))
        );
        let bytes = encode(&sample());
        let cut = &bytes[..bytes.len() - 3];
        assert!(
            matches!(decode(cut, Path::new("x")), Err(Error::Format { msg, .. }) if msg.contains("truncated"))
        );
    }

    #[test]
    fn rejects_out_of_order() {
        let mut bytes = encode(&sample());
        // Record 2 claims tick 2, so record 3 (tick 1) comes out of order.
        let rec = |i: usize| HEADER_LEN + i * RECORD_LEN;
        bytes[rec(2)..rec(2) + 4].copy_from_slice(&2u32.to_le_bytes());
        let err = decode(&bytes, Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("out-of-order"), "{err}");
    }
}
