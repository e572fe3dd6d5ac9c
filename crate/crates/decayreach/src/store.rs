//! On-disk block index and its paged reader.
//!
//! An index directory holds `meta.json` and five binary files. Each binary
//! file starts with one header page (magic, version, record count, zero
//! padding); fixed-width little-endian records follow from byte 4096.
//!
//! | file           | record                                                        |
//! |----------------|---------------------------------------------------------------|
//! | `meetings.dat` | peer u32, tau_start u32, tau_end u32, flags u8                |
//! | `reached.dat`  | reached u32, tau_r u32, hops u16                              |
//! | `meetings.idx` | object u32, byte offset u64, count u32                        |
//! | `reached.idx`  | object u32, byte offset u64, count u32                        |
//! | `blocks.idx`   | block id, first tick, last tick, tau first, tau last (u32),   |
//! |                | meetings.idx offset u64, count u32, reached.idx offset u64, count u32 |
//!
//! Within a block, objects appear in layout order: by grid cell at the
//! block's first tick, then by id. `reached.dat` stores each source's
//! entries without the source itself, and omits sources that reach nobody.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use decayreach_core::contact::{self, plan_blocks};
use decayreach_core::reach::{reach_all, BlockReachRecord, BoundaryMode, ReachEntry};
use decayreach_core::{
    BlockInfo, BlockSource, IoStats, ObjectId, StoredMeeting, Tau, TrajectoryDataset,
};

use crate::error::{Error, Result};

pub const PAGE_SIZE: usize = 4096;
pub const FORMAT_VERSION: u32 = 1;
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FileKind {
    Meetings,
    Reached,
    MeetingsIndex,
    ReachedIndex,
    Blocks,
}

impl FileKind {
    pub const ALL: [FileKind; 5] = [
        FileKind::Meetings,
        FileKind::Reached,
        FileKind::MeetingsIndex,
        FileKind::ReachedIndex,
        FileKind::Blocks,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            FileKind::Meetings => "meetings.dat",
            FileKind::Reached => "reached.dat",
            FileKind::MeetingsIndex => "meetings.idx",
            FileKind::ReachedIndex => "reached.idx",
            FileKind::Blocks => "blocks.idx",
        }
    }

    fn magic(self) -> &'static [u8; 8] {
        match self {
            FileKind::Meetings => b"DRMEETS1",
            FileKind::Reached => b"DRREACH1",
            FileKind::MeetingsIndex => b"DRMIDX01",
            FileKind::ReachedIndex => b"DRRIDX01",
            FileKind::Blocks => b"DRBLKS01",
        }
    }

    pub fn record_len(self) -> usize {
        match self {
            FileKind::Meetings => MEETING_LEN,
            FileKind::Reached => REACHED_LEN,
            FileKind::MeetingsIndex | FileKind::ReachedIndex => INDEX_LEN,
            FileKind::Blocks => BLOCK_LEN,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

const MEETING_LEN: usize = 13;
const REACHED_LEN: usize = 10;
const INDEX_LEN: usize = 16;
const BLOCK_LEN: usize = 44;

/// Parameters recorded next to the index files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub format_version: u32,
    /// Reporting ticks per block.
    #[serde(rename = "C")]
    pub ticks_per_block: u32,
    /// Grid cell side in meters.
    #[serde(rename = "H")]
    pub cell_side: f64,
    pub mu: Tau,
    pub tau_per_tick: u32,
    pub page_size: usize,
    pub delta_t: f64,
    pub d_cont: f64,
    pub d_max: f64,
    pub n_objects: u32,
    pub n_ticks: u32,
    pub n_blocks: u32,
    pub tau_last: Tau,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessParams {
    pub ticks_per_block: u32,
    pub cell_side: f64,
    pub mu: Tau,
    pub d_cont: f64,
}

impl PreprocessParams {
    pub fn validate(&self) -> Result<()> {
        if self.ticks_per_block == 0 {
            return Err(Error::Invalid(
                "blocks must span at least one reporting tick".into(),
            ));
        }
        if !(self.cell_side > 0.0 && self.cell_side.is_finite()) {
            return Err(Error::Invalid("grid cell side must be positive".into()));
        }
        if self.mu == 0 {
            return Err(Error::Invalid(
                "minimum meeting duration must be at least 1".into(),
            ));
        }
        if !(self.d_cont > 0.0 && self.d_cont.is_finite()) {
            return Err(Error::Invalid("contact distance must be positive".into()));
        }
        Ok(())
    }
}

struct FileBuf {
    kind: FileKind,
    bytes: Vec<u8>,
}

impl FileBuf {
    fn new(kind: FileKind) -> Self {
        FileBuf {
            kind,
            bytes: vec![0; PAGE_SIZE],
        }
    }

    fn offset(&self) -> u64 {
        self.bytes.len() as u64
    }

    fn finish(mut self) -> Vec<u8> {
        let count = ((self.bytes.len() - PAGE_SIZE) / self.kind.record_len()) as u64;
        self.bytes[..8].copy_from_slice(self.kind.magic());
        self.bytes[8..12].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        self.bytes[12..20].copy_from_slice(&count.to_le_bytes());
        self.bytes
    }
}

fn put_index(buf: &mut FileBuf, object: ObjectId, offset: u64, count: usize) {
    buf.bytes.extend_from_slice(&object.0.to_le_bytes());
    buf.bytes.extend_from_slice(&offset.to_le_bytes());
    buf.bytes.extend_from_slice(&(count as u32).to_le_bytes());
}

/// Builds the index for `ds` in `out_dir`, creating the directory if needed.
/// Output bytes depend only on the inputs.
pub fn preprocess(
    ds: &TrajectoryDataset,
    params: &PreprocessParams,
    out_dir: &Path,
) -> Result<IndexPackage> {
    params.validate()?;
    let blocks = plan_blocks(
        ds.n_ticks(),
        ds.grid.tau_per_tick,
        params.ticks_per_block,
        params.cell_side,
    );
    let mut meet = FileBuf::new(FileKind::Meetings);
    let mut reach = FileBuf::new(FileKind::Reached);
    let mut midx = FileBuf::new(FileKind::MeetingsIndex);
    let mut ridx = FileBuf::new(FileKind::ReachedIndex);
    let mut bidx = FileBuf::new(FileKind::Blocks);

    for spec in &blocks {
        let info = BlockInfo::from(spec);
        let meetings = contact::detect_block(ds, spec, params.d_cont, params.mu);
        let by_object = contact::meetings_by_object(&meetings);
        let records: BTreeMap<ObjectId, BlockReachRecord> =
            reach_all(&meetings, params.mu, &info, BoundaryMode::OpenEnded)
                .into_iter()
                .map(|r| (r.source, r))
                .collect();
        let order = contact::layout_order(ds, spec);

        let (midx_offset, ridx_offset) = (midx.offset(), ridx.offset());
        let (mut midx_count, mut ridx_count) = (0u32, 0u32);
        for &o in &order {
            if let Some(ms) = by_object.get(&o) {
                put_index(&mut midx, o, meet.offset(), ms.len());
                midx_count += 1;
                for m in ms {
                    let flags = u8::from(m.boundary_start) | (u8::from(m.boundary_end) << 1);
                    meet.bytes.extend_from_slice(&m.peer.0.to_le_bytes());
                    meet.bytes.extend_from_slice(&m.tau_start.to_le_bytes());
                    meet.bytes.extend_from_slice(&m.tau_end.to_le_bytes());
                    meet.bytes.push(flags);
                }
            }
            let Some(rec) = records.get(&o) else { continue };
            let others: Vec<&ReachEntry> = rec.reached.iter().filter(|e| e.object != o).collect();
            if others.is_empty() {
                continue;
            }
            put_index(&mut ridx, o, reach.offset(), others.len());
            ridx_count += 1;
            for e in others {
                let hops = u16::try_from(e.hops).map_err(|_| {
                    Error::Invalid(format!(
                        "hop count {} does not fit the record format",
                        e.hops
                    ))
                })?;
                reach.bytes.extend_from_slice(&e.object.0.to_le_bytes());
                reach.bytes.extend_from_slice(&e.tau_r.to_le_bytes());
                reach.bytes.extend_from_slice(&hops.to_le_bytes());
            }
        }
        for v in [
            spec.block_id,
            spec.first_tick,
            spec.last_tick,
            spec.tau_first,
            spec.tau_last,
        ] {
            bidx.bytes.extend_from_slice(&v.to_le_bytes());
        }
        bidx.bytes.extend_from_slice(&midx_offset.to_le_bytes());
        bidx.bytes.extend_from_slice(&midx_count.to_le_bytes());
        bidx.bytes.extend_from_slice(&ridx_offset.to_le_bytes());
        bidx.bytes.extend_from_slice(&ridx_count.to_le_bytes());
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for buf in [meet, reach, midx, ridx, bidx] {
        let path = out_dir.join(buf.kind.file_name());
        fs::write(&path, buf.finish()).map_err(|e| Error::io(&path, e))?;
    }
    let meta = IndexMeta {
        format_version: FORMAT_VERSION,
        ticks_per_block: params.ticks_per_block,
        cell_side: params.cell_side,
        mu: params.mu,
        tau_per_tick: ds.grid.tau_per_tick,
        page_size: PAGE_SIZE,
        delta_t: ds.grid.delta_t,
        d_cont: params.d_cont,
        d_max: ds.d_max,
        n_objects: ds.n_objects(),
        n_ticks: ds.n_ticks(),
        n_blocks: blocks.len() as u32,
        tau_last: ds.last_tau(),
    };
    let path = out_dir.join(META_FILE);
    let mut json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    IndexPackage::open(out_dir)
}

/// An opened, validated index directory. Shared read-only between sessions.
#[derive(Debug)]
pub struct IndexPackage {
    dir: PathBuf,
    meta: IndexMeta,
    files: Vec<File>,
    lens: Vec<u64>,
}

impl IndexPackage {
    pub fn open(dir: &Path) -> Result<Self> {
        let meta_path = dir.join(META_FILE);
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: IndexMeta =
            serde_json::from_str(&text).map_err(|e| Error::format(&meta_path, e.to_string()))?;
        if meta.format_version != FORMAT_VERSION || meta.page_size != PAGE_SIZE {
            return Err(Error::format(
                &meta_path,
                "unsupported format version or page size",
            ));
        }
        let mut files = Vec::new();
        let mut lens = Vec::new();
        for kind in FileKind::ALL {
            let path = dir.join(kind.file_name());
            let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
            let len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
            let mut header = [0u8; 20];
            if len < PAGE_SIZE as u64 {
                return Err(Error::format(
                    &path,
                    "malformed header: file shorter than one page",
                ));
            }
            file.read_exact_at(&mut header, 0)
                .map_err(|e| Error::io(&path, e))?;
            if &header[..8] != kind.magic() {
                return Err(Error::format(&path, "malformed header: wrong magic"));
            }
            if u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) != FORMAT_VERSION {
                return Err(Error::format(&path, "unsupported format version"));
            }
            let count = u64::from_le_bytes(header[12..20].try_into().expect("8 bytes"));
            if PAGE_SIZE as u64 + count * kind.record_len() as u64 != len {
                return Err(Error::format(
                    &path,
                    format!("truncated: header declares {count} records"),
                ));
            }
            files.push(file);
            lens.push(len);
        }
        let blocks = (lens[FileKind::Blocks.slot()] - PAGE_SIZE as u64) / BLOCK_LEN as u64;
        if blocks != meta.n_blocks as u64 {
            return Err(Error::format(
                dir,
                "block count in meta.json disagrees with blocks.idx",
            ));
        }
        Ok(IndexPackage {
            dir: dir.to_path_buf(),
            meta,
            files,
            lens,
        })
    }

    pub fn meta(&self) -> &IndexMeta {
        &self.meta
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// A reader with its own page cache and I/O counters, for one query.
    pub fn session(&self) -> IndexSession<'_> {
        IndexSession {
            pkg: self,
            io: IoStats::default(),
            last_page: [None; 5],
            pages: HashMap::new(),
            blocks: None,
            meeting_index: HashMap::new(),
            reached_index: HashMap::new(),
        }
    }

    fn path(&self, kind: FileKind) -> PathBuf {
        self.dir.join(kind.file_name())
    }
}

#[derive(Debug, Clone, Copy)]
struct BlockEntry {
    info: BlockInfo,
    midx: (u64, u32),
    ridx: (u64, u32),
}

type Directory = BTreeMap<ObjectId, (u64, u32)>;

/// Per-query reader. Each page is charged once; a page counts as sequential
/// when it directly follows the previous page read from the same file.
pub struct IndexSession<'a> {
    pkg: &'a IndexPackage,
    io: IoStats,
    last_page: [Option<u64>; 5],
    pages: HashMap<(FileKind, u64), Vec<u8>>,
    blocks: Option<(Vec<BlockEntry>, Vec<BlockInfo>)>,
    meeting_index: HashMap<u32, Directory>,
    reached_index: HashMap<u32, Directory>,
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

impl<'a> IndexSession<'a> {
    pub fn package(&self) -> &'a IndexPackage {
        self.pkg
    }

    fn page(&mut self, kind: FileKind, page: u64) -> Result<&[u8]> {
        let key = (kind, page);
        if !self.pages.contains_key(&key) {
            let slot = kind.slot();
            let len = self.pkg.lens[slot];
            let start = page * PAGE_SIZE as u64;
            if start >= len {
                return Err(Error::format(
                    self.pkg.path(kind),
                    format!("page {page} lies past the end of the file"),
                ));
            }
            let mut buf = vec![0u8; (len - start).min(PAGE_SIZE as u64) as usize];
            self.pkg.files[slot]
                .read_exact_at(&mut buf, start)
                .map_err(|e| Error::io(self.pkg.path(kind), e))?;
            if self.last_page[slot].is_some_and(|p| p + 1 == page) {
                self.io.sequential_pages += 1;
            } else {
                self.io.random_pages += 1;
            }
            self.last_page[slot] = Some(page);
            self.pages.insert(key, buf);
        }
        Ok(&self.pages[&key])
    }

    fn read_range(&mut self, kind: FileKind, offset: u64, len: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return Ok(out);
        }
        let end = offset + len as u64;
        if offset < PAGE_SIZE as u64 || end > self.pkg.lens[kind.slot()] {
            return Err(Error::format(
                self.pkg.path(kind),
                format!("dangling pointer to bytes {offset}..{end}"),
            ));
        }
        let ps = PAGE_SIZE as u64;
        for page in offset / ps..=(end - 1) / ps {
            let data = self.page(kind, page)?;
            let lo = offset.max(page * ps) - page * ps;
            let hi = end.min((page + 1) * ps) - page * ps;
            out.extend_from_slice(&data[lo as usize..hi as usize]);
        }
        Ok(out)
    }

    fn load_blocks(&mut self) -> Result<()> {
        if self.blocks.is_some() {
            return Ok(());
        }
        let n = self.pkg.meta.n_blocks as usize;
        let bytes = self.read_range(FileKind::Blocks, PAGE_SIZE as u64, n * BLOCK_LEN)?;
        let entries: Vec<BlockEntry> = bytes
            .chunks_exact(BLOCK_LEN)
            .map(|r| BlockEntry {
                info: BlockInfo {
                    block_id: u32_at(r, 0),
                    tau_first: u32_at(r, 12),
                    tau_last: u32_at(r, 16),
                },
                midx: (u64_at(r, 20), u32_at(r, 28)),
                ridx: (u64_at(r, 32), u32_at(r, 40)),
            })
            .collect();
        let infos = entries.iter().map(|e| e.info).collect();
        self.blocks = Some((entries, infos));
        Ok(())
    }

    fn entry(&mut self, block: u32) -> Result<BlockEntry> {
        self.load_blocks()?;
        let (entries, _) = self.blocks.as_ref().expect("loaded");
        entries
            .get(block as usize)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("block {block} does not exist")))
    }

    fn directory(&mut self, block: u32, kind: FileKind) -> Result<&Directory> {
        let loaded = match kind {
            FileKind::MeetingsIndex => self.meeting_index.contains_key(&block),
            _ => self.reached_index.contains_key(&block),
        };
        if !loaded {
            let e = self.entry(block)?;
            let (offset, count) = if kind == FileKind::MeetingsIndex {
                e.midx
            } else {
                e.ridx
            };
            let bytes = self.read_range(kind, offset, count as usize * INDEX_LEN)?;
            let dir: Directory = bytes
                .chunks_exact(INDEX_LEN)
                .map(|r| (ObjectId(u32_at(r, 0)), (u64_at(r, 4), u32_at(r, 12))))
                .collect();
            match kind {
                FileKind::MeetingsIndex => self.meeting_index.insert(block, dir),
                _ => self.reached_index.insert(block, dir),
            };
        }
        Ok(match kind {
            FileKind::MeetingsIndex => &self.meeting_index[&block],
            _ => &self.reached_index[&block],
        })
    }

    /// Locates the listed objects and returns their data ranges in file order.
    fn locate(
        &mut self,
        block: u32,
        kind: FileKind,
        objects: &[ObjectId],
    ) -> Result<Vec<(ObjectId, u64, u32)>> {
        let dir = self.directory(block, kind)?;
        let mut hits: Vec<(ObjectId, u64, u32)> = objects
            .iter()
            .filter_map(|o| dir.get(o).map(|&(off, n)| (*o, off, n)))
            .collect();
        hits.sort_by_key(|h| h.1);
        hits.dedup();
        Ok(hits)
    }

    fn check_object(&self, kind: FileKind, id: u32) -> Result<ObjectId> {
        if id >= self.pkg.meta.n_objects {
            return Err(Error::format(
                self.pkg.path(kind),
                format!("record names unknown object {id}"),
            ));
        }
        Ok(ObjectId(id))
    }
}

impl BlockSource for IndexSession<'_> {
    type Error = Error;

    fn n_objects(&self) -> u32 {
        self.pkg.meta.n_objects
    }

    fn mu(&self) -> Tau {
        self.pkg.meta.mu
    }

    fn blocks(&mut self) -> Result<&[BlockInfo]> {
        self.load_blocks()?;
        Ok(&self.blocks.as_ref().expect("loaded").1)
    }

    fn reached(
        &mut self,
        block: u32,
        sources: &[ObjectId],
    ) -> Result<Vec<(ObjectId, Vec<ReachEntry>)>> {
        let mut out = Vec::new();
        for (o, offset, count) in self.locate(block, FileKind::ReachedIndex, sources)? {
            let bytes = self.read_range(FileKind::Reached, offset, count as usize * REACHED_LEN)?;
            let mut entries = Vec::with_capacity(count as usize);
            for r in bytes.chunks_exact(REACHED_LEN) {
                entries.push(ReachEntry {
                    object: self.check_object(FileKind::Reached, u32_at(r, 0))?,
                    tau_r: u32_at(r, 4),
                    hops: u16::from_le_bytes([r[8], r[9]]) as u32,
                });
            }
            out.push((o, entries));
        }
        Ok(out)
    }

    fn meetings(
        &mut self,
        block: u32,
        objects: &[ObjectId],
    ) -> Result<Vec<(ObjectId, Vec<StoredMeeting>)>> {
        let mut out = Vec::new();
        for (o, offset, count) in self.locate(block, FileKind::MeetingsIndex, objects)? {
            let bytes =
                self.read_range(FileKind::Meetings, offset, count as usize * MEETING_LEN)?;
            let mut ms = Vec::with_capacity(count as usize);
            for r in bytes.chunks_exact(MEETING_LEN) {
                let m = StoredMeeting {
                    peer: self.check_object(FileKind::Meetings, u32_at(r, 0))?,
                    tau_start: u32_at(r, 4),
                    tau_end: u32_at(r, 8),
                    boundary_start: r[12] & 1 != 0,
                    boundary_end: r[12] & 2 != 0,
                };
                if m.tau_start > m.tau_end {
                    return Err(Error::format(
                        self.pkg.path(FileKind::Meetings),
                        "meeting ends before it starts",
                    ));
                }
                ms.push(m);
            }
            out.push((o, ms));
        }
        Ok(out)
    }

    fn io(&self) -> IoStats {
        self.io
    }
}

/// Reach record of `source` in `block`, source first at the block start.
pub fn read_reached(
    session: &mut IndexSession<'_>,
    block: u32,
    source: ObjectId,
) -> Result<BlockReachRecord> {
    let tau_first = session.entry(block)?.info.tau_first;
    let mut reached = vec![ReachEntry {
        object: source,
        tau_r: tau_first,
        hops: 0,
    }];
    for (_, entries) in session.reached(block, &[source])? {
        reached.extend(entries);
    }
    Ok(BlockReachRecord { source, reached })
}

/// Meetings of `object` in `block`, sorted by start.
pub fn read_meetings(
    session: &mut IndexSession<'_>,
    block: u32,
    object: ObjectId,
) -> Result<Vec<StoredMeeting>> {
    Ok(session
        .meetings(block, &[object])?
        .into_iter()
        .flat_map(|(_, ms)| ms)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use decayreach_core::fixtures::{chain_dataset, CHAIN_D_CONT, FIXTURE_MU};

    fn chain_params(c: u32) -> PreprocessParams {
        PreprocessParams {
            ticks_per_block: c,
            cell_side: 25.0,
            mu: FIXTURE_MU,
            d_cont: CHAIN_D_CONT,
        }
    }

    #[test]
    fn chain_record_survives_the_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pkg = preprocess(&chain_dataset(), &chain_params(10), dir.path()).unwrap();
        let mut s = pkg.session();
        let rec = read_reached(&mut s, 0, ObjectId(1)).unwrap();
        let hops: Vec<(u32, u32)> = rec.reached.iter().map(|e| (e.object.0, e.hops)).collect();
        assert_eq!(hops, vec![(1, 0), (2, 2), (3, 1), (4, 2)]);
        let ms = read_meetings(&mut s, 0, ObjectId(3)).unwrap();
        assert_eq!(
            ms.iter().map(|m| m.peer.0).collect::<Vec<_>>(),
            vec![1, 2, 4]
        );
        assert!(ms.windows(2).all(|w| w[0].tau_start <= w[1].tau_start));
    }

    #[test]
    fn absent_object_reads_empty_and_costs_index_pages() {
        let dir = tempfile::tempdir().unwrap();
        let pkg = preprocess(&chain_dataset(), &chain_params(10), dir.path()).unwrap();
        let mut s = pkg.session();
        assert!(read_meetings(&mut s, 0, ObjectId(0)).unwrap().is_empty());
        let rec = read_reached(&mut s, 0, ObjectId(0)).unwrap();
        assert_eq!(rec.reached.len(), 1);
        assert!(s.io().total_pages() >= 2);
        let again = s.io();
        read_meetings(&mut s, 0, ObjectId(0)).unwrap();
        assert_eq!(s.io(), again, "cached pages are free");
    }

    #[test]
    fn rejects_bad_params_and_missing_block() {
        let dir = tempfile::tempdir().unwrap();
        let ds = chain_dataset();
        assert!(preprocess(
            &ds,
            &PreprocessParams {
                mu: 0,
                ..chain_params(10)
            },
            dir.path()
        )
        .is_err());
        assert!(preprocess(
            &ds,
            &PreprocessParams {
                ticks_per_block: 0,
                ..chain_params(10)
            },
            dir.path()
        )
        .is_err());
        let pkg = preprocess(&ds, &chain_params(10), dir.path()).unwrap();
        assert!(read_meetings(&mut pkg.session(), 7, ObjectId(1)).is_err());
    }

    #[test]
    fn multi_page_range_costs_one_random_then_sequential() {
        let dir = tempfile::tempdir().unwrap();
        let pkg = preprocess(&chain_dataset(), &chain_params(10), dir.path()).unwrap();
        let path = dir.path().join(FileKind::Meetings.file_name());
        fs::OpenOptions::new()
            .write(true)
            .open(&path)
            .unwrap()
            .set_len(4 * PAGE_SIZE as u64)
            .unwrap();
        let files: Vec<File> = FileKind::ALL
            .iter()
            .map(|k| File::open(dir.path().join(k.file_name())).unwrap())
            .collect();
        let lens = files.iter().map(|f| f.metadata().unwrap().len()).collect();
        let padded = IndexPackage {
            dir: dir.path().to_path_buf(),
            meta: pkg.meta.clone(),
            files,
            lens,
        };
        let mut s = padded.session();
        s.read_range(FileKind::Meetings, PAGE_SIZE as u64, 3 * PAGE_SIZE)
            .unwrap();
        assert_eq!(
            s.io(),
            IoStats {
                random_pages: 1,
                sequential_pages: 2
            }
        );
        s.read_range(FileKind::Meetings, PAGE_SIZE as u64 + 10, 100)
            .unwrap();
        assert_eq!(s.io().total_pages(), 3);
    }
}
