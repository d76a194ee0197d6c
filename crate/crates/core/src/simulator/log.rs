use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::trajectory::Orientation;
use crate::error::{Error, Result};
use crate::manifest::canonical_json;

pub const SEGMENTS_FILE: &str = "segments.csv";
pub const TICKS_FILE: &str = "ticks.csv";
pub const META_FILE: &str = "run.json";

/// Run configuration recorded alongside a log, used to check that logs
/// being compared came from the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub policy: String,
    pub gamma: Option<f64>,
    pub stride: Option<u32>,
    pub frame_width: u32,
    pub frame_height: u32,
    pub n_tiles: u32,
    pub segment_duration_ms: u64,
    pub media_duration_ms: u64,
    pub tick_ms: u64,
    pub buffer_target_segments: u32,
    pub estimator_window: u32,
    pub quality_stride: u32,
    pub hfov_deg: f64,
    pub vfov_deg: f64,
    pub trace_sha256: String,
    pub trajectory_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileSelection {
    pub tile_id: u32,
    pub target_bps: f64,
    pub rep_id: u32,
    pub rep_bps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub seg_index: u64,
    pub request_ms: f64,
    pub r_cur_bps: f64,
    pub orientation: Orientation,
    pub tiles: Vec<TileSelection>,
    pub bits: f64,
    pub download_ms: f64,
    pub stall_ms: f64,
    pub play_start_ms: f64,
}

impl SegmentRecord {
    pub fn total_bps(&self) -> u64 {
        self.tiles.iter().map(|t| t.rep_bps).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub media_ms: u64,
    pub wall_ms: f64,
    pub seg_index: u64,
    pub orientation: Orientation,
    pub quality_db: f64,
    /// Pixel weight of every tile inside the viewport.
    pub weights: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationLog {
    pub meta: RunMeta,
    pub segments: Vec<SegmentRecord>,
    pub ticks: Vec<TickRecord>,
}

#[derive(Serialize, Deserialize)]
struct SegmentRow {
    seg_index: u64,
    request_ms: f64,
    r_cur_bps: f64,
    yaw_deg: f64,
    pitch_deg: f64,
    roll_deg: f64,
    tile_id: u32,
    target_bps: f64,
    rep_id: u32,
    rep_bps: u64,
    bits: f64,
    download_ms: f64,
    stall_ms: f64,
    play_start_ms: f64,
}

#[derive(Serialize, Deserialize)]
struct TickRow {
    media_ms: u64,
    wall_ms: f64,
    seg_index: u64,
    yaw_deg: f64,
    pitch_deg: f64,
    roll_deg: f64,
    quality_db: f64,
    /// `id:weight` pairs separated by `;`.
    weights: String,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Schema { line: 0, message: format!("{}: {kind:?}", path.display()) },
    }
}

impl SimulationLog {
    pub fn segments_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.segments {
            let (yaw_deg, pitch_deg, roll_deg) = s.orientation.degrees();
            for t in &s.tiles {
                w.serialize(SegmentRow {
                    seg_index: s.seg_index,
                    request_ms: s.request_ms,
                    r_cur_bps: s.r_cur_bps,
                    yaw_deg,
                    pitch_deg,
                    roll_deg,
                    tile_id: t.tile_id,
                    target_bps: t.target_bps,
                    rep_id: t.rep_id,
                    rep_bps: t.rep_bps,
                    bits: s.bits,
                    download_ms: s.download_ms,
                    stall_ms: s.stall_ms,
                    play_start_ms: s.play_start_ms,
                })
                .map_err(|e| csv_err(Path::new(SEGMENTS_FILE), e))?;
            }
        }
        w.into_inner().map_err(|e| Error::io(SEGMENTS_FILE, e.into_error()))
    }

    pub fn ticks_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.ticks {
            let (yaw_deg, pitch_deg, roll_deg) = t.orientation.degrees();
            let weights = t.weights.iter().map(|(id, wt)| format!("{id}:{wt}")).collect::<Vec<_>>().join(";");
            w.serialize(TickRow {
                media_ms: t.media_ms,
                wall_ms: t.wall_ms,
                seg_index: t.seg_index,
                yaw_deg,
                pitch_deg,
                roll_deg,
                quality_db: t.quality_db,
                weights,
            })
            .map_err(|e| csv_err(Path::new(TICKS_FILE), e))?;
        }
        w.into_inner().map_err(|e| Error::io(TICKS_FILE, e.into_error()))
    }

    /// Writes `segments.csv`, `ticks.csv` and `run.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, bytes: &[u8]| {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(path, e))
        };
        write(SEGMENTS_FILE, &self.segments_csv()?)?;
        write(TICKS_FILE, &self.ticks_csv()?)?;
        write(META_FILE, canonical_json(&self.meta).as_bytes())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let meta_path = dir.join(META_FILE);
        let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: RunMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: format!("{}: {e}", meta_path.display()),
        })?;

        let seg_path = dir.join(SEGMENTS_FILE);
        let mut rdr = csv::Reader::from_path(&seg_path).map_err(|e| csv_err(&seg_path, e))?;
        let mut segments: Vec<SegmentRecord> = Vec::new();
        for row in rdr.deserialize::<SegmentRow>() {
            let row = row.map_err(|e| csv_err(&seg_path, e))?;
            let selection = TileSelection {
                tile_id: row.tile_id,
                target_bps: row.target_bps,
                rep_id: row.rep_id,
                rep_bps: row.rep_bps,
            };
            match segments.last_mut() {
                Some(s) if s.seg_index == row.seg_index => s.tiles.push(selection),
                _ => segments.push(SegmentRecord {
                    seg_index: row.seg_index,
                    request_ms: row.request_ms,
                    r_cur_bps: row.r_cur_bps,
                    orientation: Orientation::from_degrees(row.yaw_deg, row.pitch_deg, row.roll_deg),
                    tiles: vec![selection],
                    bits: row.bits,
                    download_ms: row.download_ms,
                    stall_ms: row.stall_ms,
                    play_start_ms: row.play_start_ms,
                }),
            }
        }

        let tick_path = dir.join(TICKS_FILE);
        let mut rdr = csv::Reader::from_path(&tick_path).map_err(|e| csv_err(&tick_path, e))?;
        let mut ticks = Vec::new();
        for (row, line) in rdr.deserialize::<TickRow>().zip(2u64..) {
            let row = row.map_err(|e| csv_err(&tick_path, e))?;
            let weights = row
                .weights
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|pair| {
                    let (id, w) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::Schema { line, message: format!("malformed weight {pair:?}") })?;
                    Ok((super::parse_field(id, "tile id", line)?, super::parse_field(w, "weight", line)?))
                })
                .collect::<Result<Vec<(u32, f64)>>>()?;
            ticks.push(TickRecord {
                media_ms: row.media_ms,
                wall_ms: row.wall_ms,
                seg_index: row.seg_index,
                orientation: Orientation::from_degrees(row.yaw_deg, row.pitch_deg, row.roll_deg),
                quality_db: row.quality_db,
                weights,
            });
        }
        Ok(Self { meta, segments, ticks })
    }
}
