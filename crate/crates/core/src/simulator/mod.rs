//! Deterministic segment-by-segment streaming simulation.
//!
//! The client downloads one segment at a time over a piecewise-constant
//! bandwidth trace. It asks for the next segment as soon as fewer than
//! `buffer_target_segments` downloaded segments remain unplayed, estimates
//! bandwidth as the harmonic mean of recent segment throughputs, and chooses
//! representations with either the viewport-aware policy or the single-tile
//! reference. Head poses are indexed by media time; every display tick scores
//! the segment on screen against the pose at that instant.

mod log;
mod trace;
mod trajectory;

use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

pub use log::{RunMeta, SegmentRecord, SimulationLog, TickRecord, TileSelection, META_FILE, SEGMENTS_FILE, TICKS_FILE};
pub use trace::BandwidthTrace;
pub use trajectory::{HeadTrajectory, Orientation};

use crate::allocation::{allocate_and_select, classify_tiles, select_reference, TileClassification, DEFAULT_GAMMA};
use crate::error::{Error, Result};
use crate::geometry::DEFAULT_FOV_DEG;
use crate::manifest::{round_significant, Manifest};
use crate::quality::{viewport_quality_with, RateQualityModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Proposed { gamma: f64, stride: u32 },
    Reference,
}

impl Policy {
    pub fn proposed() -> Self {
        Policy::Proposed { gamma: DEFAULT_GAMMA, stride: DEFAULT_STRIDE }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Proposed { .. } => "proposed",
            Policy::Reference => "reference",
        }
    }
}

pub const DEFAULT_STRIDE: u32 = 8;
pub const DEFAULT_TICK_MS: u64 = 100;
pub const DEFAULT_BUFFER_SEGMENTS: u32 = 2;
pub const DEFAULT_ESTIMATOR_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub policy: Policy,
    /// Field of view in radians.
    pub hfov: f64,
    pub vfov: f64,
    pub buffer_target_segments: u32,
    pub tick_ms: u64,
    pub estimator_window: usize,
    /// Sampling stride for the viewport weights used in quality scoring.
    pub quality_stride: u32,
}

impl SimConfig {
    pub fn new(policy: Policy) -> Self {
        Self {
            policy,
            hfov: DEFAULT_FOV_DEG.to_radians(),
            vfov: DEFAULT_FOV_DEG.to_radians(),
            buffer_target_segments: DEFAULT_BUFFER_SEGMENTS,
            tick_ms: DEFAULT_TICK_MS,
            estimator_window: DEFAULT_ESTIMATOR_WINDOW,
            quality_stride: DEFAULT_STRIDE,
        }
    }

    fn validate(&self, manifest: &Manifest, model: &RateQualityModel) -> Result<()> {
        let mut problems = Vec::new();
        match self.policy {
            Policy::Proposed { gamma, stride } => {
                if !(0.0..=1.0).contains(&gamma) {
                    problems.push(format!("gamma {gamma} outside [0, 1]"));
                }
                if stride == 0 {
                    problems.push("stride must be at least 1".to_string());
                }
            }
            Policy::Reference => {
                if manifest.layout().len() != 1 {
                    problems.push(format!(
                        "the reference policy streams one whole-frame tile, manifest has {}",
                        manifest.layout().len()
                    ));
                }
            }
        }
        if self.buffer_target_segments == 0 {
            problems.push("buffer target must be at least one segment".to_string());
        }
        if self.tick_ms == 0 {
            problems.push("display tick must be positive".to_string());
        }
        if self.estimator_window == 0 {
            problems.push("estimator window must be at least 1".to_string());
        }
        if self.quality_stride == 0 {
            problems.push("quality stride must be at least 1".to_string());
        }
        if model.tile_count() != manifest.layout().len() {
            problems.push(format!(
                "quality model has {} tiles, manifest has {}",
                model.tile_count(),
                manifest.layout().len()
            ));
        }
        if let Err(e) = Orientation::from_degrees(0.0, 0.0, 0.0).pose(self.hfov, self.vfov) {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// Harmonic mean of the most recent `window` throughputs.
pub fn harmonic_mean_estimate(history: &[f64], window: usize) -> Option<f64> {
    let recent = &history[history.len().saturating_sub(window)..];
    if recent.is_empty() {
        return None;
    }
    let inv: f64 = recent.iter().map(|x| 1.0 / x).sum();
    Some(recent.len() as f64 / inv)
}

/// Orientation bit patterns and sampling stride.
type CacheKey = ((u64, u64, u64), u32);

struct ClassCache<'a> {
    manifest: &'a Manifest,
    hfov: f64,
    vfov: f64,
    entries: HashMap<CacheKey, Arc<TileClassification>>,
}

impl<'a> ClassCache<'a> {
    fn get(&mut self, o: &Orientation, stride: u32) -> Result<Arc<TileClassification>> {
        let key = (o.key(), stride);
        if let Some(c) = self.entries.get(&key) {
            return Ok(Arc::clone(c));
        }
        let pose = o.pose(self.hfov, self.vfov)?;
        let c = Arc::new(classify_tiles(self.manifest.layout(), &pose, stride)?);
        self.entries.insert(key, Arc::clone(&c));
        Ok(c)
    }
}

/// Media position shown at wall time `t`, given the playback start of the
/// segments scheduled so far.
fn media_position(t: f64, play_start: &[f64], seg_start: &[u64], seg_len: &[u64]) -> f64 {
    let j = play_start.partition_point(|&s| s <= t);
    if j == 0 {
        return 0.0;
    }
    let j = j - 1;
    seg_start[j] as f64 + (t - play_start[j]).min(seg_len[j] as f64)
}

pub fn run_simulation(
    manifest: &Manifest,
    config: &SimConfig,
    trace: &BandwidthTrace,
    trajectory: &HeadTrajectory,
    model: &RateQualityModel,
) -> Result<SimulationLog> {
    config.validate(manifest, model)?;
    let media_ms = manifest.media_duration_ms();
    if !trajectory.covers(media_ms) {
        return Err(Error::Validation(vec![format!(
            "trajectory ends at {} ms, media lasts {media_ms} ms",
            trajectory.end_ms()
        )]));
    }

    let layout = manifest.layout();
    let ladder = manifest.ladder();
    let seg_ms = manifest.segment_duration_ms();
    let n_segments = manifest.segment_count() as usize;
    let seg_start: Vec<u64> = (0..n_segments as u64).map(|k| k * seg_ms).collect();
    let seg_len: Vec<u64> = seg_start.iter().map(|&s| seg_ms.min(media_ms - s)).collect();

    let mut cache = ClassCache { manifest, hfov: config.hfov, vfov: config.vfov, entries: HashMap::new() };

    let mut segments: Vec<SegmentRecord> = Vec::with_capacity(n_segments);
    let mut play_start: Vec<f64> = Vec::with_capacity(n_segments);
    let mut play_end: Vec<f64> = Vec::with_capacity(n_segments);
    let mut throughput: Vec<f64> = Vec::with_capacity(n_segments);
    let mut now = 0.0f64;

    for k in 0..n_segments {
        let request_ms = now;
        let position = media_position(request_ms, &play_start, &seg_start, &seg_len);
        let orientation = trajectory.pose_at(position.floor() as u64)?;
        let r_cur =
            harmonic_mean_estimate(&throughput, config.estimator_window).unwrap_or_else(|| trace.at(request_ms) as f64);

        let tiles: Vec<TileSelection> = match config.policy {
            Policy::Proposed { gamma, stride } => {
                let pose = orientation.pose(config.hfov, config.vfov)?;
                allocate_and_select(layout, &pose, ladder, r_cur, gamma, stride)?
                    .tiles
                    .into_iter()
                    .map(|t| TileSelection {
                        tile_id: t.tile_id,
                        target_bps: t.target_bps,
                        rep_id: t.rep.id,
                        rep_bps: t.rep.bitrate,
                    })
                    .collect()
            }
            Policy::Reference => {
                let rep = select_reference(ladder, r_cur);
                vec![TileSelection { tile_id: 1, target_bps: r_cur, rep_id: rep.id, rep_bps: rep.bitrate }]
            }
        };

        let total_bps: u64 = tiles.iter().map(|t| t.rep_bps).sum();
        let bits = total_bps as f64 * seg_len[k] as f64 / 1000.0;
        let download_ms = trace.transfer_time(request_ms, bits);
        let finish = request_ms + download_ms;
        let (start, stall_ms) = match play_end.last() {
            None => (finish, 0.0),
            Some(&prev_end) => (prev_end.max(finish), (finish - prev_end).max(0.0)),
        };
        play_start.push(start);
        play_end.push(start + seg_len[k] as f64);
        throughput.push(bits / (download_ms / 1000.0));

        segments.push(SegmentRecord {
            seg_index: k as u64,
            request_ms,
            r_cur_bps: r_cur,
            orientation,
            tiles,
            bits,
            download_ms,
            stall_ms,
            play_start_ms: start,
        });

        // wait until fewer than the target number of segments sit unplayed
        now = finish;
        loop {
            let unplayed = play_end.iter().rev().take_while(|&&e| e > now).count();
            if unplayed < config.buffer_target_segments as usize {
                break;
            }
            now = play_end[play_end.len() - unplayed];
        }
    }

    let mut ticks = Vec::with_capacity((media_ms / config.tick_ms) as usize + 1);
    let mut media = 0u64;
    while media < media_ms {
        let k = (media / seg_ms) as usize;
        let orientation = trajectory.pose_at(media)?;
        let class = cache.get(&orientation, config.quality_stride)?;
        let rates: Vec<f64> = segments[k].tiles.iter().map(|t| t.rep_bps as f64).collect();
        let vq = viewport_quality_with(model, layout, &class, &rates)?;
        ticks.push(TickRecord {
            media_ms: media,
            wall_ms: play_start[k] + (media - seg_start[k]) as f64,
            seg_index: k as u64,
            orientation,
            quality_db: vq.psnr_db,
            weights: vq.weights,
        });
        media += config.tick_ms;
    }

    let frame = layout.frame();
    let (gamma, stride) = match config.policy {
        Policy::Proposed { gamma, stride } => (Some(gamma), Some(stride)),
        Policy::Reference => (None, None),
    };
    Ok(SimulationLog {
        meta: RunMeta {
            policy: config.policy.name().to_string(),
            gamma,
            stride,
            frame_width: frame.width(),
            frame_height: frame.height(),
            n_tiles: layout.len() as u32,
            segment_duration_ms: seg_ms,
            media_duration_ms: media_ms,
            tick_ms: config.tick_ms,
            buffer_target_segments: config.buffer_target_segments,
            estimator_window: config.estimator_window as u32,
            quality_stride: config.quality_stride,
            hfov_deg: round_significant(config.hfov.to_degrees()),
            vfov_deg: round_significant(config.vfov.to_degrees()),
            trace_sha256: trace.digest(),
            trajectory_sha256: trajectory.digest(),
        },
        segments,
        ticks,
    })
}

/// Header-checked CSV rows, each with its 1-based line number.
pub(crate) fn read_csv_rows<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let found = rdr.headers().map_err(|e| Error::Schema { line: 1, message: e.to_string() })?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Schema {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record =
            record.map_err(|e| Error::Schema { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Schema {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

pub(crate) fn parse_field<T: std::str::FromStr>(raw: &str, name: &str, line: u64) -> Result<T> {
    raw.parse().map_err(|_| Error::Schema { line, message: format!("{name} {raw:?} is not a valid number") })
}
