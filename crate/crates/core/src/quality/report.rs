//! Comparison reports between the viewport-aware and the reference streamer.
//!
//! `quality_timeseries.csv` holds, per display tick, the mean and min–max band
//! of viewport quality across runs for both policies. `bitrate_map.csv` lists
//! every selected tile representation per segment. `summary.csv` and
//! `summary.json` carry the overall means and their difference.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifest::canonical_json;
use crate::simulator::SimulationLog;

pub const TIMESERIES_FILE: &str = "quality_timeseries.csv";
pub const BITRATE_MAP_FILE: &str = "bitrate_map.csv";
pub const SUMMARY_CSV_FILE: &str = "summary.csv";
pub const SUMMARY_JSON_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeseriesRow {
    pub media_ms: u64,
    pub proposed_mean_db: f64,
    pub proposed_min_db: f64,
    pub proposed_max_db: f64,
    pub reference_mean_db: f64,
    pub reference_min_db: f64,
    pub reference_max_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub runs: usize,
    pub ticks: usize,
    pub proposed_mean_db: f64,
    pub reference_mean_db: f64,
    pub mean_delta_db: f64,
    pub proposed_stall_ms: f64,
    pub reference_stall_ms: f64,
}

#[derive(Serialize)]
struct BitrateRow<'a> {
    policy: &'a str,
    run: usize,
    seg_index: u64,
    tile_id: u32,
    target_bps: f64,
    rep_id: u32,
    rep_bps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub timeseries: Vec<TimeseriesRow>,
    pub summary: Summary,
}

fn check_pairing(proposed: &[SimulationLog], reference: &[SimulationLog]) -> Result<()> {
    let mut problems = Vec::new();
    if proposed.is_empty() || reference.is_empty() {
        problems.push("both policies need at least one run".to_string());
    }
    if proposed.len() != reference.len() {
        problems.push(format!("{} proposed runs but {} reference runs", proposed.len(), reference.len()));
    }
    let first = proposed.first().or(reference.first());
    for (i, (p, r)) in proposed.iter().zip(reference).enumerate() {
        let (a, b) = (&p.meta, &r.meta);
        if a.trajectory_sha256 != b.trajectory_sha256 {
            problems.push(format!("run {i}: trajectories differ"));
        }
        if p.ticks.iter().map(|t| t.media_ms).ne(r.ticks.iter().map(|t| t.media_ms)) {
            problems.push(format!("run {i}: display ticks differ"));
        }
    }
    if let Some(first) = first {
        for (i, log) in proposed.iter().chain(reference).enumerate() {
            let (a, b) = (&first.meta, &log.meta);
            if a.trace_sha256 != b.trace_sha256 {
                problems.push(format!("log {i}: bandwidth trace differs"));
            }
            if (a.media_duration_ms, a.segment_duration_ms, a.tick_ms)
                != (b.media_duration_ms, b.segment_duration_ms, b.tick_ms)
            {
                problems.push(format!("log {i}: media, segment or tick duration differs"));
            }
            if log.ticks.len() != first.ticks.len() {
                problems.push(format!("log {i}: tick count differs"));
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(problems))
    }
}

fn band(logs: &[SimulationLog], tick: usize) -> (f64, f64, f64) {
    let values = logs.iter().map(|l| l.ticks[tick].quality_db);
    let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        sum += v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (sum / logs.len() as f64, lo, hi)
}

/// Builds the report for runs paired by index (same trajectory).
pub fn build_report(proposed: &[SimulationLog], reference: &[SimulationLog]) -> Result<Report> {
    check_pairing(proposed, reference)?;
    let ticks = proposed[0].ticks.len();
    let timeseries: Vec<TimeseriesRow> = (0..ticks)
        .map(|i| {
            let (pm, plo, phi) = band(proposed, i);
            let (rm, rlo, rhi) = band(reference, i);
            TimeseriesRow {
                media_ms: proposed[0].ticks[i].media_ms,
                proposed_mean_db: pm,
                proposed_min_db: plo,
                proposed_max_db: phi,
                reference_mean_db: rm,
                reference_min_db: rlo,
                reference_max_db: rhi,
            }
        })
        .collect();
    let mean = |f: fn(&TimeseriesRow) -> f64| {
        if timeseries.is_empty() {
            0.0
        } else {
            timeseries.iter().map(f).sum::<f64>() / timeseries.len() as f64
        }
    };
    let proposed_mean_db = mean(|r| r.proposed_mean_db);
    let reference_mean_db = mean(|r| r.reference_mean_db);
    let stalls = |logs: &[SimulationLog]| {
        logs.iter().flat_map(|l| l.segments.iter().map(|s| s.stall_ms)).sum::<f64>() / logs.len() as f64
    };
    Ok(Report {
        summary: Summary {
            runs: proposed.len(),
            ticks,
            proposed_mean_db,
            reference_mean_db,
            mean_delta_db: proposed_mean_db - reference_mean_db,
            proposed_stall_ms: stalls(proposed),
            reference_stall_ms: stalls(reference),
        },
        timeseries,
    })
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Computation(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Computation(e.to_string()))
}

/// Writes all report files into `out_dir` and returns the summary.
pub fn report(proposed: &[SimulationLog], reference: &[SimulationLog], out_dir: &Path) -> Result<Report> {
    let report = build_report(proposed, reference)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(path, e))
    };

    write(TIMESERIES_FILE, &to_csv(&report.timeseries)?)?;

    let map_rows = [("proposed", proposed), ("reference", reference)].into_iter().flat_map(|(policy, logs)| {
        logs.iter().enumerate().flat_map(move |(run, log)| {
            log.segments.iter().flat_map(move |s| {
                s.tiles.iter().map(move |t| BitrateRow {
                    policy,
                    run,
                    seg_index: s.seg_index,
                    tile_id: t.tile_id,
                    target_bps: t.target_bps,
                    rep_id: t.rep_id,
                    rep_bps: t.rep_bps,
                })
            })
        })
    });
    write(BITRATE_MAP_FILE, &to_csv(map_rows)?)?;
    write(SUMMARY_CSV_FILE, &to_csv([&report.summary])?)?;
    write(SUMMARY_JSON_FILE, canonical_json(&report.summary).as_bytes())?;
    Ok(report)
}
