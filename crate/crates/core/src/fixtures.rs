//! Synthetic traces and head trajectories shipped with the crate.
//!
//! The CSV copies under `fixtures/` are generated from these functions and a
//! test keeps them in sync.

use crate::error::Result;
use crate::simulator::{BandwidthTrace, HeadTrajectory, Orientation};

pub const FIXTURE_MEDIA_MS: u64 = 30_000;
pub const FIXTURE_SAMPLE_MS: u64 = 100;
/// Media time at which the abrupt trajectory turns by 90°.
pub const JUMP_AT_MS: u64 = 10_000;
pub const PAN_DEG_PER_S: f64 = 6.0;

pub fn constant_trace(bps: u64) -> BandwidthTrace {
    BandwidthTrace::constant(bps).expect("positive throughput")
}

/// 22 Mbps and 4 Mbps alternating every 5 s.
pub fn square_wave_trace() -> BandwidthTrace {
    BandwidthTrace::square_wave(22_000_000, 4_000_000, 5_000, FIXTURE_MEDIA_MS * 2).expect("valid square wave")
}

fn sampled(f: impl Fn(u64) -> Orientation) -> HeadTrajectory {
    HeadTrajectory::new(
        (0..FIXTURE_MEDIA_MS / FIXTURE_SAMPLE_MS)
            .map(|k| {
                let t = k * FIXTURE_SAMPLE_MS;
                (t, f(t))
            })
            .collect(),
    )
    .expect("increasing sample times")
}

/// Looking straight ahead at the equator.
pub fn static_trajectory() -> HeadTrajectory {
    sampled(|_| Orientation::from_degrees(0.0, 0.0, 0.0))
}

/// Yaw drifting right at a constant rate along the equator.
pub fn slow_pan_trajectory() -> HeadTrajectory {
    sampled(|t| {
        let yaw = PAN_DEG_PER_S * t as f64 / 1000.0;
        let yaw = if yaw >= 180.0 { yaw - 360.0 } else { yaw };
        Orientation::from_degrees(yaw, 0.0, 0.0)
    })
}

/// Straight ahead, then a sudden 90° turn at [`JUMP_AT_MS`].
pub fn abrupt_jump_trajectory() -> HeadTrajectory {
    sampled(|t| Orientation::from_degrees(if t < JUMP_AT_MS { 0.0 } else { 90.0 }, 0.0, 0.0))
}

/// Every bundled trajectory with its file stem.
pub fn trajectories() -> Vec<(&'static str, HeadTrajectory)> {
    vec![
        ("static", static_trajectory()),
        ("slow_pan", slow_pan_trajectory()),
        ("abrupt_jump", abrupt_jump_trajectory()),
    ]
}

/// Every bundled trace with its file stem.
pub fn traces() -> Vec<(&'static str, BandwidthTrace)> {
    vec![("constant_10mbps", constant_trace(10_000_000)), ("square_4_22mbps", square_wave_trace())]
}

/// Writes the bundled CSV files into `dir`.
pub fn write_all(dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    let files = traces()
        .into_iter()
        .map(|(stem, t)| (format!("trace_{stem}.csv"), t.to_csv()))
        .chain(trajectories().into_iter().map(|(stem, t)| (format!("trajectory_{stem}.csv"), t.to_csv())));
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| crate::Error::io(path, e))?;
    }
    Ok(())
}
