use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::ViewportPose;
use crate::manifest::round_significant;

/// Head orientation in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Orientation {
    pub fn from_degrees(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw: yaw.to_radians(), pitch: pitch.to_radians(), roll: roll.to_radians() }
    }

    /// Angles in degrees, rounded to nine significant digits.
    pub fn degrees(&self) -> (f64, f64, f64) {
        let d = |a: f64| round_significant(a.to_degrees());
        (d(self.yaw), d(self.pitch), d(self.roll))
    }

    pub fn pose(&self, hfov: f64, vfov: f64) -> Result<ViewportPose> {
        ViewportPose::new(self.yaw, self.pitch, self.roll, hfov, vfov)
    }

    pub(crate) fn key(&self) -> (u64, u64, u64) {
        (self.yaw.to_bits(), self.pitch.to_bits(), self.roll.to_bits())
    }
}

/// Step-hold head trajectory over media time.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadTrajectory {
    samples: Vec<(u64, Orientation)>,
    end_ms: u64,
}

impl HeadTrajectory {
    /// Samples must start at 0 ms with strictly increasing times. The
    /// trajectory covers up to its last sample plus the last sampling
    /// interval; a single sample is a static pose covering any duration.
    pub fn new(samples: Vec<(u64, Orientation)>) -> Result<Self> {
        let mut problems = Vec::new();
        match samples.first() {
            None => problems.push("trajectory is empty".to_string()),
            Some(&(t, _)) if t != 0 => problems.push(format!("trajectory starts at {t} ms, not 0")),
            _ => {}
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                problems.push(format!("sample {}: time {} ms not after {} ms", i + 2, w[1].0, w[0].0));
            }
        }
        for (i, (_, o)) in samples.iter().enumerate() {
            if !(o.yaw.is_finite() && o.roll.is_finite())
                || !(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&o.pitch)
            {
                problems.push(format!("sample {}: orientation out of range", i + 1));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let end_ms = match samples.len() {
            1 => u64::MAX,
            n => {
                let (last, prev) = (samples[n - 1].0, samples[n - 2].0);
                last + (last - prev)
            }
        };
        Ok(Self { samples, end_ms })
    }

    pub fn fixed(orientation: Orientation) -> Self {
        Self { samples: vec![(0, orientation)], end_ms: u64::MAX }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    /// Reads `time_ms,yaw_deg,pitch_deg,roll_deg` CSV.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let rows = super::read_csv_rows(reader, &["time_ms", "yaw_deg", "pitch_deg", "roll_deg"])?;
        let mut samples = Vec::with_capacity(rows.len());
        let mut prev: Option<u64> = None;
        for (line, fields) in rows {
            let time = super::parse_field::<u64>(&fields[0], "time_ms", line)?;
            let yaw = super::parse_field::<f64>(&fields[1], "yaw_deg", line)?;
            let pitch = super::parse_field::<f64>(&fields[2], "pitch_deg", line)?;
            let roll = super::parse_field::<f64>(&fields[3], "roll_deg", line)?;
            match prev {
                None if time != 0 => {
                    return Err(Error::Schema { line, message: format!("trajectory must start at 0 ms, got {time}") })
                }
                Some(p) if time <= p => {
                    return Err(Error::Schema {
                        line,
                        message: format!("time {time} ms does not increase (previous {p} ms)"),
                    })
                }
                _ => {}
            }
            if !(-90.0..=90.0).contains(&pitch) || !yaw.is_finite() || !roll.is_finite() {
                return Err(Error::Schema { line, message: "orientation out of range".into() });
            }
            prev = Some(time);
            samples.push((time, Orientation::from_degrees(yaw, pitch, roll)));
        }
        Self::new(samples)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_ms,yaw_deg,pitch_deg,roll_deg\n");
        for (t, o) in &self.samples {
            let (yaw, pitch, roll) = o.degrees();
            out.push_str(&format!("{t},{yaw},{pitch},{roll}\n"));
        }
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }

    pub fn samples(&self) -> &[(u64, Orientation)] {
        &self.samples
    }

    /// Exclusive end of the covered time span.
    pub fn end_ms(&self) -> u64 {
        self.end_ms
    }

    pub fn covers(&self, duration_ms: u64) -> bool {
        self.end_ms >= duration_ms
    }

    /// Latest sample at or before `t_ms`.
    pub fn pose_at(&self, t_ms: u64) -> Result<Orientation> {
        if t_ms >= self.end_ms {
            return Err(Error::Domain(format!("time {t_ms} ms beyond the trajectory end at {} ms", self.end_ms)));
        }
        let i = self.samples.partition_point(|&(t, _)| t <= t_ms).saturating_sub(1);
        Ok(self.samples[i].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(n: u64, every_ms: u64) -> HeadTrajectory {
        HeadTrajectory::new((0..n).map(|k| (k * every_ms, Orientation::from_degrees(k as f64, 0.0, 0.0))).collect())
            .unwrap()
    }

    #[test]
    fn step_hold_lookup() {
        let tr = sampled(300, 100);
        assert_eq!(tr.samples().len(), 300);
        assert_eq!(tr.end_ms(), 30_000);
        assert_eq!(tr.pose_at(12_345).unwrap(), tr.samples()[123].1);
        assert_eq!(tr.pose_at(12_300).unwrap(), tr.samples()[123].1);
        assert_eq!(tr.pose_at(0).unwrap(), tr.samples()[0].1);
        assert!(matches!(tr.pose_at(30_000), Err(Error::Domain(_))));
        assert!(tr.covers(30_000));
        assert!(!tr.covers(30_001));
    }

    #[test]
    fn csv_parsing() {
        let tr =
            HeadTrajectory::from_reader("time_ms,yaw_deg,pitch_deg,roll_deg\n0,90,0,0\n100,45.5,-10,0\n".as_bytes())
                .unwrap();
        assert_eq!(tr.samples()[0].1.yaw, std::f64::consts::FRAC_PI_2);
        assert_eq!(tr.end_ms(), 200);
        let err = HeadTrajectory::from_reader("time_ms,yaw_deg,pitch_deg,roll_deg\n0,0,0,0\n0,0,0,0\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, Error::Schema { line: 3, .. }));
        let err = HeadTrajectory::from_reader("time_ms,yaw_deg,pitch_deg,roll_deg\n0,0,95,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema { line: 2, .. }));
    }

    #[test]
    fn fixed_covers_everything() {
        let tr = HeadTrajectory::fixed(Orientation::from_degrees(0.0, 0.0, 0.0));
        assert!(tr.covers(u64::MAX));
        assert!(tr.pose_at(1_000_000).is_ok());
    }
}
