use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Piecewise-constant throughput. Each sample holds until the next one; the
/// last sample holds forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandwidthTrace {
    samples: Vec<(u64, u64)>,
}

impl BandwidthTrace {
    pub fn new(samples: Vec<(u64, u64)>) -> Result<Self> {
        let mut problems = Vec::new();
        match samples.first() {
            None => problems.push("trace is empty".to_string()),
            Some(&(t, _)) if t != 0 => problems.push(format!("trace starts at {t} ms, not 0")),
            _ => {}
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                problems.push(format!("sample {}: time {} ms not after {} ms", i + 2, w[1].0, w[0].0));
            }
        }
        for (i, &(_, bps)) in samples.iter().enumerate() {
            if bps == 0 {
                problems.push(format!("sample {}: throughput must be positive", i + 1));
            }
        }
        if problems.is_empty() {
            Ok(Self { samples })
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn constant(bps: u64) -> Result<Self> {
        Self::new(vec![(0, bps)])
    }

    /// Alternates between `high` and `low` every `half_period_ms`, starting
    /// high, until `until_ms`.
    pub fn square_wave(high: u64, low: u64, half_period_ms: u64, until_ms: u64) -> Result<Self> {
        if half_period_ms == 0 {
            return Err(Error::Domain("half period must be positive".into()));
        }
        let samples = (0..until_ms.div_ceil(half_period_ms).max(1))
            .map(|k| (k * half_period_ms, if k % 2 == 0 { high } else { low }))
            .collect();
        Self::new(samples)
    }

    /// Linear ramp from `from` to `to` over `duration_ms`, in `steps` steps.
    pub fn ramp(from: u64, to: u64, duration_ms: u64, steps: u64) -> Result<Self> {
        if steps == 0 || duration_ms < steps {
            return Err(Error::Domain("ramp needs at least one step of 1 ms".into()));
        }
        let samples = (0..=steps)
            .map(|k| {
                let bps = from as f64 + (to as f64 - from as f64) * k as f64 / steps as f64;
                (k * duration_ms / steps, bps.round() as u64)
            })
            .collect();
        Self::new(samples)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    /// Reads `time_ms,bps` CSV.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let rows = super::read_csv_rows(reader, &["time_ms", "bps"])?;
        let mut samples = Vec::with_capacity(rows.len());
        let mut prev: Option<u64> = None;
        for (line, fields) in rows {
            let time = super::parse_field::<u64>(&fields[0], "time_ms", line)?;
            let bps = super::parse_field::<u64>(&fields[1], "bps", line)?;
            match prev {
                None if time != 0 => {
                    return Err(Error::Schema { line, message: format!("trace must start at 0 ms, got {time}") })
                }
                Some(p) if time <= p => {
                    return Err(Error::Schema {
                        line,
                        message: format!("time {time} ms does not increase (previous {p} ms)"),
                    })
                }
                _ => {}
            }
            if bps == 0 {
                return Err(Error::Schema { line, message: "throughput must be positive".into() });
            }
            prev = Some(time);
            samples.push((time, bps));
        }
        Self::new(samples)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_ms,bps\n");
        for (t, b) in &self.samples {
            out.push_str(&format!("{t},{b}\n"));
        }
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }

    pub fn samples(&self) -> &[(u64, u64)] {
        &self.samples
    }

    fn index_at(&self, t_ms: f64) -> usize {
        self.samples.partition_point(|&(t, _)| t as f64 <= t_ms).saturating_sub(1)
    }

    /// Throughput in effect at `t_ms`.
    pub fn at(&self, t_ms: f64) -> u64 {
        self.samples[self.index_at(t_ms)].1
    }

    /// Milliseconds needed to move `bits` starting at `start_ms`.
    pub fn transfer_time(&self, start_ms: f64, bits: f64) -> f64 {
        let mut i = self.index_at(start_ms);
        let mut now = start_ms;
        let mut remaining = bits;
        loop {
            let rate = self.samples[i].1 as f64;
            let end = self.samples.get(i + 1).map_or(f64::INFINITY, |s| s.0 as f64);
            let capacity = rate * (end - now) / 1000.0;
            if capacity >= remaining {
                return now + remaining / rate * 1000.0 - start_ms;
            }
            remaining -= capacity;
            now = end;
            i += 1;
        }
    }
}
