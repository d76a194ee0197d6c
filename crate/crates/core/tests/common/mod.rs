//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use tiled_vr_abr::geometry::{ErpFrame, TileLayout, TileRect};
use tiled_vr_abr::manifest::{Ladder, Manifest, Representation};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// True when golden files should be rewritten instead of compared.
pub fn regenerate() -> bool {
    std::env::var_os("REGENERATE_FIXTURES").is_some()
}

/// Compares `actual` with the golden file, or writes it when regenerating.
pub fn golden(relative: &str, actual: &str) -> Result<(), String> {
    let path = fixtures_dir().join(relative);
    if regenerate() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{} differs from the freshly generated output", path.display()))
    }
}

type Mat3 = [[f64; 3]; 3];

fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Camera looking along +X with +Z up, posed by yaw about Z, pitch up,
/// then roll about the view axis. Angles in radians.
#[derive(Debug, Clone, Copy)]
pub struct OracleCamera {
    /// Columns are the camera axes in world coordinates.
    world_from_camera: Mat3,
    half_h: f64,
    half_v: f64,
}

impl OracleCamera {
    pub fn new(yaw: f64, pitch: f64, roll: f64, hfov: f64, vfov: f64) -> Self {
        let world_from_camera = mul(&mul(&rot_z(yaw), &rot_y(-pitch)), &rot_x(roll));
        Self { world_from_camera, half_h: hfov / 2.0, half_v: vfov / 2.0 }
    }

    pub fn degrees(yaw: f64, pitch: f64, roll: f64, hfov: f64, vfov: f64) -> Self {
        Self::new(yaw.to_radians(), pitch.to_radians(), roll.to_radians(), hfov.to_radians(), vfov.to_radians())
    }

    pub fn sees(&self, d: [f64; 3]) -> bool {
        let m = &self.world_from_camera;
        // transpose multiply: camera coordinates of the world direction
        let c: Vec<f64> = (0..3).map(|j| (0..3).map(|i| m[i][j] * d[i]).sum()).collect();
        c[0] > 0.0 && c[1].atan2(c[0]).abs() <= self.half_h && c[2].atan2(c[0]).abs() <= self.half_v
    }
}

/// Pixel-center direction from colatitude and azimuth.
pub fn pixel_direction(u: u32, v: u32, width: u32, height: u32) -> [f64; 3] {
    let colatitude = PI * (f64::from(v) + 0.5) / f64::from(height);
    let azimuth = 2.0 * PI * (f64::from(u) + 0.5) / f64::from(width) - PI;
    [colatitude.sin() * azimuth.cos(), colatitude.sin() * azimuth.sin(), colatitude.cos()]
}

/// Exact number of viewport pixels in `rect`, checking every pixel.
pub fn oracle_count(rect: &TileRect, frame: &ErpFrame, cam: &OracleCamera) -> u64 {
    let (w, h) = (frame.width(), frame.height());
    (rect.y..rect.y + rect.h)
        .into_par_iter()
        .map(|v| (rect.x..rect.x + rect.w).filter(|&u| cam.sees(pixel_direction(u, v, w, h))).count() as u64)
        .sum()
}

pub fn oracle_counts(layout: &TileLayout, cam: &OracleCamera) -> Vec<u64> {
    let frame = layout.frame();
    layout.tiles().iter().map(|t| oracle_count(&t.rect, &frame, cam)).collect()
}

/// Brute-force nearest rung, lower bitrate on ties.
pub fn brute_force_select(target: f64, ladder: &[Representation]) -> Representation {
    let mut best = ladder[0];
    for &r in ladder {
        let (d, db) = ((r.bitrate as f64 - target).abs(), (best.bitrate as f64 - target).abs());
        if d < db || (d == db && r.bitrate < best.bitrate) {
            best = r;
        }
    }
    best
}

/// Random valid manifest: whole-frame or pole/equator layouts with random
/// frame sizes, ladders and timing.
pub fn random_manifest(rng: &mut impl Rng) -> Manifest {
    let n_tiles = if rng.gen_bool(0.15) { 1 } else { rng.gen_range(3..=14u32) };
    let columns = n_tiles.saturating_sub(2).max(1);
    // 2:1 frames with height divisible by 4 and width by the column count
    let height = 4 * columns * rng.gen_range(1..=16u32);
    let width = 2 * height;
    let frame = ErpFrame::new(width, height).unwrap();
    let layout = if n_tiles == 1 {
        TileLayout::whole_frame(frame)
    } else if rng.gen_bool(0.3) && height >= 2 {
        let pole_rows = rng.gen_range(1..height.div_ceil(2));
        TileLayout::build_with_pole_rows(frame, n_tiles, pole_rows).unwrap()
    } else {
        TileLayout::build(frame, n_tiles).unwrap()
    };
    let mut bitrates: Vec<u64> = (0..rng.gen_range(1..=16)).map(|_| rng.gen_range(1..=50_000_000u64)).collect();
    bitrates.sort_unstable();
    bitrates.dedup();
    let ladder = Ladder::from_bitrates(&bitrates).unwrap();
    let template =
        ["tile{tile}/rep{rep}/seg{seg}.m4s", "{seg}-{rep}-{tile}.mp4", "https://cdn.example/v/{tile}_{rep}_{seg}"]
            [rng.gen_range(0..3)];
    Manifest::new(layout, ladder, rng.gen_range(1..=10_000), rng.gen_range(1..=600_000), template).unwrap()
}
