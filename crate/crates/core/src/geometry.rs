//! Equirectangular (ERP) frame geometry.
//!
//! Coordinates are right-handed with +Z up. Longitude 0 lies along +X and
//! grows towards +Y; latitude is +π/2 at the top row of the frame. A pixel is
//! identified with the direction through its center.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of an ERP frame. Width is always twice the height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErpFrame {
    width: u32,
    height: u32,
}

impl ErpFrame {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        let mut problems = Vec::new();
        if width == 0 || height == 0 {
            problems.push(format!("frame {width}x{height} has a zero dimension"));
        }
        if !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            problems.push(format!("frame {width}x{height} has an odd dimension"));
        }
        if u64::from(width) != 2 * u64::from(height) {
            problems.push(format!("frame {width}x{height} is not 2:1"));
        }
        if problems.is_empty() {
            Ok(Self { width, height })
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }

    pub fn rect(&self) -> TileRect {
        TileRect { x: 0, y: 0, w: self.width, h: self.height }
    }
}

/// Axis-aligned pixel rectangle inside an ERP frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl TileRect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn fits(&self, frame: &ErpFrame) -> bool {
        self.w > 0
            && self.h > 0
            && u64::from(self.x) + u64::from(self.w) <= u64::from(frame.width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(frame.height)
    }

    pub fn overlaps(&self, other: &TileRect) -> bool {
        let (ax1, ay1) = (u64::from(self.x) + u64::from(self.w), u64::from(self.y) + u64::from(self.h));
        let (bx1, by1) = (u64::from(other.x) + u64::from(other.w), u64::from(other.y) + u64::from(other.h));
        u64::from(self.x) < bx1 && u64::from(other.x) < ax1 && u64::from(self.y) < by1 && u64::from(other.y) < ay1
    }

    /// Midpoint in pixel-index coordinates; fractional for even extents.
    pub fn midpoint(&self) -> (f64, f64) {
        (f64::from(self.x) + (f64::from(self.w) - 1.0) / 2.0, f64::from(self.y) + (f64::from(self.h) - 1.0) / 2.0)
    }
}

/// Direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

impl UnitVec3 {
    /// Checked constructor; the components must already have unit norm.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::Domain(format!("({x}, {y}, {z}) is not on the unit sphere (norm {norm})")));
        }
        Ok(Self { x, y, z })
    }

    pub fn from_lon_lat(longitude: f64, latitude: f64) -> Self {
        let (sin_lon, cos_lon) = longitude.sin_cos();
        let (sin_lat, cos_lat) = latitude.sin_cos();
        Self { x: cos_lat * cos_lon, y: cos_lat * sin_lon, z: sin_lat }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn longitude(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn latitude(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).asin()
    }
}

/// Euclidean (chord) distance between two directions, in `[0, 2]`.
pub fn chord_distance(a: &UnitVec3, b: &UnitVec3) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn column_longitude(u: f64, width: u32) -> f64 {
    2.0 * PI * (u + 0.5) / f64::from(width) - PI
}

fn row_latitude(v: f64, height: u32) -> f64 {
    FRAC_PI_2 - PI * (v + 0.5) / f64::from(height)
}

/// Direction through the center of pixel `(u, v)`.
pub fn erp_to_sphere(u: u32, v: u32, frame: &ErpFrame) -> Result<UnitVec3> {
    if u >= frame.width || v >= frame.height {
        return Err(Error::Domain(format!("pixel ({u}, {v}) outside {}x{} frame", frame.width, frame.height)));
    }
    Ok(UnitVec3::from_lon_lat(column_longitude(f64::from(u), frame.width), row_latitude(f64::from(v), frame.height)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub id: u32,
    pub rect: TileRect,
    pub center: UnitVec3,
}

/// Partition of an ERP frame into tiles with ids `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TileLayout {
    frame: ErpFrame,
    tiles: Vec<Tile>,
}

/// Tolerance for a stored tile center against the one derived from its rect.
pub const CENTER_TOLERANCE: f64 = 1e-6;

impl TileLayout {
    /// Pole/equator layout with poles a quarter of the frame height each.
    pub fn build(frame: ErpFrame, n_tiles: u32) -> Result<Self> {
        if !frame.height.is_multiple_of(4) {
            return Err(Error::Config(format!("frame height {} is not divisible by 4", frame.height)));
        }
        Self::build_with_pole_rows(frame, n_tiles, frame.height / 4)
    }

    /// Pole/equator layout with `pole_rows` rows in each pole band.
    ///
    /// Tile 1 is the top pole, tiles `2..N` the equator columns from left to
    /// right, tile `N` the bottom pole.
    pub fn build_with_pole_rows(frame: ErpFrame, n_tiles: u32, pole_rows: u32) -> Result<Self> {
        if n_tiles < 3 {
            return Err(Error::Config(format!(
                "tile count {n_tiles} is below the minimum of 3 (two poles and one equator tile)"
            )));
        }
        if pole_rows == 0 || 2 * u64::from(pole_rows) >= u64::from(frame.height) {
            return Err(Error::Config(format!(
                "pole band of {pole_rows} rows does not fit a frame height of {}",
                frame.height
            )));
        }
        let columns = n_tiles - 2;
        if !frame.width.is_multiple_of(columns) {
            return Err(Error::Config(format!(
                "frame width {} is not divisible by the {columns} equator tiles",
                frame.width
            )));
        }
        let column_width = frame.width / columns;
        let equator_rows = frame.height - 2 * pole_rows;

        let mut rects = Vec::with_capacity(n_tiles as usize);
        rects.push(TileRect::new(0, 0, frame.width, pole_rows));
        for c in 0..columns {
            rects.push(TileRect::new(c * column_width, pole_rows, column_width, equator_rows));
        }
        rects.push(TileRect::new(0, pole_rows + equator_rows, frame.width, pole_rows));
        Self::from_rects(frame, rects)
    }

    /// Single tile covering the whole frame.
    pub fn whole_frame(frame: ErpFrame) -> Self {
        let rect = frame.rect();
        let tiles = vec![Tile { id: 1, rect, center: rect_center(&rect, &frame) }];
        Self { frame, tiles }
    }

    /// Layout from rects listed in id order, validating the partition.
    pub fn from_rects(frame: ErpFrame, rects: Vec<TileRect>) -> Result<Self> {
        validate_partition(&frame, &rects)?;
        let tiles = rects
            .into_iter()
            .zip(1u32..)
            .map(|(rect, id)| Tile { id, rect, center: rect_center(&rect, &frame) })
            .collect();
        Ok(Self { frame, tiles })
    }

    pub fn frame(&self) -> ErpFrame {
        self.frame
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tile(&self, id: u32) -> Option<&Tile> {
        id.checked_sub(1).and_then(|i| self.tiles.get(i as usize))
    }
}

fn rect_center(rect: &TileRect, frame: &ErpFrame) -> UnitVec3 {
    let (u, v) = rect.midpoint();
    UnitVec3::from_lon_lat(column_longitude(u, frame.width), row_latitude(v, frame.height))
}

/// Center F_i for a rect, as stored in manifests.
pub fn tile_center(rect: &TileRect, frame: &ErpFrame) -> Result<UnitVec3> {
    if !rect.fits(frame) {
        return Err(Error::Domain(format!("{rect:?} does not fit the frame")));
    }
    Ok(rect_center(rect, frame))
}

fn validate_partition(frame: &ErpFrame, rects: &[TileRect]) -> Result<()> {
    if rects.is_empty() {
        return Err(Error::Semantic("layout has no tiles".into()));
    }
    for (i, r) in rects.iter().enumerate() {
        if !r.fits(frame) {
            return Err(Error::Semantic(format!(
                "tile {} at {}x{}+{}+{} lies outside the {}x{} frame",
                i + 1,
                r.w,
                r.h,
                r.x,
                r.y,
                frame.width,
                frame.height
            )));
        }
    }
    for (i, a) in rects.iter().enumerate() {
        for (j, b) in rects.iter().enumerate().skip(i + 1) {
            if a.overlaps(b) {
                return Err(Error::Semantic(format!("tiles overlap: {} and {}", i + 1, j + 1)));
            }
        }
    }
    let area: u64 = rects.iter().map(TileRect::area).sum();
    if area != frame.pixel_count() {
        return Err(Error::Semantic(format!("tiles cover {area} of {} frame pixels", frame.pixel_count())));
    }
    Ok(())
}

/// Head orientation plus angular field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewportPose {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub hfov: f64,
    pub vfov: f64,
}

pub const DEFAULT_FOV_DEG: f64 = 96.0;

impl ViewportPose {
    pub fn new(yaw: f64, pitch: f64, roll: f64, hfov: f64, vfov: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(hfov > 0.0 && hfov < PI) {
            problems.push(format!("hfov {hfov} rad outside (0, π)"));
        }
        if !(vfov > 0.0 && vfov < PI) {
            problems.push(format!("vfov {vfov} rad outside (0, π)"));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&pitch) {
            problems.push(format!("pitch {pitch} rad outside [-π/2, π/2]"));
        }
        if !(yaw.is_finite() && roll.is_finite()) {
            problems.push("yaw and roll must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(Self { yaw, pitch, roll, hfov, vfov })
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Orientation in degrees with the default 96° square field of view.
    pub fn from_degrees(yaw: f64, pitch: f64, roll: f64) -> Result<Self> {
        let fov = DEFAULT_FOV_DEG.to_radians();
        Self::new(yaw.to_radians(), pitch.to_radians(), roll.to_radians(), fov, fov)
    }

    pub fn with_fov_degrees(self, hfov: f64, vfov: f64) -> Result<Self> {
        Self::new(self.yaw, self.pitch, self.roll, hfov.to_radians(), vfov.to_radians())
    }

    /// View axis: the direction at the middle of the viewport.
    pub fn axis(&self) -> UnitVec3 {
        UnitVec3::from_lon_lat(self.yaw, self.pitch)
    }
}

/// A pose with its inverse rotation precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Frustum {
    cos_yaw: f64,
    sin_yaw: f64,
    cos_pitch: f64,
    sin_pitch: f64,
    cos_roll: f64,
    sin_roll: f64,
    half_h: f64,
    half_v: f64,
}

impl Frustum {
    pub fn new(pose: &ViewportPose) -> Self {
        let (sin_yaw, cos_yaw) = pose.yaw.sin_cos();
        let (sin_pitch, cos_pitch) = pose.pitch.sin_cos();
        let (sin_roll, cos_roll) = pose.roll.sin_cos();
        Self {
            cos_yaw,
            sin_yaw,
            cos_pitch,
            sin_pitch,
            cos_roll,
            sin_roll,
            half_h: pose.hfov / 2.0,
            half_v: pose.vfov / 2.0,
        }
    }

    /// Rotates a world direction into the camera frame, where the camera
    /// looks along +X with +Z up.
    pub fn to_camera(&self, x: f64, y: f64, z: f64) -> (f64, f64, f64) {
        // undo yaw about Z
        let x1 = self.cos_yaw * x + self.sin_yaw * y;
        let y1 = -self.sin_yaw * x + self.cos_yaw * y;
        // undo pitch about Y
        let x2 = self.cos_pitch * x1 + self.sin_pitch * z;
        let z2 = -self.sin_pitch * x1 + self.cos_pitch * z;
        // undo roll about X
        let y3 = self.cos_roll * y1 + self.sin_roll * z2;
        let z3 = -self.sin_roll * y1 + self.cos_roll * z2;
        (x2, y3, z3)
    }

    #[inline]
    pub fn contains_xyz(&self, x: f64, y: f64, z: f64) -> bool {
        let (xc, yc, zc) = self.to_camera(x, y, z);
        xc > 0.0 && yc.atan2(xc).abs() <= self.half_h && zc.atan2(xc).abs() <= self.half_v
    }

    pub fn contains(&self, dir: &UnitVec3) -> bool {
        self.contains_xyz(dir.x, dir.y, dir.z)
    }
}

/// Whether `dir` falls inside the rectilinear viewport of `pose`.
pub fn viewport_contains(dir: &UnitVec3, pose: &ViewportPose) -> bool {
    Frustum::new(pose).contains(dir)
}

/// Estimated number of pixels of `tile` inside the viewport.
///
/// Every `step`-th row and column is sampled, starting `step / 2` pixels into
/// the tile, and the hit count is scaled by `step²`. `step = 1` counts every
/// pixel exactly.
pub fn tile_viewport_pixels(tile: &TileRect, pose: &ViewportPose, frame: &ErpFrame, step: u32) -> Result<u64> {
    if step == 0 {
        return Err(Error::Domain("sampling stride must be at least 1".into()));
    }
    if !tile.fits(frame) {
        return Err(Error::Domain(format!("{tile:?} does not fit the frame")));
    }
    let frustum = Frustum::new(pose);
    let offset = step / 2;
    let columns: Vec<(f64, f64)> = (tile.x + offset.min(tile.w - 1)..tile.x + tile.w)
        .step_by(step as usize)
        .map(|u| {
            let (s, c) = column_longitude(f64::from(u), frame.width).sin_cos();
            (c, s)
        })
        .collect();
    let rows: Vec<u32> = (tile.y + offset.min(tile.h - 1)..tile.y + tile.h).step_by(step as usize).collect();
    let hits: u64 = rows
        .par_iter()
        .map(|&v| {
            let (sin_lat, cos_lat) = row_latitude(f64::from(v), frame.height).sin_cos();
            columns
                .iter()
                .filter(|&&(cos_lon, sin_lon)| frustum.contains_xyz(cos_lat * cos_lon, cos_lat * sin_lon, sin_lat))
                .count() as u64
        })
        .sum();
    Ok(hits * u64::from(step) * u64::from(step))
}

/// Estimated pixel count of the whole viewport, ρ_tot.
pub fn viewport_pixels(pose: &ViewportPose, frame: &ErpFrame, step: u32) -> Result<u64> {
    tile_viewport_pixels(&frame.rect(), pose, frame, step)
}
