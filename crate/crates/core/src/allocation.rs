//! Viewport-aware bitrate allocation and per-tile representation selection.
//!
//! Tiles the viewport touches share `γ·R_cur` in proportion to the number of
//! viewport pixels they hold. The remaining `(1 − γ)·R_cur` goes to the other
//! tiles with weights `κ_i = max δ / δ_i`, where `δ_i` is the chord distance
//! from the view axis to the tile center, so nearer tiles receive more.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{chord_distance, tile_viewport_pixels, TileLayout, ViewportPose};
use crate::manifest::{Ladder, Representation};

pub const DEFAULT_GAMMA: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Membership {
    /// Touches the viewport; `weight` is its share of viewport pixels.
    Inside { pixels: u64, weight: f64 },
    /// Disjoint from the viewport at `distance` (chord) from the view axis.
    Outside { distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TileClass {
    pub tile_id: u32,
    pub membership: Membership,
}

impl TileClass {
    pub fn is_inside(&self) -> bool {
        matches!(self.membership, Membership::Inside { .. })
    }

    pub fn weight(&self) -> Option<f64> {
        match self.membership {
            Membership::Inside { weight, .. } => Some(weight),
            Membership::Outside { .. } => None,
        }
    }

    pub fn distance(&self) -> Option<f64> {
        match self.membership {
            Membership::Outside { distance } => Some(distance),
            Membership::Inside { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileClassification {
    pub tiles: Vec<TileClass>,
    /// Viewport pixel count at the sampling stride used.
    pub rho_tot: u64,
}

impl TileClassification {
    pub fn inside(&self) -> impl Iterator<Item = &TileClass> {
        self.tiles.iter().filter(|t| t.is_inside())
    }

    pub fn outside(&self) -> impl Iterator<Item = &TileClass> {
        self.tiles.iter().filter(|t| !t.is_inside())
    }
}

/// Splits tiles into those inside and outside the viewport of `pose`.
pub fn classify_tiles(layout: &TileLayout, pose: &ViewportPose, stride: u32) -> Result<TileClassification> {
    let frame = layout.frame();
    let counts = layout
        .tiles()
        .iter()
        .map(|t| tile_viewport_pixels(&t.rect, pose, &frame, stride))
        .collect::<Result<Vec<u64>>>()?;
    let rho_tot: u64 = counts.iter().sum();
    if rho_tot == 0 {
        return Err(Error::Computation(format!(
            "viewport covers no sampled pixels at stride {stride}; use a smaller stride"
        )));
    }
    let axis = pose.axis();
    let tiles = layout
        .tiles()
        .iter()
        .zip(&counts)
        .map(|(tile, &pixels)| {
            let membership = if pixels > 0 {
                Membership::Inside { pixels, weight: pixels as f64 / rho_tot as f64 }
            } else {
                let distance = chord_distance(&axis, &tile.center);
                debug_assert!(distance > 0.0, "a tile centered on the view axis is inside the viewport");
                Membership::Outside { distance }
            };
            TileClass { tile_id: tile.id, membership }
        })
        .collect();
    Ok(TileClassification { tiles, rho_tot })
}

/// Normalized distance weights `κ̂_i` for the outside tiles, in tile order.
pub fn distance_weights(distances: &[f64]) -> Vec<f64> {
    let max = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let kappa: Vec<f64> = distances.iter().map(|d| max / d).collect();
    let total: f64 = kappa.iter().sum();
    kappa.into_iter().map(|k| k / total).collect()
}

/// Per-tile target bitrates `R_i`, in the classification's tile order.
///
/// When the viewport touches every tile the outside share is handed to the
/// inside tiles in proportion to their weights, so the targets always sum to
/// `r_cur`.
pub fn allocate(classification: &TileClassification, r_cur: f64, gamma: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma {gamma} outside [0, 1]")));
    }
    if !(r_cur > 0.0 && r_cur.is_finite()) {
        return Err(Error::Domain(format!("current bandwidth {r_cur} must be positive")));
    }
    if classification.inside().next().is_none() {
        return Err(Error::Computation("no tile intersects the viewport".into()));
    }

    let distances: Vec<f64> = classification.outside().filter_map(TileClass::distance).collect();
    let inside_budget = if distances.is_empty() { r_cur } else { gamma * r_cur };
    let outside_budget = (1.0 - gamma) * r_cur;
    let mut kappa_hat = distance_weights(&distances).into_iter();

    Ok(classification
        .tiles
        .iter()
        .map(|t| match t.membership {
            Membership::Inside { weight, .. } => inside_budget * weight,
            Membership::Outside { .. } => outside_budget * kappa_hat.next().expect("one weight per outside tile"),
        })
        .collect())
}

/// Representation whose bitrate is closest to `target`; ties go to the
/// lower bitrate.
pub fn select_representation(target: f64, ladder: &Ladder) -> Representation {
    let reps = ladder.reps();
    let above = reps.partition_point(|r| (r.bitrate as f64) < target);
    if above == 0 {
        return reps[0];
    }
    if above == reps.len() {
        return reps[reps.len() - 1];
    }
    let (lo, hi) = (reps[above - 1], reps[above]);
    if (hi.bitrate as f64 - target).abs() < (target - lo.bitrate as f64).abs() {
        hi
    } else {
        lo
    }
}

/// Whole-frame representation for the non-tiled reference streamer.
pub fn select_reference(ladder: &Ladder, r_cur: f64) -> Representation {
    select_representation(r_cur, ladder)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileAllocation {
    pub tile_id: u32,
    pub class: TileClass,
    pub target_bps: f64,
    pub rep: Representation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationResult {
    pub gamma: f64,
    pub r_cur: f64,
    pub rho_tot: u64,
    pub tiles: Vec<TileAllocation>,
}

impl AllocationResult {
    pub fn total_target(&self) -> f64 {
        self.tiles.iter().map(|t| t.target_bps).sum()
    }

    pub fn total_selected(&self) -> u64 {
        self.tiles.iter().map(|t| t.rep.bitrate).sum()
    }
}

pub fn allocate_and_select(
    layout: &TileLayout,
    pose: &ViewportPose,
    ladder: &Ladder,
    r_cur: f64,
    gamma: f64,
    stride: u32,
) -> Result<AllocationResult> {
    let classification = classify_tiles(layout, pose, stride)?;
    let targets = allocate(&classification, r_cur, gamma)?;
    let tiles = classification
        .tiles
        .iter()
        .zip(targets)
        .map(|(class, target_bps)| TileAllocation {
            tile_id: class.tile_id,
            class: *class,
            target_bps,
            rep: select_representation(target_bps, ladder),
        })
        .collect();
    Ok(AllocationResult { gamma, r_cur, rho_tot: classification.rho_tot, tiles })
}
