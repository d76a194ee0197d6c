//! Logarithmic rate-quality model standing in for encoded tiles, and the
//! pixel-weighted viewport quality built on top of it.

pub mod report;

use serde::{Deserialize, Serialize};

use crate::allocation::{classify_tiles, TileClassification};
use crate::error::{Error, Result};
use crate::geometry::{Tile, TileLayout, ViewportPose};

/// Added to the bits-per-pixel density so a zero rate stays finite.
pub const DENSITY_EPSILON: f64 = 1e-9;

pub const DEFAULT_OFFSET_DB: f64 = 47.0;
pub const DEFAULT_SLOPE_DB: f64 = 5.0;
pub const DEFAULT_FLOOR_DB: f64 = 20.0;
pub const DEFAULT_CEILING_DB: f64 = 50.0;

/// `q = a + b · ln(bps / pixels + ε)` for one tile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateQualityParams {
    pub offset_db: f64,
    pub slope_db: f64,
}

impl Default for RateQualityParams {
    fn default() -> Self {
        Self { offset_db: DEFAULT_OFFSET_DB, slope_db: DEFAULT_SLOPE_DB }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateQualityModel {
    /// Indexed by tile id − 1.
    params: Vec<RateQualityParams>,
    floor_db: f64,
    ceiling_db: f64,
}

impl RateQualityModel {
    pub fn new(params: Vec<RateQualityParams>, floor_db: f64, ceiling_db: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if params.is_empty() {
            problems.push("model has no tiles".to_string());
        }
        for (p, id) in params.iter().zip(1u32..) {
            if !(p.slope_db > 0.0 && p.slope_db.is_finite()) {
                problems.push(format!("tile {id}: slope {} must be positive", p.slope_db));
            }
            if !p.offset_db.is_finite() {
                problems.push(format!("tile {id}: offset must be finite"));
            }
        }
        if floor_db.is_nan() || ceiling_db.is_nan() || floor_db >= ceiling_db {
            problems.push(format!("floor {floor_db} dB not below ceiling {ceiling_db} dB"));
        }
        if problems.is_empty() {
            Ok(Self { params, floor_db, ceiling_db })
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Same parameters for every tile of `layout`.
    pub fn uniform(layout: &TileLayout, params: RateQualityParams, floor_db: f64, ceiling_db: f64) -> Result<Self> {
        Self::new(vec![params; layout.len()], floor_db, ceiling_db)
    }

    pub fn default_for(layout: &TileLayout) -> Self {
        Self::uniform(layout, RateQualityParams::default(), DEFAULT_FLOOR_DB, DEFAULT_CEILING_DB)
            .expect("default parameters are valid")
    }

    pub fn floor_db(&self) -> f64 {
        self.floor_db
    }

    pub fn ceiling_db(&self) -> f64 {
        self.ceiling_db
    }

    pub fn tile_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self, tile_id: u32) -> Option<&RateQualityParams> {
        tile_id.checked_sub(1).and_then(|i| self.params.get(i as usize))
    }

    /// PSNR-like quality of `tile` streamed at `bitrate` bits per second.
    pub fn tile_quality(&self, tile: &Tile, bitrate: f64) -> Result<f64> {
        let p = self
            .params(tile.id)
            .ok_or_else(|| Error::Domain(format!("tile {} is not in the quality model", tile.id)))?;
        if bitrate.is_nan() || bitrate < 0.0 {
            return Err(Error::Domain(format!("bitrate {bitrate} must be nonnegative")));
        }
        let density = bitrate / tile.rect.area() as f64 + DENSITY_EPSILON;
        let q = p.offset_db + p.slope_db * density.ln();
        Ok(q.clamp(self.floor_db, self.ceiling_db))
    }
}

/// Viewport quality plus the pixel weight each contributing tile carried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewportQuality {
    pub psnr_db: f64,
    pub weights: Vec<(u32, f64)>,
}

/// Pixel-weighted mean of inside-tile qualities for a known classification.
pub fn viewport_quality_with(
    model: &RateQualityModel,
    layout: &TileLayout,
    classification: &TileClassification,
    per_tile_bitrates: &[f64],
) -> Result<ViewportQuality> {
    if per_tile_bitrates.len() != layout.len() {
        return Err(Error::Domain(format!("{} bitrates given for {} tiles", per_tile_bitrates.len(), layout.len())));
    }
    let mut psnr_db = 0.0;
    let mut weights = Vec::new();
    for class in classification.inside() {
        let weight = class.weight().expect("inside tiles carry a weight");
        let tile =
            layout.tile(class.tile_id).ok_or_else(|| Error::Domain(format!("tile {} not in layout", class.tile_id)))?;
        let q = model.tile_quality(tile, per_tile_bitrates[(class.tile_id - 1) as usize])?;
        psnr_db += weight * q;
        weights.push((class.tile_id, weight));
    }
    // keep rounding from leaving the model's range
    let psnr_db = psnr_db.clamp(model.floor_db, model.ceiling_db);
    Ok(ViewportQuality { psnr_db, weights })
}

pub fn viewport_quality(
    model: &RateQualityModel,
    layout: &TileLayout,
    pose: &ViewportPose,
    per_tile_bitrates: &[f64],
    stride: u32,
) -> Result<ViewportQuality> {
    let classification = classify_tiles(layout, pose, stride)?;
    viewport_quality_with(model, layout, &classification, per_tile_bitrates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{Membership, TileClass};
    use crate::geometry::{ErpFrame, TileRect, UnitVec3};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tile(id: u32, w: u32, h: u32) -> Tile {
        Tile { id, rect: TileRect::new(0, 0, w, h), center: UnitVec3::from_lon_lat(0.0, 0.0) }
    }

    fn model(n: usize, a: f64) -> RateQualityModel {
        RateQualityModel::new(vec![RateQualityParams { offset_db: a, slope_db: 5.0 }; n], 20.0, 50.0).unwrap()
    }

    #[test]
    fn zero_rate_hits_floor() {
        let m = RateQualityModel::default_for(&TileLayout::whole_frame(ErpFrame::new(64, 32).unwrap()));
        assert_eq!(m.tile_quality(&tile(1, 64, 32), 0.0).unwrap(), 20.0);
    }

    #[test]
    fn doubling_density_adds_five_ln_two() {
        let m = model(1, 60.0);
        let t = tile(1, 1000, 1000);
        // densities 0.001 and 0.002 bps/pixel keep q inside [20, 50]
        let q1 = m.tile_quality(&t, 1_000.0).unwrap();
        let q2 = m.tile_quality(&t, 2_000.0).unwrap();
        assert!(q1 > 20.0 && q2 < 50.0);
        assert_abs_diff_eq!(q2 - q1, 5.0 * std::f64::consts::LN_2, epsilon = 1e-5);
        assert_abs_diff_eq!(q2 - q1, 3.466, epsilon = 1e-3);
    }

    #[test]
    fn equal_density_equal_quality() {
        let m = model(2, 47.0);
        let a = m.tile_quality(&tile(1, 100, 100), 5_000.0).unwrap();
        let b = m.tile_quality(&tile(2, 200, 100), 10_000.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_tile() {
        let m = model(1, 47.0);
        assert!(matches!(m.tile_quality(&tile(2, 10, 10), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_models() {
        assert!(RateQualityModel::new(vec![RateQualityParams { offset_db: 1.0, slope_db: 0.0 }], 0.0, 1.0).is_err());
        assert!(RateQualityModel::new(vec![RateQualityParams::default()], 50.0, 20.0).is_err());
    }

    #[test]
    fn reference_anchor_near_forty_db() {
        let f = ErpFrame::new(8192, 4096).unwrap();
        let layout = TileLayout::whole_frame(f);
        let m = RateQualityModel::default_for(&layout);
        let q = m.tile_quality(&layout.tiles()[0], 9e6).unwrap();
        assert!((q - 40.0).abs() < 1.0, "{q}");
    }

    #[test]
    fn viewport_inside_one_tile() {
        let f = ErpFrame::new(1024, 512).unwrap();
        let layout = TileLayout::build(f, 10).unwrap();
        let m = RateQualityModel::default_for(&layout);
        let pose = ViewportPose::from_degrees(-22.5, 0.0, 0.0).unwrap().with_fov_degrees(20.0, 20.0).unwrap();
        let rates: Vec<f64> = (1..=10).map(|i| f64::from(i) * 10_000.0).collect();
        let vq = viewport_quality(&m, &layout, &pose, &rates, 1).unwrap();
        assert_eq!(vq.psnr_db, m.tile_quality(&layout.tiles()[4], rates[4]).unwrap());
        assert_eq!(vq.weights, vec![(5, 1.0)]);
    }

    #[test]
    fn equal_density_everywhere() {
        let f = ErpFrame::new(1024, 512).unwrap();
        let layout = TileLayout::build(f, 10).unwrap();
        let m = RateQualityModel::default_for(&layout);
        let rates: Vec<f64> = layout.tiles().iter().map(|t| t.rect.area() as f64 * 0.05).collect();
        let common = m.tile_quality(&layout.tiles()[0], rates[0]).unwrap();
        for yaw in [-170.0, -30.0, 0.0, 75.0] {
            let pose = ViewportPose::from_degrees(yaw, 30.0, 0.0).unwrap();
            let vq = viewport_quality(&m, &layout, &pose, &rates, 2).unwrap();
            assert_abs_diff_eq!(vq.psnr_db, common, epsilon = 1e-9);
        }
    }

    /// Two equal-parameter tiles of different size share a fixed budget. The
    /// pixel-proportional split should match the best split found by a grid
    /// search and beat an even split.
    #[test]
    fn weighted_split_beats_even_split() {
        let layout = TileLayout::from_rects(
            ErpFrame::new(400, 200).unwrap(),
            vec![TileRect::new(0, 0, 100, 200), TileRect::new(100, 0, 300, 200)],
        )
        .unwrap();
        let m = RateQualityModel::uniform(&layout, RateQualityParams::default(), 0.0, 200.0).unwrap();
        let class = TileClassification {
            tiles: vec![
                TileClass { tile_id: 1, membership: Membership::Inside { pixels: 1, weight: 0.25 } },
                TileClass { tile_id: 2, membership: Membership::Inside { pixels: 3, weight: 0.75 } },
            ],
            rho_tot: 4,
        };
        let budget = 80_000.0;
        let q = |share: f64| {
            viewport_quality_with(&m, &layout, &class, &[budget * share, budget * (1.0 - share)]).unwrap().psnr_db
        };
        let weighted = q(0.25);
        let even = q(0.5);
        let grid_best = (1..1000).map(|k| q(f64::from(k) / 1000.0)).fold(f64::NEG_INFINITY, f64::max);
        assert!(weighted > even);
        assert!(weighted >= grid_best - 1e-9);
    }

    proptest! {
        #[test]
        fn monotone_in_bitrate(a in 0.0f64..80.0, b in 0.1f64..20.0, r1 in 0.0f64..1e8, r2 in 0.0f64..1e8) {
            let m = RateQualityModel::new(vec![RateQualityParams { offset_db: a, slope_db: b }], 10.0, 60.0).unwrap();
            let t = tile(1, 1024, 512);
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(m.tile_quality(&t, lo).unwrap() <= m.tile_quality(&t, hi).unwrap());
        }

        #[test]
        fn viewport_quality_bounded_and_ignores_outside(
            yaw in -180.0f64..180.0,
            pitch in -80.0f64..80.0,
            rates in prop::collection::vec(0.0f64..3e6, 10),
            junk in prop::collection::vec(0.0f64..3e6, 10),
        ) {
            let f = ErpFrame::new(512, 256).unwrap();
            let layout = TileLayout::build(f, 10).unwrap();
            let m = RateQualityModel::default_for(&layout);
            let pose = ViewportPose::from_degrees(yaw, pitch, 0.0).unwrap();
            let class = classify_tiles(&layout, &pose, 1).unwrap();
            let vq = viewport_quality_with(&m, &layout, &class, &rates).unwrap();
            let qs: Vec<f64> = class.inside().map(|c| m.tile_quality(layout.tile(c.tile_id).unwrap(), rates[(c.tile_id - 1) as usize]).unwrap()).collect();
            let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(vq.psnr_db >= lo - 1e-9 && vq.psnr_db <= hi + 1e-9);
            let wsum: f64 = vq.weights.iter().map(|w| w.1).sum();
            prop_assert!((wsum - 1.0).abs() < 1e-9);

            let mut relabeled = rates.clone();
            for c in class.outside() {
                let i = (c.tile_id - 1) as usize;
                relabeled[i] = junk[i];
            }
            let again = viewport_quality_with(&m, &layout, &class, &relabeled).unwrap();
            prop_assert_eq!(vq.psnr_db, again.psnr_db);
        }
    }
}
