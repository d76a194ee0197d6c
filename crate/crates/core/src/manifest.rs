//! Extended manifest: tile geometry, spherical tile centers and the
//! representation ladder shared by every tile.
//!
//! The document is canonical JSON: object keys sorted, integers bare and
//! reals rounded to nine significant digits, so emitting the same manifest
//! always produces the same bytes.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number, Value};

use crate::error::{Error, Result};
use crate::geometry::{tile_center, ErpFrame, TileLayout, TileRect, CENTER_TOLERANCE};

pub const FORMAT_VERSION: &str = "tiled-vr-abr/1";

/// Target bitrates of the whole-frame encodes, in bits per second.
pub const STANDARD_LADDER_BPS: [u64; 13] = [
    900_000, 2_000_000, 5_000_000, 7_000_000, 9_000_000, 11_000_000, 13_000_000, 15_000_000, 17_000_000, 19_000_000,
    21_000_000, 23_000_000, 25_000_000,
];

pub const DEFAULT_SEGMENT_MS: u64 = 2_000;
pub const DEFAULT_URL_TEMPLATE: &str = "tile{tile}/rep{rep}/seg{seg}.m4s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Representation {
    pub id: u32,
    pub bitrate: u64,
}

/// Representations sorted by strictly increasing bitrate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ladder(Vec<Representation>);

impl Ladder {
    pub fn new(reps: Vec<Representation>) -> Result<Self> {
        let problems = ladder_problems(&reps);
        if problems.is_empty() {
            Ok(Self(reps))
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Ladder with ids `1..=n` assigned in the given (ascending) order.
    pub fn from_bitrates(bitrates: &[u64]) -> Result<Self> {
        Self::new(bitrates.iter().zip(1u32..).map(|(&bitrate, id)| Representation { id, bitrate }).collect())
    }

    pub fn standard() -> Self {
        Self::from_bitrates(&STANDARD_LADDER_BPS).expect("standard ladder is sorted")
    }

    /// The same ladder with every bitrate divided evenly over `n_tiles`
    /// tiles and rounded to the nearest bit per second.
    pub fn per_tile(&self, n_tiles: u32) -> Result<Self> {
        if n_tiles == 0 {
            return Err(Error::Domain("cannot split a ladder over zero tiles".into()));
        }
        let n = u64::from(n_tiles);
        Self::new(self.0.iter().map(|r| Representation { id: r.id, bitrate: (r.bitrate + n / 2) / n }).collect())
    }

    pub fn reps(&self) -> &[Representation] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Representation> {
        self.0.iter().find(|r| r.id == id)
    }

    pub fn lowest(&self) -> &Representation {
        &self.0[0]
    }

    pub fn highest(&self) -> &Representation {
        &self.0[self.0.len() - 1]
    }
}

fn ladder_problems(reps: &[Representation]) -> Vec<String> {
    let mut problems = Vec::new();
    if reps.is_empty() {
        problems.push("ladder is empty".to_string());
    }
    for r in reps {
        if r.id == 0 {
            problems.push("representation ids start at 1".to_string());
        }
        if r.bitrate == 0 {
            problems.push(format!("representation {} has zero bitrate", r.id));
        }
    }
    for (i, a) in reps.iter().enumerate() {
        if reps[i + 1..].iter().any(|b| b.id == a.id) {
            problems.push(format!("representation id {} is not unique", a.id));
        }
    }
    for w in reps.windows(2) {
        if w[1].bitrate <= w[0].bitrate {
            problems.push(format!("ladder not strictly increasing: {} bps then {} bps", w[0].bitrate, w[1].bitrate));
        }
    }
    problems
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    layout: TileLayout,
    ladder: Ladder,
    segment_duration_ms: u64,
    media_duration_ms: u64,
    url_template: String,
}

impl Manifest {
    pub fn new(
        layout: TileLayout,
        ladder: Ladder,
        segment_duration_ms: u64,
        media_duration_ms: u64,
        url_template: impl Into<String>,
    ) -> Result<Self> {
        let url_template = url_template.into();
        let mut problems = Vec::new();
        if segment_duration_ms == 0 {
            problems.push("segment duration must be positive".to_string());
        }
        if media_duration_ms == 0 {
            problems.push("media duration must be positive".to_string());
        }
        for placeholder in ["{tile}", "{rep}", "{seg}"] {
            if !url_template.contains(placeholder) {
                problems.push(format!("url template lacks {placeholder}"));
            }
        }
        if problems.is_empty() {
            Ok(Self { layout, ladder, segment_duration_ms, media_duration_ms, url_template })
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn layout(&self) -> &TileLayout {
        &self.layout
    }

    pub fn ladder(&self) -> &Ladder {
        &self.ladder
    }

    pub fn segment_duration_ms(&self) -> u64 {
        self.segment_duration_ms
    }

    pub fn media_duration_ms(&self) -> u64 {
        self.media_duration_ms
    }

    pub fn url_template(&self) -> &str {
        &self.url_template
    }

    pub fn segment_count(&self) -> u64 {
        self.media_duration_ms.div_ceil(self.segment_duration_ms)
    }

    /// Same manifest cut into segments of a different length.
    pub fn with_segment_duration(&self, segment_duration_ms: u64) -> Result<Self> {
        Self::new(
            self.layout.clone(),
            self.ladder.clone(),
            segment_duration_ms,
            self.media_duration_ms,
            self.url_template.clone(),
        )
    }

    pub fn segment_url(&self, tile_id: u32, rep_id: u32, seg_index: u64) -> Result<String> {
        if self.layout.tile(tile_id).is_none() {
            return Err(Error::Domain(format!("no tile with id {tile_id}")));
        }
        if self.ladder.get(rep_id).is_none() {
            return Err(Error::Domain(format!("no representation with id {rep_id}")));
        }
        if seg_index >= self.segment_count() {
            return Err(Error::Domain(format!(
                "segment index {seg_index} out of range (count {})",
                self.segment_count()
            )));
        }
        Ok(self
            .url_template
            .replace("{tile}", &tile_id.to_string())
            .replace("{rep}", &rep_id.to_string())
            .replace("{seg}", &seg_index.to_string()))
    }

    /// Canonical document text.
    pub fn emit(&self) -> String {
        let frame = self.layout.frame();
        let tiles: Vec<Value> = self
            .layout
            .tiles()
            .iter()
            .map(|t| {
                json!({
                    "id": t.id,
                    "x": t.rect.x,
                    "y": t.rect.y,
                    "w": t.rect.w,
                    "h": t.rect.h,
                    "center": {
                        "x": center_component(t.center.x),
                        "y": center_component(t.center.y),
                        "z": center_component(t.center.z),
                    },
                })
            })
            .collect();
        let reps: Vec<Value> =
            self.ladder.reps().iter().map(|r| json!({ "id": r.id, "bitrate_bps": r.bitrate })).collect();
        let doc = json!({
            "format": FORMAT_VERSION,
            "frame": { "width": frame.width(), "height": frame.height() },
            "segment_duration_ms": self.segment_duration_ms,
            "media_duration_ms": self.media_duration_ms,
            "url_template": self.url_template,
            "representations": reps,
            "tiles": tiles,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json values always serialize");
        text.push('\n');
        text
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| {
            use serde_json::error::Category;
            match e.classify() {
                Category::Data => Error::Semantic(format!("{e}")),
                _ => Error::Syntax { line: e.line(), column: e.column(), message: e.to_string() },
            }
        })?;
        doc.into_manifest()
    }
}

/// Rounds to nine significant digits; negative zero becomes zero.
/// `x` rounded to the nine significant digits written to JSON.
pub(crate) fn round_significant(x: f64) -> f64 {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

/// Center coordinates with floating-point residue below 1e-12 written as 0.
fn center_component(x: f64) -> Value {
    canonical_real(if x.abs() < 1e-12 { 0.0 } else { x })
}

pub(crate) fn canonical_real(x: f64) -> Value {
    Number::from_f64(round_significant(x)).map_or(Value::Null, Value::Number)
}

/// Sorted-key JSON text for arbitrary serializable values.
pub(crate) fn canonical_json<T: Serialize>(value: &T) -> String {
    fn canonicalize(v: Value) -> Value {
        match v {
            Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonicalize(v))).collect::<Map<_, _>>()),
            Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
            Value::Number(n) if n.is_f64() => canonical_real(n.as_f64().unwrap_or_default()),
            other => other,
        }
    }
    let v = canonicalize(serde_json::to_value(value).expect("serializable"));
    let mut text = serde_json::to_string_pretty(&v).expect("json values always serialize");
    text.push('\n');
    text
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    frame: FrameDoc,
    segment_duration_ms: u64,
    media_duration_ms: u64,
    url_template: String,
    representations: Vec<RepDoc>,
    tiles: Vec<TileDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    width: u32,
    height: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepDoc {
    id: u32,
    bitrate_bps: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TileDoc {
    id: u32,
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    center: CenterDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CenterDoc {
    x: f64,
    y: f64,
    z: f64,
}

impl Document {
    fn into_manifest(mut self) -> Result<Manifest> {
        if self.format != FORMAT_VERSION {
            return Err(Error::Semantic(format!("unsupported format {:?}, expected {FORMAT_VERSION:?}", self.format)));
        }
        let frame = ErpFrame::new(self.frame.width, self.frame.height)
            .map_err(|e| Error::Semantic(format!("invalid frame: {e}")))?;

        self.tiles.sort_by_key(|t| t.id);
        for (t, expected) in self.tiles.iter().zip(1u32..) {
            if t.id != expected {
                return Err(Error::Semantic(format!(
                    "tile ids must run 1..{} without gaps; found {}",
                    self.tiles.len(),
                    t.id
                )));
            }
        }
        let rects: Vec<TileRect> = self.tiles.iter().map(|t| TileRect::new(t.x, t.y, t.w, t.h)).collect();
        let layout = TileLayout::from_rects(frame, rects)?;

        for (doc, tile) in self.tiles.iter().zip(layout.tiles()) {
            let c = &doc.center;
            let norm = (c.x * c.x + c.y * c.y + c.z * c.z).sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > CENTER_TOLERANCE {
                return Err(Error::Semantic(format!("tile {}: center not on unit sphere (norm {norm})", doc.id)));
            }
            let derived = tile_center(&tile.rect, &frame)?;
            let off = (c.x - derived.x).abs().max((c.y - derived.y).abs()).max((c.z - derived.z).abs());
            if off > CENTER_TOLERANCE {
                return Err(Error::Semantic(format!(
                    "tile {}: center does not match the midpoint of its rect (off by {off:e})",
                    doc.id
                )));
            }
        }

        let ladder = Ladder::new(
            self.representations.iter().map(|r| Representation { id: r.id, bitrate: r.bitrate_bps }).collect(),
        )
        .map_err(|e| Error::Semantic(e.to_string()))?;

        Manifest::new(layout, ladder, self.segment_duration_ms, self.media_duration_ms, self.url_template)
            .map_err(|e| Error::Semantic(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Manifest {
        let frame = ErpFrame::new(64, 32).unwrap();
        Manifest::new(
            TileLayout::whole_frame(frame),
            Ladder::from_bitrates(&[1_000_000]).unwrap(),
            2_000,
            4_000,
            DEFAULT_URL_TEMPLATE,
        )
        .unwrap()
    }

    #[test]
    fn minimal_manifest() {
        let m = small();
        let text = m.emit();
        let v: Value = serde_json::from_str(&text).unwrap();
        let tiles = v["tiles"].as_array().unwrap();
        assert_eq!(tiles.len(), 1);
        assert!((tiles[0]["center"]["x"].as_f64().unwrap() - 1.0).abs() < 1e-3);
        assert!(tiles[0]["center"]["y"].as_f64().unwrap().abs() < 1e-3);
        assert!(tiles[0]["center"]["z"].as_f64().unwrap().abs() < 1e-3);
        assert_eq!(v["format"], FORMAT_VERSION);
        assert_eq!(Manifest::parse(&text).unwrap(), m);
    }

    #[test]
    fn standard_ladder_ten_tiles() {
        let frame = ErpFrame::new(8192, 4096).unwrap();
        let m = Manifest::new(
            TileLayout::build(frame, 10).unwrap(),
            Ladder::standard().per_tile(10).unwrap(),
            2_000,
            30_000,
            DEFAULT_URL_TEMPLATE,
        )
        .unwrap();
        let v: Value = serde_json::from_str(&m.emit()).unwrap();
        assert_eq!(v["tiles"].as_array().unwrap().len(), 10);
        assert_eq!(v["representations"].as_array().unwrap().len(), 13);
        assert_eq!(v["representations"][0]["bitrate_bps"], 90_000);
        assert_eq!(v["representations"][12]["bitrate_bps"], 2_500_000);
        assert_eq!(m.segment_count(), 15);
    }

    #[test]
    fn emit_is_deterministic() {
        let m = small();
        assert_eq!(m.emit(), m.emit());
    }

    #[test]
    fn keys_are_sorted() {
        let text = small().emit();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("format") < pos("frame"));
        assert!(pos("frame") < pos("media_duration_ms"));
        assert!(pos("representations") < pos("segment_duration_ms"));
        assert!(pos("tiles") < pos("url_template"));
    }

    #[test]
    fn center_off_sphere() {
        let text = small().emit();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["tiles"][0]["center"] = json!({ "x": 0.9, "y": 0.0, "z": 0.0 });
        let err = Manifest::parse(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Semantic(ref m) if m.contains("center not on unit sphere")), "{err}");
    }

    #[test]
    fn center_not_matching_rect() {
        let text = small().emit();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["tiles"][0]["center"] = json!({ "x": 0.0, "y": 1.0, "z": 0.0 });
        let err = Manifest::parse(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Semantic(ref m) if m.contains("midpoint")), "{err}");
    }

    #[test]
    fn overlapping_tiles() {
        let frame = ErpFrame::new(64, 32).unwrap();
        let m = Manifest::new(
            TileLayout::build(frame, 3).unwrap(),
            Ladder::from_bitrates(&[1_000]).unwrap(),
            2_000,
            4_000,
            DEFAULT_URL_TEMPLATE,
        )
        .unwrap();
        let mut v: Value = serde_json::from_str(&m.emit()).unwrap();
        // grow the top pole into the equator band
        v["tiles"][0]["h"] = json!(12);
        let err = Manifest::parse(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Semantic(ref m) if m.contains("tiles overlap")), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = Manifest::parse("{\n  \"format\": ,\n}").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_version() {
        let text = small().emit().replace(FORMAT_VERSION, "tiled-vr-abr/9");
        assert!(matches!(Manifest::parse(&text), Err(Error::Semantic(_))));
    }

    #[test]
    fn gap_in_tile_ids() {
        let mut v: Value = serde_json::from_str(&small().emit()).unwrap();
        v["tiles"][0]["id"] = json!(2);
        assert!(matches!(Manifest::parse(&v.to_string()), Err(Error::Semantic(_))));
    }

    #[test]
    fn url_substitution() {
        let frame = ErpFrame::new(80, 40).unwrap();
        let m = Manifest::new(
            TileLayout::build(frame, 10).unwrap(),
            Ladder::from_bitrates(&[1, 2, 3]).unwrap(),
            2_000,
            16_000,
            "t{tile}/r{rep}/s{seg}.m4s",
        )
        .unwrap();
        assert_eq!(m.segment_url(3, 2, 7).unwrap(), "t3/r2/s7.m4s");
        assert!(matches!(m.segment_url(3, 2, 8), Err(Error::Domain(_))));
        assert!(matches!(m.segment_url(11, 2, 0), Err(Error::Domain(_))));
        assert!(matches!(m.segment_url(1, 4, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn template_without_seg() {
        let frame = ErpFrame::new(64, 32).unwrap();
        let err = Manifest::new(
            TileLayout::whole_frame(frame),
            Ladder::from_bitrates(&[1]).unwrap(),
            2_000,
            4_000,
            "t{tile}/r{rep}.m4s",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(ref p) if p.iter().any(|s| s.contains("{seg}"))));
    }

    #[test]
    fn ladder_rules() {
        assert!(Ladder::from_bitrates(&[]).is_err());
        assert!(Ladder::from_bitrates(&[2, 2]).is_err());
        assert!(Ladder::from_bitrates(&[3, 2]).is_err());
        assert!(Ladder::new(vec![Representation { id: 1, bitrate: 1 }, Representation { id: 1, bitrate: 2 }]).is_err());
        let per_tile = Ladder::standard().per_tile(10).unwrap();
        let bps: Vec<u64> = per_tile.reps().iter().map(|r| r.bitrate).collect();
        assert_eq!(&bps[..5], &[90_000, 200_000, 500_000, 700_000, 900_000]);
    }

    #[test]
    fn canonical_reals() {
        assert_eq!(canonical_real(0.123456789123).to_string(), "0.123456789");
        assert_eq!(canonical_real(-0.0).to_string(), "0.0");
        assert_eq!(canonical_real(1.0).to_string(), "1.0");
    }
}
