mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tiled_vr_abr::geometry::{ErpFrame, TileLayout};
use tiled_vr_abr::manifest::{Ladder, Manifest, DEFAULT_SEGMENT_MS, DEFAULT_URL_TEMPLATE};

/// Frames used for the bundled golden manifests.
const GOLDEN: [(u32, u32, u32); 3] = [(3, 8192, 4096), (8, 7680, 3840), (10, 8192, 4096)];

fn golden_manifest(n: u32, width: u32, height: u32) -> Manifest {
    let frame = ErpFrame::new(width, height).unwrap();
    Manifest::new(
        TileLayout::build(frame, n).unwrap(),
        Ladder::standard().per_tile(n).unwrap(),
        DEFAULT_SEGMENT_MS,
        30_000,
        DEFAULT_URL_TEMPLATE,
    )
    .unwrap()
}

#[test]
fn golden_manifests_are_byte_stable() {
    for (n, w, h) in GOLDEN {
        let text = golden_manifest(n, w, h).emit();
        common::golden(&format!("manifests/tiles{n}_{w}x{h}.json"), &text).unwrap();
    }
}

#[test]
fn golden_manifests_parse_back() {
    for (n, w, h) in GOLDEN {
        let path = common::fixtures_dir().join(format!("manifests/tiles{n}_{w}x{h}.json"));
        let text = std::fs::read_to_string(path).unwrap();
        let parsed = Manifest::parse(&text).unwrap();
        assert_eq!(parsed, golden_manifest(n, w, h));
        assert_eq!(parsed.layout().len(), n as usize);
        assert_eq!(parsed.ladder().len(), 13);
        assert_eq!(parsed.emit(), text);
    }
}

#[test]
fn golden_ten_tiles_geometry() {
    let m = golden_manifest(10, 8192, 4096);
    let tiles = m.layout().tiles();
    assert_eq!((tiles[0].rect.w, tiles[0].rect.h), (8192, 1024));
    assert_eq!((tiles[9].rect.y, tiles[9].rect.h), (3072, 1024));
    for t in &tiles[1..9] {
        assert_eq!((t.rect.w, t.rect.h, t.rect.y), (1024, 2048, 1024));
    }
    // 0.9 Mbps / 10 and 25 Mbps / 10
    assert_eq!(m.ladder().lowest().bitrate, 90_000);
    assert_eq!(m.ladder().highest().bitrate, 2_500_000);
}

#[test]
fn seeded_generator_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..200 {
        let m = common::random_manifest(&mut rng);
        let text = m.emit();
        assert_eq!(Manifest::parse(&text).unwrap(), m);
        assert_eq!(Manifest::parse(&text).unwrap().emit(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_inverts_emit(seed in any::<u64>()) {
        let m = common::random_manifest(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = m.emit();
        let parsed = Manifest::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &m);
        prop_assert_eq!(parsed.emit(), text);
    }
}
