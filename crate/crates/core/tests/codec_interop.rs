mod common;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dctfuse::bench::{default_dataset_dir, load_dataset};
use dctfuse::grid::block_levels;
use dctfuse::{
    emit_jpeg, encode_raster, parse_jpeg, BlockGrid, BlockImage, CodecError, CoeffBlock, CoeffForm,
    QuantTable,
};

fn fixture(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn max_diff(a: &[u8], b: &[u8]) -> u8 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

/// Offset of the first byte after the SOS header.
fn scan_start(stream: &[u8]) -> usize {
    let sos = stream.windows(2).position(|w| w == [0xff, 0xda]).unwrap();
    let len = u16::from_be_bytes([stream[sos + 2], stream[sos + 3]]) as usize;
    sos + 2 + len
}

#[test]
fn dataset_streams_decode_identically_in_reference_decoder() {
    for img in load_dataset(&default_dataset_dir()).unwrap() {
        for quality in [50, 75, 90] {
            let stream = encode_raster(&img.ground_truth, quality).unwrap();
            let ours = parse_jpeg(&stream).unwrap().to_raster().to_u8();
            let (w, h, theirs) = common::reference_decode(&stream).unwrap();
            assert_eq!(
                (w, h),
                (img.ground_truth.width(), img.ground_truth.height())
            );
            assert!(max_diff(&ours, &theirs) <= 1, "{} q{quality}", img.id);
        }
    }
}

#[test]
fn foreign_baseline_streams() {
    for name in [
        "libjpeg_q80.jpg",
        "libjpeg_optimized.jpg",
        "libjpeg_restart.jpg",
    ] {
        let stream = fixture(name);
        let parsed = parse_jpeg(&stream).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!((parsed.width(), parsed.height()), (101, 77), "{name}");
        let (_, _, theirs) = common::reference_decode(&stream).unwrap();
        let ours = parsed.to_raster().to_u8();
        assert!(max_diff(&ours, &theirs) <= 1, "{name}");

        // re-emitting with our Huffman tables keeps every level
        let again = parse_jpeg(&emit_jpeg(&parsed).unwrap()).unwrap();
        assert_eq!(
            block_levels(&again).unwrap(),
            block_levels(&parsed).unwrap(),
            "{name}"
        );
        assert_eq!(again.quant(), parsed.quant());
    }
}

#[test]
fn foreign_unsupported_streams_are_named() {
    match parse_jpeg(&fixture("libjpeg_progressive.jpg")) {
        Err(CodecError::Unsupported { marker, .. }) => assert_eq!(marker, "SOF2"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_jpeg(&fixture("libjpeg_color.jpg")),
        Err(CodecError::Unsupported { .. })
    ));
}

#[test]
fn every_ff_in_scan_data_is_stuffed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen_ff = 0;
    for _ in 0..20 {
        let raster = common::natural_ish(&mut rng, 64, 48);
        let stream = encode_raster(&raster, rng.gen_range(60..=100)).unwrap();
        let scan = &stream[scan_start(&stream)..stream.len() - 2];
        for (i, &b) in scan.iter().enumerate() {
            if b == 0xff {
                seen_ff += 1;
                assert_eq!(scan.get(i + 1), Some(&0x00));
            }
        }
        assert_eq!(&stream[stream.len() - 2..], &[0xff, 0xd9]);
    }
    assert!(seen_ff > 0, "no 0xFF produced; the check proved nothing");
}

#[test]
fn zero_block_and_determinism() {
    let grid = BlockGrid::new(8, 8, vec![CoeffBlock::zero(CoeffForm::Quantized)]).unwrap();
    let img = BlockImage::new(grid, QuantTable::for_quality(75)).unwrap();
    let a = emit_jpeg(&img).unwrap();
    let b = emit_jpeg(&img).unwrap();
    assert_eq!(a, b);
    assert_eq!(parse_jpeg(&a).unwrap(), img);
}

#[test]
fn dc_differences_accumulate_to_last_dc() {
    // alternating extremes make every DC difference large
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let blocks: Vec<CoeffBlock> = (0..40)
        .map(|i| {
            let mut l = [0i32; 64];
            l[0] = if i % 2 == 0 { 1000 } else { -1000 } + rng.gen_range(-20..=20);
            l[63] = rng.gen_range(-5..=5);
            CoeffBlock::quantized(l)
        })
        .collect();
    let expected: Vec<[i32; 64]> = blocks.iter().map(|b| b.levels().unwrap()).collect();
    let img = BlockImage::new(BlockGrid::new(320, 8, blocks).unwrap(), QuantTable::unit()).unwrap();
    let back = parse_jpeg(&emit_jpeg(&img).unwrap()).unwrap();
    assert_eq!(block_levels(&back).unwrap(), expected);
}
