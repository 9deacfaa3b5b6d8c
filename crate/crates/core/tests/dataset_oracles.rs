use dctfuse::bench::{decode_fused, default_dataset_dir, load_dataset, prepare_pair};
use dctfuse::{
    blur_region, fuse, make_pair, rmse, BlurKernel, BlurSpec, FusionConfig, QuantTable, Raster,
    Region,
};

/// Direct 2-D convolution with a square Gaussian window, edge replicated.
fn direct_gaussian(img: &Raster, sigma: f64, radius: isize, row: usize, col: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let w = (-((dy * dy + dx * dx) as f64) / (2.0 * sigma * sigma)).exp();
            let r = (row as isize + dy).clamp(0, img.height() as isize - 1) as usize;
            let c = (col as isize + dx).clamp(0, img.width() as isize - 1) as usize;
            num += w * img.get(r, c);
            den += w;
        }
    }
    num / den
}

#[test]
fn impulse_response_matches_direct_convolution() {
    let (w, h) = (64, 40);
    let (pr, pc) = (20, 48);
    let mut img = Raster::filled(w, h, 0.0).unwrap();
    img.set(pr, pc, 255.0);
    let spec = BlurSpec::default();
    assert_eq!(spec.region, Region::RightHalf);
    let out = blur_region(&img, &spec).unwrap();

    let mass: f64 = out.data().iter().sum();
    assert!((mass - 255.0).abs() <= 0.5, "mass {mass}");
    let peak = out.get(pr, pc);
    let expected = direct_gaussian(&img, 2.0, 6, pr, pc);
    assert!((peak - expected).abs() < 1e-6, "{peak} vs {expected}");

    for row in 0..h {
        for col in w / 2..w {
            let d = direct_gaussian(&img, 2.0, 6, row, col);
            assert!((out.get(row, col) - d).abs() < 1e-9, "({row},{col})");
        }
    }
}

#[test]
fn disk_blur_matches_direct_average() {
    let img = Raster::from_fn(30, 20, |r, c| ((r * 41 + c * 13) % 97) as f64).unwrap();
    let spec = BlurSpec {
        kernel: BlurKernel::Disk { radius: 3 },
        region: Region::Rect {
            left: 5,
            top: 4,
            width: 12,
            height: 9,
        },
    };
    let out = blur_region(&img, &spec).unwrap();
    for row in 0..20 {
        for col in 0..30 {
            let inside = (4..13).contains(&row) && (5..17).contains(&col);
            let expected = if inside {
                let mut vals = Vec::new();
                for dy in -3i64..=3 {
                    for dx in -3i64..=3 {
                        if dy * dy + dx * dx <= 9 {
                            let r = (row as i64 + dy).clamp(0, 19) as usize;
                            let c = (col as i64 + dx).clamp(0, 29) as usize;
                            vals.push(img.get(r, c));
                        }
                    }
                }
                vals.iter().sum::<f64>() / vals.len() as f64
            } else {
                img.get(row, col)
            };
            assert!((out.get(row, col) - expected).abs() < 1e-9, "({row},{col})");
        }
    }
}

#[test]
fn right_region_pair_is_sharp_where_expected() {
    let img = Raster::from_fn(33, 17, |r, c| ((r * 29 + c * 53 + r * c) % 256) as f64).unwrap();
    let (a, b) = make_pair(&img, &BlurSpec::default()).unwrap();
    for row in 0..17 {
        for col in 0..33 {
            let v = img.get(row, col);
            if col >= 16 {
                assert_eq!(a.get(row, col), v);
            } else {
                assert_eq!(b.get(row, col), v);
            }
        }
    }
    let again = make_pair(&img, &BlurSpec::default()).unwrap();
    assert_eq!((a, b), again);
}

#[test]
fn fused_output_beats_both_sources_on_every_bundled_image() {
    let images = load_dataset(&default_dataset_dir()).unwrap();
    assert!(images.len() >= 10);
    let quant = QuantTable::for_quality(75);
    for img in &images {
        let (a, b) = prepare_pair(&img.ground_truth, &BlurSpec::default(), 75).unwrap();
        let fused = fuse(&a, &b, &FusionConfig::default()).unwrap();
        let fused = decode_fused(&fused, &quant).unwrap();
        let score = |x: &Raster| rmse(&img.ground_truth, x).unwrap();
        let pa = a.to_raster().quantized_to_u8();
        let pb = b.to_raster().quantized_to_u8();
        let (f, ea, eb) = (score(&fused), score(&pa), score(&pb));
        assert!(f < ea && f < eb, "{}: fused {f}, A {ea}, B {eb}", img.id);
    }
}
