use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dctfuse::bench::default_dataset_dir;
use dctfuse::grid::block_levels;
use dctfuse::jpeg_codec::{emit_pgm_raster, parse_pgm_raster};
use dctfuse::{parse_jpeg, Raster};

fn dctfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dctfuse"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn camera() -> PathBuf {
    default_dataset_dir().join("camera.pgm")
}

/// Generates a default pair for camera.pgm into `dir`.
fn generate(dir: &Path) {
    let out = dctfuse(&["generate", s(&camera()), "-o", s(dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

fn evaluate(ground: &Path, images: &[&Path]) -> Vec<(String, f64)> {
    let mut args = vec!["evaluate", s(ground)];
    args.extend(images.iter().map(|p| s(p)));
    let out = dctfuse(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn generate_fuse_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair");
    generate(&pair);
    for f in ["A.jpg", "B.jpg", "A.pgm", "B.pgm", "ground.pgm"] {
        assert!(pair.join(f).is_file(), "{f} missing");
    }

    // A is sharp on the right half
    let truth = parse_pgm_raster(&std::fs::read(camera()).unwrap()).unwrap();
    let a = parse_pgm_raster(&std::fs::read(pair.join("A.pgm")).unwrap()).unwrap();
    for row in 0..truth.height() {
        for col in truth.width() / 2..truth.width() {
            assert_eq!(a.get(row, col), truth.get(row, col));
        }
    }

    let fused = dir.path().join("fused.jpg");
    let out = dctfuse(&[
        "fuse",
        s(&pair.join("A.jpg")),
        s(&pair.join("B.jpg")),
        "-o",
        s(&fused),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let scores = evaluate(
        &pair.join("ground.pgm"),
        &[&pair.join("A.jpg"), &pair.join("B.jpg"), &fused],
    );
    assert!(
        scores[2].1 < scores[0].1 && scores[2].1 < scores[1].1,
        "{scores:?}"
    );
}

#[test]
fn self_fusion_reproduces_levels() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path());
    let a = dir.path().join("A.jpg");
    let out_path = dir.path().join("AA.jpg");
    for method in ["sf", "sf_cv", "average", "contrast", "variance", "ac_max"] {
        let out = dctfuse(&["fuse", s(&a), s(&a), "--method", method, "-o", s(&out_path)]);
        assert_eq!(code(&out), 0, "{method}: {}", stderr(&out));
        let original = parse_jpeg(&std::fs::read(&a).unwrap()).unwrap();
        let fused = parse_jpeg(&std::fs::read(&out_path).unwrap()).unwrap();
        assert_eq!(
            block_levels(&fused).unwrap(),
            block_levels(&original).unwrap(),
            "{method}"
        );
    }
}

#[test]
fn tiny_image_generates_tiny_jpegs() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("tiny.pgm");
    let tiny = Raster::from_fn(8, 8, |r, c| (r * 30 + c) as f64).unwrap();
    std::fs::write(&src, emit_pgm_raster(&tiny)).unwrap();
    let out = dctfuse(&["generate", s(&src), "-o", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["A.jpg", "B.jpg"] {
        let img = parse_jpeg(&std::fs::read(dir.path().join("o").join(f)).unwrap()).unwrap();
        assert_eq!((img.width(), img.height()), (8, 8));
    }
}

#[test]
fn inspect_writes_block_maps() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path());
    let (a, b) = (dir.path().join("A.jpg"), dir.path().join("B.jpg"));
    let map = dir.path().join("w.pgm");
    let out = dctfuse(&["inspect", s(&a), s(&b), "-o", s(&map)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let refined =
        parse_pgm_raster(&std::fs::read(dir.path().join("w_refined.pgm")).unwrap()).unwrap();
    let w = parse_pgm_raster(&std::fs::read(&map).unwrap()).unwrap();
    assert_eq!((w.width(), w.height()), (32, 32));
    for m in [&w, &refined] {
        let count = |cols: std::ops::Range<usize>, v: f64| {
            (0..32)
                .flat_map(|r| cols.clone().map(move |c| (r, c)))
                .filter(|&(r, c)| m.get(r, c) == v)
                .count()
        };
        // B is sharp on the left, A on the right
        assert!(count(0..16, 0.0) > count(0..16, 255.0));
        assert!(count(16..32, 255.0) > count(16..32, 0.0));
    }

    let same = dir.path().join("same.pgm");
    let out = dctfuse(&["inspect", s(&a), s(&a), "-o", s(&same)]);
    assert_eq!(code(&out), 0);
    let same = parse_pgm_raster(&std::fs::read(&same).unwrap()).unwrap();
    assert!(same.data().iter().all(|&v| v == 128.0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path());
    let a = dir.path().join("A.jpg");
    let out_path = dir.path().join("x.jpg");

    let missing = dir.path().join("missing.jpg");
    let out = dctfuse(&["fuse", s(&missing), s(&a), "-o", s(&out_path)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing.jpg"));

    let truncated = dir.path().join("cut.jpg");
    let bytes = std::fs::read(&a).unwrap();
    std::fs::write(&truncated, &bytes[..bytes.len() - 2]).unwrap();
    let out = dctfuse(&["fuse", s(&truncated), s(&a), "-o", s(&out_path)]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(
        msg.contains("cut.jpg") && msg.contains(&format!("byte {}", bytes.len() - 2)),
        "{msg}"
    );

    let small = dir.path().join("small");
    let src = dir.path().join("s.pgm");
    std::fs::write(&src, emit_pgm_raster(&Raster::filled(16, 16, 9.0).unwrap())).unwrap();
    assert_eq!(code(&dctfuse(&["generate", s(&src), "-o", s(&small)])), 0);
    let out = dctfuse(&["fuse", s(&a), s(&small.join("A.jpg")), "-o", s(&out_path)]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    let map = dir.path().join("m.pgm");
    for t in ["-1", "-0.5"] {
        let out = dctfuse(&["inspect", s(&a), s(&a), "--threshold", t, "-o", s(&map)]);
        assert_eq!(code(&out), 4, "threshold {t}");
    }
    assert_eq!(
        code(&dctfuse(&[
            "fuse",
            s(&a),
            s(&a),
            "--method",
            "median",
            "-o",
            s(&out_path)
        ])),
        4
    );
    assert_eq!(code(&dctfuse(&["frobnicate"])), 4);
    assert_eq!(code(&dctfuse(&["fuse", s(&a)])), 4);
    assert_eq!(code(&dctfuse(&["--help"])), 0);
    assert_eq!(code(&dctfuse(&["--version"])), 0);
}

#[test]
fn bench_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("imgs");
    std::fs::create_dir(&images).unwrap();
    for name in ["camera.pgm", "moon.pgm"] {
        std::fs::copy(default_dataset_dir().join(name), images.join(name)).unwrap();
    }
    let run = || {
        let out = dctfuse(&[
            "bench",
            "--images",
            s(&images),
            "--format",
            "csv",
            "--quality",
            "50,90",
            "--methods",
            "sf,sf_cv",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    // header + 2 qualities × (2 pairs × 2 methods + 2 means)
    assert_eq!(first.lines().count(), 1 + 2 * 6);

    let report = dir.path().join("r.txt");
    let out = dctfuse(&[
        "bench",
        "--images",
        s(&images),
        "--serial",
        "-o",
        s(&report),
    ]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&report)
        .unwrap()
        .contains("DCT + SF + CV"));
}
