use std::collections::BTreeMap;

use dctfuse::bench::{
    default_dataset_dir, emit_report, emit_sweep_report, load_dataset, run_benchmark, BenchConfig,
    ReportFormat, CSV_HEADER, MEAN_ROW_ID,
};
use dctfuse::FusionMethod;

fn config() -> BenchConfig {
    let images = load_dataset(&default_dataset_dir()).unwrap();
    BenchConfig::new(images.into_iter().take(4).collect())
}

fn csv(cfg: &BenchConfig) -> String {
    String::from_utf8(emit_report(&run_benchmark(cfg).unwrap(), ReportFormat::Csv)).unwrap()
}

#[test]
fn csv_means_match_independent_reaggregation() {
    let text = csv(&config());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));

    let mut sums: BTreeMap<String, [f64; 3]> = BTreeMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut reported: BTreeMap<String, [f64; 3]> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 7, "{line}");
        assert_eq!((f[5], f[6]), ("0", "75"));
        let vals = [f[2], f[3], f[4]].map(|v| v.parse::<f64>().unwrap());
        if f[0] == MEAN_ROW_ID {
            reported.insert(f[1].to_string(), vals);
        } else {
            let s = sums.entry(f[1].to_string()).or_default();
            for k in 0..3 {
                s[k] += vals[k];
            }
            *counts.entry(f[1].to_string()).or_default() += 1;
        }
    }
    assert_eq!(reported.len(), FusionMethod::ALL.len());
    for (method, mean) in &reported {
        assert_eq!(counts[method], 4);
        for k in 0..3 {
            let ours = sums[method][k] / 4.0;
            assert!(
                (ours - mean[k]).abs() < 1e-12,
                "{method} column {k}: {ours} vs {}",
                mean[k]
            );
        }
    }
}

#[test]
fn reports_are_deterministic_and_independent_of_threading() {
    let mut cfg = config();
    let first = csv(&cfg);
    assert_eq!(first, csv(&cfg));
    cfg.parallel = false;
    assert_eq!(first, csv(&cfg));
}

#[test]
fn rows_sorted_by_pair_then_method() {
    let run = run_benchmark(&config()).unwrap();
    let keys: Vec<(String, String)> = run
        .rows
        .iter()
        .map(|r| (r.pair_id.clone(), r.method.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn sweep_report_has_one_header_and_every_quality() {
    let mut cfg = config();
    cfg.methods = vec![FusionMethod::Sf, FusionMethod::SfCv];
    let runs: Vec<_> = [50, 90]
        .iter()
        .map(|&q| {
            cfg.quality = q;
            run_benchmark(&cfg).unwrap()
        })
        .collect();
    let text = String::from_utf8(emit_sweep_report(&runs, ReportFormat::Csv)).unwrap();
    assert_eq!(text.matches(CSV_HEADER).count(), 1);
    for q in ["50", "90"] {
        let n = text
            .lines()
            .filter(|l| l.ends_with(&format!(",{q}")))
            .count();
        assert_eq!(n, 4 * 2 + 2, "quality {q}");
    }
}
