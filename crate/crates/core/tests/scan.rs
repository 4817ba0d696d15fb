use std::fs;

use entclass::commands::{cmd_classify, cmd_scan, ClassifyOptions};
use entclass::criteria::InequalityId;
use entclass::families::ghz_w_noise_family;
use entclass::optimizer::Budget;
use entclass::scan::{bisect_threshold, run_scan, scan_point, thresholds, write_csv, ScanOptions, CSV_HEADER};
use entclass::statefile::write_density;

fn opts(step: f64) -> ScanOptions {
    ScanOptions { step, ..Default::default() }
}

#[test]
fn edge_thresholds_match_closed_forms() {
    let ghz_in =
        bisect_threshold(|a| Ok(InequalityId::In.lhs(&ghz_w_noise_family(a, 0.0)?)? > 0.0), 0.0, 1.0, 1e-9).unwrap();
    assert!((ghz_in - thresholds::GHZ_IN).abs() < 1e-6, "{ghz_in}");
    let w_i2 =
        bisect_threshold(|b| Ok(InequalityId::I2.lhs(&ghz_w_noise_family(0.0, b)?)? > 0.0), 0.0, 1.0, 1e-9).unwrap();
    assert!((w_i2 - thresholds::W_I2).abs() < 1e-6, "{w_i2}");
    let w_gme =
        bisect_threshold(|b| Ok(InequalityId::Gme.lhs(&ghz_w_noise_family(0.0, b)?)? > 0.0), 0.0, 1.0, 1e-9).unwrap();
    assert!((w_gme - thresholds::W_GME).abs() < 1e-6, "{w_gme}");
}

#[test]
fn ghz_ray_violation_is_monotone() {
    let points = run_scan(&opts(0.01)).unwrap();
    let ray: Vec<_> = points.iter().filter(|p| p.beta == 0.0).collect();
    assert_eq!(ray.len(), 101);
    let first = ray.iter().position(|p| p.violates(InequalityId::In)).unwrap();
    assert!(ray[first..].iter().all(|p| p.violates(InequalityId::In)));
    assert!(ray[..first].iter().all(|p| !p.violates(InequalityId::In)));
    assert!(ray[first].alpha > thresholds::GHZ_IN && ray[first - 1].alpha <= thresholds::GHZ_IN);
}

#[test]
fn output_is_independent_of_thread_count() {
    let one = run_scan(&ScanOptions { threads: Some(1), ..opts(0.05) }).unwrap();
    let four = run_scan(&ScanOptions { threads: Some(4), ..opts(0.05) }).unwrap();
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_csv(&one, &mut a).unwrap();
    write_csv(&four, &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_rows_agree_with_classify() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("scan.csv");
    cmd_scan(&opts(0.1), &csv_path, &mut Vec::new()).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let classify = ClassifyOptions { optimize: false, tolerance: 1e-9, seed: 0, budget: Budget::default() };
    let mut rows = 0;
    for record in reader.records() {
        let r = record.unwrap();
        let alpha: f64 = r[0].parse().unwrap();
        let beta: f64 = r[1].parse().unwrap();
        let state_path = dir.path().join("point.json");
        write_density(&state_path, &ghz_w_noise_family(alpha, beta).unwrap()).unwrap();
        let mut out = Vec::new();
        cmd_classify(&state_path, &classify, &mut out).unwrap();
        let report: serde_json::Value = serde_json::from_slice(&out).unwrap();
        for rep in report["reports"].as_array().unwrap() {
            let col = match rep["inequality"].as_str().unwrap() {
                "In" => 6,
                "I2" => 7,
                "InMinus1" => 8,
                "GME" => 9,
                other => panic!("{other}"),
            };
            let flag = rep["violated"].as_bool().unwrap();
            assert_eq!(&r[col], if flag { "1" } else { "0" }, "({alpha}, {beta}) column {col}");
        }
        rows += 1;
    }
    assert_eq!(rows, 66);
}

#[test]
fn repeated_scans_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    cmd_scan(&opts(0.05), &a, &mut Vec::new()).unwrap();
    cmd_scan(&opts(0.05), &b, &mut Vec::new()).unwrap();
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn gme_only_band_on_the_w_edge() {
    let o = ScanOptions::default();
    let inside = scan_point(0.0, 0.6, &o, 0).unwrap();
    assert!(inside.violates(InequalityId::Gme) && !inside.violates(InequalityId::I2));
    let below = scan_point(0.0, 0.5, &o, 0).unwrap();
    assert!(!below.violates(InequalityId::Gme));
}

#[test]
fn optimized_scan_never_lowers_lhs() {
    let plain = scan_point(0.3, 0.4, &ScanOptions::default(), 0).unwrap();
    let budget = Budget { restarts: 2, max_evals: 200 };
    let opt = scan_point(0.3, 0.4, &ScanOptions { optimize: true, budget, ..Default::default() }, 0).unwrap();
    for k in 0..4 {
        assert!(opt.lhs[k] >= plain.lhs[k]);
    }
}
