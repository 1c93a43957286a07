use std::path::{Path, PathBuf};

use edgewatch_harness::{report, run_trial_blocking, Format, Output, ReportSpec, Scenario};

fn run_into(dir: &Path) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/near.toml");
    run_trial_blocking(&Scenario::load(&path).unwrap()).unwrap().write_artifacts(dir).unwrap();
}

fn spec(run: &Path, out: &Path, formats: Vec<Format>) -> ReportSpec {
    ReportSpec { run_dir: run.into(), out_dir: out.into(), outputs: Output::ALL.to_vec(), formats, cell_size_m: 25.0 }
}

#[test]
fn all_outputs_from_a_run() {
    let (run, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(run.path());
    let done = report(&spec(run.path(), out.path(), vec![Format::Csv, Format::Svg, Format::Png])).unwrap();
    assert!(done.warnings.is_empty(), "{:?}", done.warnings);
    assert_eq!(done.written.len(), 6 * 3);

    let read = |f: &str| std::fs::read_to_string(out.path().join(f)).unwrap();
    let heads = [
        ("bitrate.csv", "t_s,selected_bitrate_kbps"),
        ("stalls.csv", "t_s,stall_total_s"),
        ("qoe.csv", "t_s,mos,video_quality,stall_count,stall_total_s"),
        ("throughput_l3_l7.csv", "t_s,l3_mbps,l7_mbps"),
        ("rf.csv", "t_s,rsrp_dbm,rsrq_db,sinr_db,lat_deg,lon_deg"),
    ];
    for (f, h) in heads {
        let text = read(f);
        assert_eq!(text.lines().next(), Some(h), "{f}");
        assert!(text.lines().count() > 10, "{f}");
        let cols = h.split(',').count();
        assert!(text.lines().all(|l| l.split(',').count() == cols), "{f}");
    }
    let geo: serde_json::Value = serde_json::from_str(&read("coverage.geojson")).unwrap();
    assert_eq!(geo["type"], "FeatureCollection");
    assert!(!geo["features"].as_array().unwrap().is_empty());
    let png = std::fs::read(out.path().join("rf.png")).unwrap();
    assert_eq!(&png[..4], b"\x89PNG");
}

#[test]
fn reports_are_reproducible() {
    let (run, a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(run.path());
    report(&spec(run.path(), a.path(), vec![Format::Csv])).unwrap();
    report(&spec(run.path(), b.path(), vec![Format::Csv])).unwrap();
    for f in ["bitrate.csv", "stalls.csv", "qoe.csv", "throughput_l3_l7.csv", "rf.csv", "coverage.geojson"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_series_warns_and_keeps_going() {
    let (run, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(run.path());
    for entry in std::fs::read_dir(run.path().join("store")).unwrap() {
        let p = entry.unwrap().path();
        if p.file_name().unwrap().to_string_lossy().starts_with("qoe") {
            std::fs::remove_file(p).unwrap();
        }
    }
    let done = report(&spec(run.path(), out.path(), vec![Format::Csv])).unwrap();
    assert_eq!(done.warnings.len(), 1, "{:?}", done.warnings);
    assert!(done.warnings[0].starts_with("qoe"));
    assert!(out.path().join("bitrate.csv").exists());
    assert!(!out.path().join("qoe.csv").exists());
}

#[test]
fn not_a_run_directory() {
    let (run, out) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(report(&spec(run.path(), out.path(), vec![])).is_err());
}
