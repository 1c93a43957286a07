use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use edgewatch_core::parse_mpd;
use edgewatch_net::Origin;

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn edgewatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgewatch"))
        .args(args)
        .env_remove("EDGEWATCH_CONFIG")
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

/// A server subcommand, killed on drop.
struct Daemon {
    child: Child,
    base: String,
}

impl Daemon {
    fn start(args: &[&str]) -> Daemon {
        let mut child = Command::new(env!("CARGO_BIN_EXE_edgewatch"))
            .args(args)
            .env_remove("EDGEWATCH_CONFIG")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let base = line.trim().strip_prefix("listening on ").unwrap_or_else(|| panic!("{line:?}")).to_string();
        Daemon { child, base }
    }

    fn addr(&self) -> String {
        self.base.trim_start_matches("http://").trim_end_matches('/').to_string()
    }

    fn get(&self, path: &str) -> (u16, Vec<u8>) {
        http_get(&self.addr(), path)
    }

    fn terminate(mut self) -> std::process::ExitStatus {
        let pid = self.child.id().to_string();
        assert!(Command::new("kill").args(["-TERM", &pid]).status().unwrap().success());
        self.child.wait().unwrap()
    }
}

impl Drop for Daemon {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn http_get(addr: &str, path: &str) -> (u16, Vec<u8>) {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut raw = Vec::new();
    s.read_to_end(&mut raw).unwrap();
    let split = raw.windows(4).position(|w| w == b"\r\n\r\n").unwrap();
    let head = text(&raw[..split]);
    let status = head.split(' ').nth(1).unwrap().parse().unwrap();
    let mut body = raw[split + 4..].to_vec();
    if head.to_ascii_lowercase().contains("transfer-encoding: chunked") {
        body = dechunk(&body);
    }
    (status, body)
}

fn dechunk(mut b: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    loop {
        let eol = b.windows(2).position(|w| w == b"\r\n").unwrap();
        let n = usize::from_str_radix(text(&b[..eol]).trim(), 16).unwrap();
        if n == 0 {
            return out;
        }
        out.extend_from_slice(&b[eol + 2..eol + 2 + n]);
        b = &b[eol + 4 + n..];
    }
}

fn wait_for(what: &str, mut check: impl FnMut() -> bool) {
    let start = Instant::now();
    while !check() {
        assert!(start.elapsed() < Duration::from_secs(10), "timed out waiting for {what}");
        std::thread::sleep(Duration::from_millis(50));
    }
}

#[test]
fn help_exits_zero() {
    let out = edgewatch(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let help = text(&out.stdout);
    for cmd in ["serve", "export", "trial", "report", "coverage"] {
        assert!(help.contains(cmd), "{help}");
    }
    for sub in [&["serve", "proxy", "--help"][..], &["serve", "fusion", "--help"], &["export", "radio", "--help"]] {
        assert_eq!(edgewatch(sub).status.code(), Some(0), "{sub:?}");
    }
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = edgewatch(&["serve", "dashboard"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("dashboard"));
}

#[test]
fn unknown_flag_suggests_the_close_one() {
    let out = edgewatch(&["coverage", "--trace", "t.csv", "--out", "m.geojson", "--cell-size", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("--cell-size-m"), "{}", text(&out.stderr));
}

#[test]
fn proxy_without_origin_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_edgewatch"))
        .args(["serve", "proxy", "--listen", "127.0.0.1:0"])
        .env_remove("EDGEWATCH_ORIGIN")
        .env_remove("EDGEWATCH_CONFIG")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("origin"));
}

#[test]
fn report_on_non_run_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgewatch(&["report", "--run", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
}

#[test]
fn trial_then_report_emits_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let scenario = workspace().join("scenarios/near.toml");
    let out = edgewatch(&["trial", "run", "--scenario", scenario.to_str().unwrap(), "--seed", "7", "--out", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(run.join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);

    let out = edgewatch(&["report", "--run", run.to_str().unwrap(), "--format", "csv,svg"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let report = run.join("report");
    for name in ["bitrate", "stalls", "qoe", "throughput_l3_l7", "rf"] {
        assert!(report.join(format!("{name}.csv")).is_file(), "{name}.csv");
    }
    for name in ["bitrate", "stalls", "qoe", "throughput_l3_l7", "rf", "coverage"] {
        assert!(report.join(format!("{name}.svg")).is_file(), "{name}.svg");
    }
    assert!(report.join("coverage.geojson").is_file());
    let l3l7 = std::fs::read_to_string(report.join("throughput_l3_l7.csv")).unwrap();
    assert!(l3l7.starts_with("t_s,l3_mbps,l7_mbps\n"));

    let map = dir.path().join("maps/near.geojson");
    let out = edgewatch(&["coverage", "--trace", run.join("trace.csv").to_str().unwrap(), "--out", map.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let geo: serde_json::Value = serde_json::from_slice(&std::fs::read(&map).unwrap()).unwrap();
    assert_eq!(geo["type"], "FeatureCollection");
    assert!(!geo["features"].as_array().unwrap().is_empty());
}

#[test]
fn exporter_feeds_fusion_and_store_persists() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("store");
    let fusion = Daemon::start(&["serve", "fusion", "--listen", "127.0.0.1:0", "--data-dir", data.to_str().unwrap()]);

    let log = dir.path().join("modem.log");
    std::fs::write(
        &log,
        "1700000000 #RFSTS: \"21407\",3700,-88,-11,14,0\n\
         OK\n\
         1700000000 #RFSTS: \"21407\",3700,abc,-12,9\n\
         1700000001 #RFSTS: \"21407\",3700,-91,-12,9,0\n",
    )
    .unwrap();
    let out = edgewatch(&["export", "radio", "--modem-log", log.to_str().unwrap(), "--fusion-url", &fusion.base]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("radio samples: 2"), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("rejected lines: 1"));

    let (status, body) = fusion.get("/metrics");
    assert_eq!(status, 200);
    let page = text(&body);
    assert!(page.contains("radio_rsrp_dbm{session=\"\"} -91 1700000001000"), "{page}");

    assert!(fusion.terminate().success());
    let again = Daemon::start(&["serve", "fusion", "--listen", "127.0.0.1:0", "--data-dir", data.to_str().unwrap()]);
    assert!(text(&again.get("/metrics").1).contains("radio_rsrp_dbm{session=\"\"} -91"));
}

#[test]
fn missing_config_file_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_edgewatch"))
        .args(["serve", "fusion", "--listen", "127.0.0.1:0"])
        .env("EDGEWATCH_CONFIG", dir.path().join("absent.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("absent.toml"));
}

#[test]
fn proxy_records_reach_fusion() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let fixture = std::fs::read(workspace().join("fixtures/mpd/seconds_that_count.mpd")).unwrap();
    let origin = rt.block_on(Origin::bind(&parse_mpd(&fixture).unwrap())).unwrap();

    let fusion = Daemon::start(&["serve", "fusion", "--listen", "127.0.0.1:0"]);
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("edgewatch.toml");
    std::fs::write(&config, format!("[proxy]\norigin = \"{}\"\nsession_timeout_s = 5.0\n", origin.server.base_url())).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_edgewatch"))
        .args(["--config", config.to_str().unwrap(), "serve", "proxy", "--listen", "127.0.0.1:0", "--fusion-url", &fusion.base])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let proxy = Daemon { base: line.trim().trim_start_matches("listening on ").to_string(), child };

    let (status, mpd) = proxy.get(origin.mpd_url.path());
    assert_eq!(status, 200);
    let rewritten = parse_mpd(&mpd).unwrap();
    assert_eq!(rewritten.base_url().host_str(), Some("127.0.0.1"));
    assert_eq!(rewritten.base_url().port().map(|p| p.to_string()), proxy.addr().split(':').nth(1).map(String::from));

    let path = origin.segment_path("rep1", 1).unwrap();
    let (status, body) = proxy.get(&path);
    assert_eq!(status, 200);
    assert!(!body.is_empty());

    wait_for("segment record in store", || {
        let records: serde_json::Value = serde_json::from_slice(&fusion.get("/segments").1).unwrap();
        records.as_array().is_some_and(|r| r.len() == 1)
    });
    let records: Vec<serde_json::Value> = serde_json::from_slice(&fusion.get("/segments").1).unwrap();
    assert_eq!(records[0]["origin_status"], 200);
    assert_eq!(records[0]["bytes"], body.len() as u64);
    assert_eq!(records[0]["rep_id"], "rep1");
    assert!(records[0]["session_id"].as_str().is_some_and(|s| !s.starts_with("orphan-")));
    assert!(proxy.terminate().success());
}

