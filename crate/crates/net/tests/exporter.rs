use std::io::Write;

use edgewatch_core::radio::nmea_checksum;
use edgewatch_core::RadioSource;
use edgewatch_net::exporter::{collect, Sources};

fn nmea(body: &str) -> String {
    format!("${body}*{:02X}", nmea_checksum(body))
}

fn file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
    p
}

#[test]
fn modem_and_gps_logs_join_within_half_a_second() {
    let dir = tempfile::tempdir().unwrap();
    let modem = "0.0 #RFSTS: \"00101\",3750,-85,-11,18,x\n1.0 #RFSTS: \"00101\",3750,-86,-11,17\nOK\n5.0 #RFSTS: \"00101\",3750,-87,-12,16\n";
    let gps = format!(
        "0.2 {}\n1.4 {}\n0.5 $GPGGA,120000,4315.642,N,00158.934,W,1,08,0.9,10,M,,M,,*00\n",
        nmea("GPGGA,120000.00,4315.642,N,00158.934,W,1,08,0.9,10.0,M,50.0,M,,"),
        nmea("GPRMC,120001.00,A,4315.700,N,00158.900,W,0.5,90.0,011024,,"),
    );
    let src = Sources {
        modem_log: Some(file(&dir, "modem.log", modem)),
        nmea: Some(file(&dir, "gps.nmea", &gps)),
        rate_hz: 1.0,
        ..Default::default()
    };
    let c = collect(&src).unwrap();
    assert_eq!(c.radio.len(), 3);
    assert_eq!(c.checksum_errors, 1);
    let p0 = c.radio[0].position.unwrap();
    assert!((p0.lat - 43.2607).abs() < 1e-4 && (p0.lon + 1.98223).abs() < 1e-4);
    assert!(c.radio[1].position.is_some());
    assert!(c.radio[2].position.is_none());
    assert!(c.radio.iter().all(|s| s.source == RadioSource::ModemLog));
}

#[test]
fn trace_and_counters_are_read_together() {
    let dir = tempfile::tempdir().unwrap();
    let trace = "t_s,lat_deg,lon_deg,rsrp_dbm,rsrq_db,sinr_db\n0,43.26,-1.98,-80,-10,20\n1,43.26,-1.98,-81,-10,19\n";
    let counters = "t_s,rx_bytes,tx_bytes\n0,100,0\n1,1250100,500\n";
    let src = Sources {
        trace: Some(file(&dir, "trace.csv", trace)),
        iface_counters: Some(file(&dir, "counters.csv", counters)),
        rate_hz: 1.0,
        ..Default::default()
    };
    let c = collect(&src).unwrap();
    assert_eq!(c.radio.len(), 2);
    assert_eq!(c.radio[0].source, RadioSource::TraceFile);
    assert_eq!(c.link.len(), 1);
    assert!((c.link[0].rx_throughput_mbps - 10.0).abs() < 1e-9);
}

#[test]
fn zero_rate_is_refused() {
    assert!(collect(&Sources::default()).is_err());
}
