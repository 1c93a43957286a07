//! UE-side collection of radio, position and interface-counter samples.

use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::time::Duration;

use edgewatch_core::radio::{
    join_positions, parse_modem_status_line, parse_nmea, read_drive_trace, sample_link, CounterWidth, Counters,
    GeoPoint, LineParse, LinkSample, RadioSample, RadioSource, RfReading, TraceError,
};
use serde::Deserialize;
use thiserror::Error;

use crate::publisher::Publisher;

/// Radio readings and GPS fixes are paired when this close in time.
pub const GPS_JOIN_TOLERANCE_S: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("{path}:{line}: {reason}")]
    Counters { path: PathBuf, line: u64, reason: String },
    #[error("rate must be positive, got {0}")]
    Rate(f64),
}

#[derive(Debug, Clone, Default)]
pub struct Sources {
    pub trace: Option<PathBuf>,
    pub modem_log: Option<PathBuf>,
    pub nmea: Option<PathBuf>,
    pub iface_counters: Option<PathBuf>,
    /// Cadence assumed for lines that carry no timestamp.
    pub rate_hz: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Collected {
    pub radio: Vec<RadioSample>,
    pub link: Vec<LinkSample>,
    /// Modem lines with an out-of-range or malformed field.
    pub rejected_lines: usize,
    pub checksum_errors: usize,
}

fn open(path: &Path) -> Result<std::fs::File, ExportError> {
    std::fs::File::open(path).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}

/// Timestamped RF readings from a modem log. Lines without a timestamp are
/// placed at `ordinal / rate_hz`, counting only status lines.
pub fn read_modem_log<R: Read>(reader: R, rate_hz: f64) -> std::io::Result<(Vec<(f64, RfReading)>, usize)> {
    let mut out = Vec::new();
    let mut rejected = 0;
    let mut ordinal = 0u64;
    for line in BufReader::new(reader).lines() {
        match parse_modem_status_line(&line?) {
            Ok(LineParse::Reading { t, rf }) => {
                out.push((t.unwrap_or(ordinal as f64 / rate_hz), rf));
                ordinal += 1;
            }
            Ok(LineParse::Skip) => {}
            Err(e) => {
                tracing::debug!(error = %e, "modem line rejected");
                rejected += 1;
                ordinal += 1;
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((out, rejected))
}

/// Timestamped fixes from an NMEA stream. A fix takes its log timestamp if
/// present, else its UTC time relative to the first fix, else its ordinal
/// at `rate_hz`.
pub fn read_nmea_log<R: Read>(reader: R, rate_hz: f64) -> std::io::Result<(Vec<(f64, GeoPoint)>, usize)> {
    let mut out = Vec::new();
    let mut bad = 0;
    let mut first_utc = None;
    for line in BufReader::new(reader).lines() {
        match parse_nmea(&line?) {
            Ok(Some(fix)) => {
                let ordinal = out.len() as f64 / rate_hz;
                let t = match (fix.log_t, fix.utc_s) {
                    (Some(t), _) => t,
                    (None, Some(u)) => {
                        let u0 = *first_utc.get_or_insert(u);
                        // Midnight rollover.
                        (u - u0).rem_euclid(86_400.0)
                    }
                    (None, None) => ordinal,
                };
                out.push((t, fix.position));
            }
            Ok(None) => {}
            Err(_) => bad += 1,
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((out, bad))
}

#[derive(Debug, Deserialize)]
struct CounterRow {
    t_s: f64,
    rx_bytes: u64,
    tx_bytes: u64,
}

/// L3 samples from cumulative counter snapshots (`t_s,rx_bytes,tx_bytes`).
pub fn read_counters<R: Read>(reader: R, path: &Path) -> Result<Vec<LinkSample>, ExportError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut prev: Option<(f64, Counters)> = None;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CounterRow>().enumerate() {
        let line = i as u64 + 2;
        let err = |reason: String| ExportError::Counters { path: path.to_path_buf(), line, reason };
        let row = row.map_err(|e| err(e.to_string()))?;
        let curr = Counters { rx_bytes: row.rx_bytes, tx_bytes: row.tx_bytes, width: CounterWidth::Bits64 };
        if let Some((t0, c0)) = prev {
            let s = sample_link(&c0, &curr, row.t_s, row.t_s - t0).map_err(|e| err(e.to_string()))?;
            out.push(s);
        }
        prev = Some((row.t_s, curr));
    }
    Ok(out)
}

pub fn collect(src: &Sources) -> Result<Collected, ExportError> {
    if !(src.rate_hz > 0.0 && src.rate_hz.is_finite()) {
        return Err(ExportError::Rate(src.rate_hz));
    }
    let mut out = Collected::default();
    if let Some(path) = &src.trace {
        out.radio.extend(read_drive_trace(path)?);
    }
    if let Some(path) = &src.modem_log {
        let io = |source| ExportError::Io { path: path.clone(), source };
        let (readings, rejected) = read_modem_log(open(path)?, src.rate_hz).map_err(io)?;
        let fixes = match &src.nmea {
            Some(nmea) => {
                let (fixes, bad) = read_nmea_log(open(nmea)?, src.rate_hz)
                    .map_err(|source| ExportError::Io { path: nmea.clone(), source })?;
                out.checksum_errors = bad;
                fixes
            }
            None => Vec::new(),
        };
        out.rejected_lines = rejected;
        out.radio.extend(join_positions(&readings, &fixes, GPS_JOIN_TOLERANCE_S, RadioSource::ModemLog));
    }
    if let Some(path) = &src.iface_counters {
        out.link = read_counters(open(path)?, path)?;
    }
    Ok(out)
}

/// Queue everything collected for delivery, radio first.
pub fn publish_all(publisher: &Publisher, c: &Collected) {
    use edgewatch_core::fusion::Observation;
    for s in &c.radio {
        publisher.publish(Observation::Radio(s.clone()));
    }
    for s in &c.link {
        publisher.publish(Observation::Link(s.clone()));
    }
}

fn read_counter(iface: &str, name: &str) -> std::io::Result<u64> {
    let path = format!("/sys/class/net/{iface}/statistics/{name}");
    std::fs::read_to_string(&path)?
        .trim()
        .parse()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{path}: {e}")))
}

fn iface_counters(iface: &str) -> std::io::Result<Counters> {
    Ok(Counters {
        rx_bytes: read_counter(iface, "rx_bytes")?,
        tx_bytes: read_counter(iface, "tx_bytes")?,
        width: CounterWidth::Bits64,
    })
}

/// Sample a network interface's counters every `1 / rate_hz` seconds and
/// publish one [`LinkSample`] per tick until `ticks` samples are sent
/// (forever when `None`). Timestamps are seconds since the first snapshot.
pub async fn sample_iface(
    iface: &str,
    rate_hz: f64,
    ticks: Option<u64>,
    publisher: &Publisher,
) -> std::io::Result<u64> {
    use edgewatch_core::fusion::Observation;
    let started = tokio::time::Instant::now();
    let mut tick = tokio::time::interval(Duration::from_secs_f64(1.0 / rate_hz));
    tick.tick().await;
    let mut prev = (0.0, iface_counters(iface)?);
    let mut sent = 0;
    while ticks.map_or(true, |n| sent < n) {
        tick.tick().await;
        let t = started.elapsed().as_secs_f64();
        let curr = iface_counters(iface)?;
        if let Ok(s) = sample_link(&prev.1, &curr, t, t - prev.0) {
            publisher.publish(Observation::Link(s));
            sent += 1;
        }
        prev = (t, curr);
    }
    Ok(sent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modem_lines_without_time_follow_rate() {
        let log = "AT#RFSTS\n#RFSTS: \"00101\",3750,-85,-11,18\nOK\n#RFSTS: \"00101\",3750,-90,-12,15\n#RFSTS: \"00101\",3750,-200,-12,15\n";
        let (r, rejected) = read_modem_log(log.as_bytes(), 2.0).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].0, 0.0);
        assert_eq!(r[1].0, 0.5);
        assert_eq!(r[1].1.rsrp_dbm, -90.0);
        assert_eq!(rejected, 1);
    }

    #[test]
    fn counters_become_one_second_samples() {
        let csv = "t_s,rx_bytes,tx_bytes\n0,0,0\n1,12500000,1000\n2,12500000,2000\n";
        let s = read_counters(csv.as_bytes(), Path::new("c.csv")).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0].rx_throughput_mbps - 100.0).abs() < 1e-9);
        assert_eq!(s[1].rx_throughput_mbps, 0.0);
        assert_eq!(s[1].window_s, 1.0);
    }

    #[test]
    fn counters_report_bad_line() {
        let csv = "t_s,rx_bytes,tx_bytes\n0,0,0\n0,10,0\n";
        match read_counters(csv.as_bytes(), Path::new("c.csv")) {
            Err(ExportError::Counters { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
