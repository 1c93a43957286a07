//! Drive-trace CSV: the interchange format between field logs, the
//! simulator and replay.
//!
//! ```text
//! t_s,lat_deg,lon_deg,rsrp_dbm,rsrq_db,sinr_db
//! 0.000,43.290500,-1.987500,-71.25,-6.10,22.24
//! ```

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{GeoPoint, RadioSample, RadioSource};

pub const TRACE_HEADER: [&str; 6] = ["t_s", "lat_deg", "lon_deg", "rsrp_dbm", "rsrq_db", "sinr_db"];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Schema { line: u64, reason: String },
}

pub fn read_drive_trace(path: impl AsRef<Path>) -> Result<Vec<RadioSample>, TraceError> {
    read_drive_trace_from(std::fs::File::open(path)?)
}

pub fn read_drive_trace_from<R: Read>(reader: R) -> Result<Vec<RadioSample>, TraceError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut out: Vec<RadioSample> = Vec::new();
    let mut header_seen = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| TraceError::Schema {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if !header_seen {
            if rec.iter().ne(TRACE_HEADER.iter().copied()) {
                return Err(TraceError::Schema {
                    line,
                    reason: format!("header must be {}", TRACE_HEADER.join(",")),
                });
            }
            header_seen = true;
            continue;
        }
        if rec.len() != TRACE_HEADER.len() {
            return Err(TraceError::Schema { line, reason: format!("expected 6 fields, found {}", rec.len()) });
        }
        let mut v = [0.0f64; 6];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = rec[i].parse().map_err(|_| TraceError::Schema {
                line,
                reason: format!("{} {:?} is not a number", TRACE_HEADER[i], &rec[i]),
            })?;
        }
        let sample = RadioSample {
            t: v[0],
            rsrp_dbm: v[3],
            rsrq_db: v[4],
            sinr_db: v[5],
            position: Some(GeoPoint { lat: v[1], lon: v[2] }),
            source: RadioSource::TraceFile,
        };
        sample.validate().map_err(|e| TraceError::Schema { line, reason: e.to_string() })?;
        if let Some(prev) = out.last() {
            if sample.t <= prev.t {
                return Err(TraceError::Schema {
                    line,
                    reason: format!("t_s {} does not increase (previous {})", sample.t, prev.t),
                });
            }
        }
        out.push(sample);
    }
    Ok(out)
}

/// Write samples in canonical form. Samples without a position are skipped.
pub fn write_drive_trace<W: Write>(mut w: W, samples: &[RadioSample]) -> std::io::Result<()> {
    writeln!(w, "{}", TRACE_HEADER.join(","))?;
    for s in samples {
        let Some(p) = s.position else { continue };
        writeln!(
            w,
            "{:.3},{:.6},{:.6},{:.2},{:.2},{:.2}",
            s.t, p.lat, p.lon, s.rsrp_dbm, s.rsrq_db, s.sinr_db
        )?;
    }
    Ok(())
}
