//! UE-side physical-layer (L1), position and link-layer (L3) observations.

mod link;
mod modem;
mod nmea;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, check_time, FieldError};

pub use link::{sample_link, CounterWidth, Counters, LinkError, LinkSample};
pub use modem::{parse_modem_status_line, LineParse, RfReading, RFSTS_PREFIX};
pub use nmea::{nmea_checksum, parse_nmea, NmeaError, NmeaFix};
pub use trace::{read_drive_trace, read_drive_trace_from, write_drive_trace, TraceError, TRACE_HEADER};

/// 3GPP reporting ranges.
pub const RSRP_RANGE_DBM: (f64, f64) = (-156.0, -31.0);
pub const RSRQ_RANGE_DB: (f64, f64) = (-43.0, 20.0);
pub const SINR_RANGE_DB: (f64, f64) = (-23.0, 40.0);

/// WGS84 position in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        check_range("lat", self.lat, -90.0, 90.0)?;
        check_range("lon", self.lon, -180.0, 180.0)
    }

    /// Great-circle distance in meters (haversine, spherical earth).
    pub fn distance_m(&self, other: &GeoPoint) -> f64 {
        let (p1, p2) = (self.lat.to_radians(), other.lat.to_radians());
        let dp = p2 - p1;
        let dl = (other.lon - self.lon).to_radians();
        let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_M * a.sqrt().asin()
    }
}

/// Mean earth radius (IUGG).
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadioSource {
    ModemLog,
    TraceFile,
    Simulated,
}

impl RadioSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            RadioSource::ModemLog => "modem_log",
            RadioSource::TraceFile => "trace_file",
            RadioSource::Simulated => "simulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioSample {
    pub t: f64,
    pub rsrp_dbm: f64,
    pub rsrq_db: f64,
    pub sinr_db: f64,
    pub position: Option<GeoPoint>,
    pub source: RadioSource,
}

impl RadioSample {
    pub fn validate(&self) -> Result<(), FieldError> {
        check_time("t", self.t)?;
        check_range("rsrp", self.rsrp_dbm, RSRP_RANGE_DBM.0, RSRP_RANGE_DBM.1)?;
        check_range("rsrq", self.rsrq_db, RSRQ_RANGE_DB.0, RSRQ_RANGE_DB.1)?;
        check_range("sinr", self.sinr_db, SINR_RANGE_DB.0, SINR_RANGE_DB.1)?;
        if let Some(p) = &self.position {
            p.validate()?;
        }
        Ok(())
    }
}

/// Attach to each RF reading the GPS fix nearest in time, if one lies within
/// `tolerance_s`. Both inputs must be sorted by time.
pub fn join_positions(
    readings: &[(f64, RfReading)],
    fixes: &[(f64, GeoPoint)],
    tolerance_s: f64,
    source: RadioSource,
) -> Vec<RadioSample> {
    let mut j = 0;
    readings
        .iter()
        .map(|&(t, rf)| {
            while j + 1 < fixes.len() && (fixes[j + 1].0 - t).abs() <= (fixes[j].0 - t).abs() {
                j += 1;
            }
            let position = fixes.get(j).filter(|(ft, _)| (ft - t).abs() <= tolerance_s).map(|(_, p)| *p);
            RadioSample { t, rsrp_dbm: rf.rsrp_dbm, rsrq_db: rf.rsrq_db, sinr_db: rf.sinr_db, position, source }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rsrp: f64) -> RadioSample {
        RadioSample { t: 0.0, rsrp_dbm: rsrp, rsrq_db: -11.0, sinr_db: 18.0, position: None, source: RadioSource::Simulated }
    }

    #[test]
    fn range_checks_name_the_field() {
        assert!(sample(-85.0).validate().is_ok());
        assert!(sample(-156.0).validate().is_ok());
        assert!(sample(-31.0).validate().is_ok());
        let err = sample(-200.0).validate().unwrap_err();
        assert_eq!(err.to_string(), "rsrp out of range");
        let mut s = sample(-85.0);
        s.position = Some(GeoPoint::new(91.0, 0.0));
        assert_eq!(s.validate().unwrap_err().field, "lat");
    }

    #[test]
    fn haversine_matches_known_distance() {
        // One degree of latitude is about 111.2 km.
        let d = GeoPoint::new(43.0, -2.0).distance_m(&GeoPoint::new(44.0, -2.0));
        assert!((d - 111_195.0).abs() < 10.0, "{d}");
    }

    #[test]
    fn join_uses_nearest_fix_within_tolerance() {
        let rf = RfReading { rsrp_dbm: -85.0, rsrq_db: -11.0, sinr_db: 18.0 };
        let readings = vec![(0.0, rf), (1.2, rf), (5.0, rf)];
        let fixes = vec![(0.1, GeoPoint::new(1.0, 1.0)), (1.0, GeoPoint::new(2.0, 2.0)), (2.0, GeoPoint::new(3.0, 3.0))];
        let joined = join_positions(&readings, &fixes, 0.5, RadioSource::ModemLog);
        assert_eq!(joined[0].position, Some(GeoPoint::new(1.0, 1.0)));
        assert_eq!(joined[1].position, Some(GeoPoint::new(2.0, 2.0)));
        assert_eq!(joined[2].position, None);
    }
}
