//! NMEA 0183 GGA/RMC position decoding.

use thiserror::Error;

use super::GeoPoint;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NmeaError {
    #[error("checksum mismatch: sentence says {stated:02X}, computed {computed:02X}")]
    Checksum { stated: u8, computed: u8 },
}

/// A decoded position fix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmeaFix {
    /// Run timestamp prefixed to the line in a log, if any.
    pub log_t: Option<f64>,
    /// UTC time of day from the sentence, seconds since midnight.
    pub utc_s: Option<f64>,
    pub position: GeoPoint,
}

/// XOR of all bytes between `$` and `*`.
pub fn nmea_checksum(body: &str) -> u8 {
    body.bytes().fold(0u8, |acc, b| acc ^ b)
}

/// Decode a GGA or RMC sentence with a valid checksum. Other sentences,
/// sentences without a fix, and sentences without a checksum yield `Ok(None)`.
pub fn parse_nmea(line: &str) -> Result<Option<NmeaFix>, NmeaError> {
    let line = line.trim();
    let Some(dollar) = line.find('$') else { return Ok(None) };
    let log_t = if dollar == 0 {
        None
    } else {
        match line[..dollar].trim().parse::<f64>() {
            Ok(t) if t.is_finite() => Some(t),
            _ => return Ok(None),
        }
    };
    let sentence = &line[dollar + 1..];
    let Some((body, tail)) = sentence.split_once('*') else { return Ok(None) };
    let Some(stated) = tail.get(..2).and_then(|h| u8::from_str_radix(h, 16).ok()) else {
        return Ok(None);
    };
    let computed = nmea_checksum(body);
    if stated != computed {
        return Err(NmeaError::Checksum { stated, computed });
    }

    let fields: Vec<&str> = body.split(',').collect();
    let kind = fields[0];
    if kind.len() != 5 || !kind.is_ascii() {
        return Ok(None);
    }
    let (time, lat, ns, lon, ew) = match &kind[2..] {
        "GGA" => {
            let quality = fields.get(6).copied().unwrap_or("");
            if quality.is_empty() || quality == "0" {
                return Ok(None);
            }
            (fields.get(1), fields.get(2), fields.get(3), fields.get(4), fields.get(5))
        }
        "RMC" => {
            if fields.get(2).copied() != Some("A") {
                return Ok(None);
            }
            (fields.get(1), fields.get(3), fields.get(4), fields.get(5), fields.get(6))
        }
        _ => return Ok(None),
    };
    let (Some(lat), Some(ns), Some(lon), Some(ew)) = (lat, ns, lon, ew) else { return Ok(None) };
    let (Some(mut lat), Some(mut lon)) = (degrees_minutes(lat, 90.0), degrees_minutes(lon, 180.0)) else {
        return Ok(None);
    };
    match *ns {
        "N" => {}
        "S" => lat = -lat,
        _ => return Ok(None),
    }
    match *ew {
        "E" => {}
        "W" => lon = -lon,
        _ => return Ok(None),
    }
    Ok(Some(NmeaFix { log_t, utc_s: time.and_then(|t| utc_seconds(t)), position: GeoPoint { lat, lon } }))
}

fn degrees_minutes(field: &str, max_deg: f64) -> Option<f64> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return None;
    }
    let v: f64 = field.parse().ok()?;
    let deg = (v / 100.0).floor();
    let min = v - deg * 100.0;
    let out = deg + min / 60.0;
    (min < 60.0 && out <= max_deg).then_some(out)
}

fn utc_seconds(field: &str) -> Option<f64> {
    if field.len() < 6 || !field.is_ascii() {
        return None;
    }
    let h: f64 = field[0..2].parse().ok()?;
    let m: f64 = field[2..4].parse().ok()?;
    let s: f64 = field[4..].parse().ok()?;
    Some(h * 3600.0 + m * 60.0 + s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with_checksum(body: &str) -> String {
        format!("${body}*{:02X}", nmea_checksum(body))
    }

    #[test]
    fn gga_decodes_to_decimal_degrees() {
        let s = with_checksum("GPGGA,120000.00,4315.642,N,00158.934,W,1,08,0.9,25.0,M,50.0,M,,");
        let fix = parse_nmea(&s).unwrap().unwrap();
        assert!((fix.position.lat - 43.2607).abs() < 1e-4);
        assert!((fix.position.lon - -1.98223).abs() < 1e-5);
        assert_eq!(fix.utc_s, Some(43200.0));
    }

    #[test]
    fn rmc_and_talker_ids() {
        let s = with_checksum("GNRMC,083559.00,A,4717.11437,N,00833.91522,E,0.004,77.52,091202,,,A");
        let fix = parse_nmea(&s).unwrap().unwrap();
        assert!((fix.position.lat - 47.285240).abs() < 1e-6);
        assert!((fix.position.lon - 8.565254).abs() < 1e-6);
        let void = with_checksum("GPRMC,083559.00,V,4717.11437,N,00833.91522,E,0.004,77.52,091202,,,A");
        assert_eq!(parse_nmea(&void).unwrap(), None);
    }

    #[test]
    fn known_sentence_checksum() {
        let s = "$GPGGA,092750.000,5321.6802,N,00630.3372,W,1,8,1.03,61.7,M,55.2,M,,*76";
        assert!(parse_nmea(s).unwrap().is_some());
    }

    #[test]
    fn corrupted_checksum_is_an_error() {
        let mut s = with_checksum("GPGGA,120000.00,4315.642,N,00158.934,W,1,08,0.9,25.0,M,50.0,M,,");
        s = s.replace("4315", "4316");
        assert!(matches!(parse_nmea(&s), Err(NmeaError::Checksum { .. })));
    }

    #[test]
    fn unsupported_and_fixless_sentences_skip() {
        let gsv = with_checksum("GPGSV,3,1,11,03,03,111,00,04,15,270,00,06,01,010,00,13,06,292,00");
        assert_eq!(parse_nmea(&gsv).unwrap(), None);
        let nofix = with_checksum("GPGGA,120000.00,,,,,0,00,,,M,,M,,");
        assert_eq!(parse_nmea(&nofix).unwrap(), None);
        assert_eq!(parse_nmea("garbage").unwrap(), None);
        assert_eq!(parse_nmea("$GPGGA,no checksum").unwrap(), None);
    }

    #[test]
    fn leading_log_timestamp() {
        let s = format!("7.0 {}", with_checksum("GPGGA,120000.00,4315.642,N,00158.934,W,1,08,0.9,25.0,M,50.0,M,,"));
        assert_eq!(parse_nmea(&s).unwrap().unwrap().log_t, Some(7.0));
    }

    proptest! {
        #[test]
        fn never_panics(line in ".{0,200}") {
            let _ = parse_nmea(&line);
        }

        #[test]
        fn never_panics_on_checksummed(body in "[A-Z]{2}(GGA|RMC),[0-9.,NSEWAV\u{e9}]{0,80}") {
            let _ = parse_nmea(&with_checksum(&body));
        }
    }
}
