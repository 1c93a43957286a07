//! RSRP coverage zones and grid coverage maps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FieldError;
use crate::radio::{GeoPoint, RadioSample, EARTH_RADIUS_M, RSRP_RANGE_DBM};
use crate::stats::median;

/// Signal zones, declared worst first so the derived order is
/// `CellEdge < Mid < Good < Excellent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Zone {
    CellEdge,
    Mid,
    Good,
    Excellent,
}

impl Zone {
    pub const ALL: [Zone; 4] = [Zone::Excellent, Zone::Good, Zone::Mid, Zone::CellEdge];

    pub fn color(&self) -> &'static str {
        match self {
            Zone::Excellent => "green",
            Zone::Good => "yellow",
            Zone::Mid => "orange",
            Zone::CellEdge => "red",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Zone::Excellent => "Excellent",
            Zone::Good => "Good",
            Zone::Mid => "Mid",
            Zone::CellEdge => "CellEdge",
        }
    }
}

/// Upper-inclusive zones: a value on a threshold belongs to the worse zone.
pub fn classify_rsrp(rsrp_dbm: f64) -> Result<Zone, FieldError> {
    let (lo, hi) = RSRP_RANGE_DBM;
    if !(rsrp_dbm.is_finite() && rsrp_dbm >= lo && rsrp_dbm <= hi) {
        return Err(FieldError::out_of_range("rsrp"));
    }
    Ok(if rsrp_dbm > -80.0 {
        Zone::Excellent
    } else if rsrp_dbm > -90.0 {
        Zone::Good
    } else if rsrp_dbm > -100.0 {
        Zone::Mid
    } else {
        Zone::CellEdge
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum CoverageError {
    #[error("cell size must be positive")]
    CellSize,
    #[error("no positioned samples")]
    NoSamples,
    #[error(transparent)]
    Sample(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub cell_id: (u32, u32),
    pub center: GeoPoint,
    /// South-west and north-east corners.
    pub sw: GeoPoint,
    pub ne: GeoPoint,
    pub sample_count: usize,
    pub rsrp_median: f64,
    pub zone: Zone,
}

/// Bucket positioned samples into square cells of `cell_size_m` on a local
/// equirectangular grid whose origin is the south-west corner of the
/// samples' bounding box. `i` counts cells eastwards, `j` northwards.
pub fn build_coverage(samples: &[RadioSample], cell_size_m: f64) -> Result<Vec<CoverageCell>, CoverageError> {
    if !(cell_size_m > 0.0 && cell_size_m.is_finite()) {
        return Err(CoverageError::CellSize);
    }
    let positioned: Vec<(GeoPoint, f64)> =
        samples.iter().filter_map(|s| s.position.map(|p| (p, s.rsrp_dbm))).collect();
    if positioned.is_empty() {
        return Err(CoverageError::NoSamples);
    }
    for (p, rsrp) in &positioned {
        p.validate()?;
        classify_rsrp(*rsrp)?;
    }
    let lat0 = positioned.iter().map(|(p, _)| p.lat).fold(f64::INFINITY, f64::min);
    let lon0 = positioned.iter().map(|(p, _)| p.lon).fold(f64::INFINITY, f64::min);
    let m_per_deg_lat = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
    let m_per_deg_lon = m_per_deg_lat * lat0.to_radians().cos();
    let dlat = cell_size_m / m_per_deg_lat;
    let dlon = cell_size_m / m_per_deg_lon;

    let mut buckets: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
    for (p, rsrp) in positioned {
        let i = (((p.lon - lon0) * m_per_deg_lon) / cell_size_m).floor() as u32;
        let j = (((p.lat - lat0) * m_per_deg_lat) / cell_size_m).floor() as u32;
        buckets.entry((i, j)).or_default().push(rsrp);
    }
    buckets
        .into_iter()
        .map(|((i, j), values)| {
            let rsrp_median = median(&values).expect("bucket is non-empty");
            let sw = GeoPoint::new(lat0 + f64::from(j) * dlat, lon0 + f64::from(i) * dlon);
            let ne = GeoPoint::new(sw.lat + dlat, sw.lon + dlon);
            Ok(CoverageCell {
                cell_id: (i, j),
                center: GeoPoint::new(sw.lat + dlat / 2.0, sw.lon + dlon / 2.0),
                sw,
                ne,
                sample_count: values.len(),
                rsrp_median,
                zone: classify_rsrp(rsrp_median)?,
            })
        })
        .collect()
}

/// GeoJSON FeatureCollection with one square polygon per cell. Keys are
/// emitted in sorted order and coordinates with six decimals, so identical
/// input gives identical bytes.
pub fn to_geojson(cells: &[CoverageCell]) -> Vec<u8> {
    let mut out = String::from("{\"features\":[");
    for (n, c) in cells.iter().enumerate() {
        if n > 0 {
            out.push(',');
        }
        let ring = [(c.sw.lon, c.sw.lat), (c.ne.lon, c.sw.lat), (c.ne.lon, c.ne.lat), (c.sw.lon, c.ne.lat), (c.sw.lon, c.sw.lat)];
        out.push_str("{\"geometry\":{\"coordinates\":[[");
        for (k, (lon, lat)) in ring.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "[{lon:.6},{lat:.6}]").unwrap();
        }
        write!(
            out,
            "]],\"type\":\"Polygon\"}},\"properties\":{{\"color\":\"{}\",\"rsrp_median\":{:.2},\"sample_count\":{},\"zone\":\"{}\"}},\"type\":\"Feature\"}}",
            c.zone.color(),
            c.rsrp_median,
            c.sample_count,
            c.zone.name()
        )
        .unwrap();
    }
    out.push_str("],\"type\":\"FeatureCollection\"}\n");
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::RadioSource;
    use proptest::prelude::*;

    fn at(lat: f64, lon: f64, rsrp: f64) -> RadioSample {
        RadioSample {
            t: 0.0,
            rsrp_dbm: rsrp,
            rsrq_db: -10.0,
            sinr_db: 10.0,
            position: Some(GeoPoint::new(lat, lon)),
            source: RadioSource::Simulated,
        }
    }

    #[test]
    fn thresholds() {
        assert_eq!(classify_rsrp(-75.0).unwrap(), Zone::Excellent);
        assert_eq!(classify_rsrp(-85.0).unwrap(), Zone::Good);
        assert_eq!(classify_rsrp(-95.0).unwrap(), Zone::Mid);
        assert_eq!(classify_rsrp(-105.0).unwrap(), Zone::CellEdge);
        assert_eq!(classify_rsrp(-80.0).unwrap(), Zone::Good);
        assert_eq!(classify_rsrp(-90.0).unwrap(), Zone::Mid);
        assert_eq!(classify_rsrp(-100.0).unwrap(), Zone::CellEdge);
        assert!(classify_rsrp(-157.0).is_err());
        assert!(classify_rsrp(f64::NAN).is_err());
        assert!(Zone::Excellent > Zone::Good && Zone::Good > Zone::Mid && Zone::Mid > Zone::CellEdge);
    }

    #[test]
    fn single_point_single_cell() {
        let cells = build_coverage(&vec![at(43.29, -1.98, -85.0); 3], 25.0).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].zone, Zone::Good);
        assert_eq!(cells[0].sample_count, 3);
        assert_eq!(cells[0].cell_id, (0, 0));
    }

    #[test]
    fn clusters_100m_apart() {
        let dlat = 110.0 / (EARTH_RADIUS_M * std::f64::consts::PI / 180.0);
        let samples = [at(43.29, -1.98, -85.0), at(43.29 + dlat, -1.98, -95.0)];
        let cells = build_coverage(&samples, 25.0).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].cell_id, (0, 0));
        assert_eq!(cells[1].cell_id.1, 4);
    }

    #[test]
    fn errors() {
        assert_eq!(build_coverage(&[], 25.0), Err(CoverageError::NoSamples));
        assert_eq!(build_coverage(&[at(0.0, 0.0, -80.0)], 0.0), Err(CoverageError::CellSize));
        let mut s = at(0.0, 0.0, -80.0);
        s.position = None;
        assert_eq!(build_coverage(&[s], 25.0), Err(CoverageError::NoSamples));
    }

    #[test]
    fn geojson_shape() {
        let cells = build_coverage(&[at(43.29, -1.98, -85.0)], 25.0).unwrap();
        let bytes = to_geojson(&cells);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["type"], "FeatureCollection");
        let f = &v["features"][0];
        assert_eq!(f["properties"]["color"], "yellow");
        assert_eq!(f["properties"]["zone"], "Good");
        assert_eq!(f["properties"]["sample_count"], 1);
        assert_eq!(f["geometry"]["coordinates"][0].as_array().unwrap().len(), 5);
        assert_eq!(bytes, to_geojson(&cells));
        let empty: serde_json::Value = serde_json::from_slice(&to_geojson(&[])).unwrap();
        assert_eq!(empty["features"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn zones_partition_range() {
        let mut counts = [0usize; 4];
        let mut k = 0;
        loop {
            let v = -156.0 + 0.1 * f64::from(k);
            if v > -31.0 + 1e-9 {
                break;
            }
            let z = classify_rsrp(v.min(-31.0)).unwrap();
            counts[z as usize] += 1;
            k += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), 1251);
        assert!(counts.iter().all(|&c| c > 0));
    }

    proptest! {
        #[test]
        fn lowering_a_sample_never_improves_zone(
            values in prop::collection::vec(-140.0f64..-40.0, 1..15),
            which in any::<prop::sample::Index>(),
            drop in 0.0f64..30.0,
        ) {
            let samples: Vec<RadioSample> = values.iter().map(|&v| at(43.29, -1.98, v)).collect();
            let before = build_coverage(&samples, 25.0).unwrap()[0].zone;
            let mut lowered = samples.clone();
            let k = which.index(lowered.len());
            lowered[k].rsrp_dbm = (lowered[k].rsrp_dbm - drop).max(-156.0);
            let after = build_coverage(&lowered, 25.0).unwrap()[0].zone;
            prop_assert!(after <= before);
        }

        #[test]
        fn shifting_by_whole_cells_preserves_zones(
            pts in prop::collection::vec((0.0f64..400.0, 0.0f64..400.0, -130.0f64..-60.0), 1..40),
            shift in 1u32..10,
        ) {
            let m_lat = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
            let base: Vec<RadioSample> = pts.iter()
                .map(|&(n, e, r)| at(43.29 + n / m_lat, -1.98 + e / (m_lat * 43.29f64.to_radians().cos()), r))
                .collect();
            let shifted: Vec<RadioSample> = base.iter().map(|s| {
                let mut s = s.clone();
                let p = s.position.unwrap();
                let m_lon = m_lat * 43.29f64.to_radians().cos();
                s.position = Some(GeoPoint::new(p.lat, p.lon + f64::from(shift) * 25.0 / m_lon));
                s
            }).collect();
            let a: Vec<Zone> = build_coverage(&base, 25.0).unwrap().iter().map(|c| c.zone).collect();
            let b: Vec<Zone> = build_coverage(&shifted, 25.0).unwrap().iter().map(|c| c.zone).collect();
            let mut a_sorted = a.clone();
            let mut b_sorted = b.clone();
            a_sorted.sort();
            b_sorted.sort();
            prop_assert_eq!(a_sorted, b_sorted);
        }
    }
}
