//! Trial scenario files.
//!
//! ```toml
//! name = "far"
//! seed = 42
//! dataset = "../fixtures/mpd/seconds_that_count.mpd"  # relative to this file
//!
//! [antenna]
//! lat = 43.3
//! lon = -1.98
//!
//! [[waypoints]]
//! t_s = 0.0
//! lat = 43.3
//! lon = -1.978
//!
//! [pathloss]   # optional, all keys required when present
//! p0_dbm_at_d0 = -60.0
//! d0_m = 10.0
//! exponent = 2.2
//! shadow_sigma_db = 4.0
//! decorrelation_m = 50.0
//!
//! [radio]      # optional, SINR/RSRQ derivation
//! [link]       # optional, capacity map and transport overhead
//! [abr]        # optional, player
//! [qoe]        # optional, device and display
//! ```

use std::path::{Path, PathBuf};

use edgewatch_core::channel::{LinkParams, PathLoss, RadioDerivation};
use edgewatch_core::playback::PlaybackConfig;
use edgewatch_core::qoe::{Device, Display};
use edgewatch_core::GeoPoint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Syntax { path: PathBuf, source: toml::de::Error },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("t = {t} outside the waypoint span [{start}, {end}]")]
    OutsideSpan { t: f64, start: f64, end: f64 },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t_s: f64,
    pub lat: f64,
    pub lon: f64,
}

impl Waypoint {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSpec {
    pub bandwidth_mhz: f64,
    pub efficiency: f64,
    pub max_mbps: f64,
    /// Transport and network header bytes per body byte.
    pub overhead_ratio: f64,
    /// Status line and HTTP headers per response.
    pub header_bytes: u64,
    pub latency_s: f64,
}

impl Default for LinkSpec {
    fn default() -> Self {
        let p = LinkParams::<f64>::default();
        Self {
            bandwidth_mhz: p.bandwidth_mhz,
            efficiency: p.efficiency,
            max_mbps: p.max_mbps,
            overhead_ratio: 0.03,
            header_bytes: 300,
            latency_s: 0.0,
        }
    }
}

impl LinkSpec {
    pub fn params(&self) -> LinkParams {
        LinkParams { bandwidth_mhz: self.bandwidth_mhz, efficiency: self.efficiency, max_mbps: self.max_mbps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbrSpec {
    pub safety: f64,
    pub ewma_alpha: f64,
    /// Requests pause while a further segment would lift the buffer above this.
    pub buffer_target_s: f64,
    pub buffer_max_s: f64,
    pub startup_threshold_s: f64,
    pub resume_threshold_s: f64,
    /// Throughput estimate before the first download completes.
    pub initial_estimate_mbps: f64,
}

impl Default for AbrSpec {
    fn default() -> Self {
        Self {
            safety: 0.8,
            ewma_alpha: 0.3,
            buffer_target_s: 20.0,
            buffer_max_s: 30.0,
            startup_threshold_s: 4.0,
            resume_threshold_s: 4.0,
            initial_estimate_mbps: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QoeSpec {
    pub device: Device,
    pub display_width: u32,
    pub display_height: u32,
    /// Spacing of the QoE evolution series.
    pub step_s: f64,
}

impl Default for QoeSpec {
    fn default() -> Self {
        let d = Display::default();
        Self { device: Device::default(), display_width: d.width, display_height: d.height, step_s: 1.0 }
    }
}

impl QoeSpec {
    pub fn display(&self) -> Display {
        Display { width: self.display_width, height: self.display_height }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Manifest served by the local origin, relative to the scenario file.
    pub dataset: PathBuf,
    pub antenna: GeoPoint,
    pub waypoints: Vec<Waypoint>,
    #[serde(default)]
    pub pathloss: PathLoss,
    #[serde(default)]
    pub radio: RadioDerivation,
    #[serde(default)]
    pub link: LinkSpec,
    #[serde(default)]
    pub abr: AbrSpec,
    #[serde(default)]
    pub qoe: QoeSpec,
    /// Directory `dataset` is resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn positive(field: &'static str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

fn unit_interval(field: &'static str, v: f64) -> Result<(), ScenarioError> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in (0, 1], got {v}")))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
        let mut sc: Scenario = toml::from_str(&text).map_err(|source| ScenarioError::Syntax { path: path.into(), source })?;
        sc.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        sc.validate()?;
        Ok(sc)
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.base_dir.join(&self.dataset)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.waypoints.len() < 2 {
            return Err(invalid("waypoints", "need at least two"));
        }
        for w in &self.waypoints {
            w.point().validate().map_err(|e| invalid("waypoints", e.to_string()))?;
            if !w.t_s.is_finite() {
                return Err(invalid("waypoints", "non-finite time"));
            }
        }
        if self.waypoints.windows(2).any(|w| w[1].t_s <= w[0].t_s) {
            return Err(invalid("waypoints", "timestamps must be strictly increasing"));
        }
        self.antenna.validate().map_err(|e| invalid("antenna", e.to_string()))?;

        let pl = &self.pathloss;
        positive("pathloss.d0_m", pl.d0_m)?;
        positive("pathloss.exponent", pl.exponent)?;
        if !(pl.shadow_sigma_db >= 0.0 && pl.shadow_sigma_db.is_finite()) {
            return Err(invalid("pathloss.shadow_sigma_db", "must be non-negative"));
        }
        if !(pl.decorrelation_m >= 0.0) {
            return Err(invalid("pathloss.decorrelation_m", "must be non-negative"));
        }

        positive("link.bandwidth_mhz", self.link.bandwidth_mhz)?;
        positive("link.efficiency", self.link.efficiency)?;
        positive("link.max_mbps", self.link.max_mbps)?;
        if !(self.link.overhead_ratio >= 0.0 && self.link.latency_s >= 0.0) {
            return Err(invalid("link", "overhead_ratio and latency_s must be non-negative"));
        }

        let a = &self.abr;
        unit_interval("abr.safety", a.safety)?;
        unit_interval("abr.ewma_alpha", a.ewma_alpha)?;
        positive("abr.buffer_target_s", a.buffer_target_s)?;
        positive("abr.buffer_max_s", a.buffer_max_s)?;
        positive("abr.startup_threshold_s", a.startup_threshold_s)?;
        positive("abr.resume_threshold_s", a.resume_threshold_s)?;
        positive("abr.initial_estimate_mbps", a.initial_estimate_mbps)?;
        if a.buffer_target_s > a.buffer_max_s {
            return Err(invalid("abr.buffer_target_s", "exceeds buffer_max_s"));
        }
        if a.startup_threshold_s > a.buffer_max_s || a.resume_threshold_s > a.buffer_max_s {
            return Err(invalid("abr", "thresholds exceed buffer_max_s"));
        }
        positive("qoe.step_s", self.qoe.step_s)?;
        if self.qoe.display_width == 0 || self.qoe.display_height == 0 {
            return Err(invalid("qoe.display", "must be non-empty"));
        }
        Ok(())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.waypoints[0].t_s, self.waypoints[self.waypoints.len() - 1].t_s)
    }

    pub fn playback(&self, segment_duration_s: f64) -> PlaybackConfig {
        PlaybackConfig {
            segment_duration_s,
            buffer_max_s: self.abr.buffer_max_s,
            startup_threshold_s: self.abr.startup_threshold_s,
            resume_threshold_s: self.abr.resume_threshold_s,
        }
    }

    /// Vehicle position at `t`, interpolated linearly between waypoints.
    pub fn position(&self, t: f64) -> Result<GeoPoint, ScenarioError> {
        let (start, end) = self.span();
        if !(t >= start && t <= end) {
            return Err(ScenarioError::OutsideSpan { t, start, end });
        }
        let i = self.waypoints.partition_point(|w| w.t_s <= t).clamp(1, self.waypoints.len() - 1);
        let (a, b) = (&self.waypoints[i - 1], &self.waypoints[i]);
        let f = (t - a.t_s) / (b.t_s - a.t_s);
        Ok(GeoPoint::new(a.lat + f * (b.lat - a.lat), a.lon + f * (b.lon - a.lon)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Scenario {
        toml::from_str(
            r#"
            name = "t"
            seed = 1
            dataset = "x.mpd"
            antenna = { lat = 43.3, lon = -1.98 }
            waypoints = [
                { t_s = 0.0, lat = 43.30, lon = -1.98 },
                { t_s = 10.0, lat = 43.31, lon = -1.96 },
                { t_s = 30.0, lat = 43.31, lon = -1.94 },
            ]
            "#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_missing_tables() {
        let sc = minimal();
        sc.validate().unwrap();
        assert_eq!(sc.abr.safety, 0.8);
        assert_eq!(sc.abr.ewma_alpha, 0.3);
        assert_eq!(sc.pathloss.exponent, 2.2);
        assert_eq!(sc.link.bandwidth_mhz, 100.0);
    }

    #[test]
    fn position_interpolates() {
        let sc = minimal();
        assert_eq!(sc.position(10.0).unwrap(), GeoPoint::new(43.31, -1.96));
        assert_eq!(sc.position(0.0).unwrap(), GeoPoint::new(43.30, -1.98));
        let mid = sc.position(5.0).unwrap();
        assert!((mid.lat - 43.305).abs() < 1e-12 && (mid.lon + 1.97).abs() < 1e-12);
        assert!((sc.position(20.0).unwrap().lon + 1.95).abs() < 1e-12);
        assert!(matches!(sc.position(30.5), Err(ScenarioError::OutsideSpan { .. })));
        assert!(sc.position(-0.1).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut sc = minimal();
        sc.waypoints[1].t_s = 0.0;
        assert!(sc.validate().is_err());
        let mut sc = minimal();
        sc.abr.safety = 1.5;
        assert!(sc.validate().is_err());
        let mut sc = minimal();
        sc.abr.buffer_target_s = 40.0;
        assert!(sc.validate().is_err());
        assert!(toml::from_str::<Scenario>("name = 1").is_err());
    }
}
