//! The monitoring store: timestamp-keyed series for L1, L3, L7 and QoE
//! observations, cross-layer alignment and the text exposition page.

mod persist;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FieldError;
use crate::media::{SegmentRecord, SessionEvent, SessionEventKind};
use crate::qoe::QoeScore;
use crate::radio::{LinkSample, RadioSample, RadioSource};
use crate::stats::{pearson, StatsError};

pub use persist::PersistError;

/// Values older than this are not carried forward by range queries.
pub const STALENESS_S: f64 = 5.0;
/// Maximum gap between a segment midpoint and the radio sample aligned to it.
pub const ALIGN_TOLERANCE_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    L1,
    L3,
    L7,
    #[serde(rename = "QoE")]
    Qoe,
}

impl Layer {
    /// Exposition name prefix.
    pub fn prefix(&self) -> &'static str {
        match self {
            Layer::L1 => "radio",
            Layer::L3 => "link",
            Layer::L7 => "media",
            Layer::Qoe => "qoe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub layer: Layer,
    pub metric: String,
    #[serde(default)]
    pub session_id: Option<String>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl SeriesKey {
    pub fn new(layer: Layer, metric: impl Into<String>) -> Self {
        Self { layer, metric: metric.into(), session_id: None, labels: BTreeMap::new() }
    }

    pub fn session(mut self, id: impl Into<String>) -> Self {
        self.session_id = Some(id.into());
        self
    }

    pub fn label(mut self, k: impl Into<String>, v: impl Into<String>) -> Self {
        self.labels.insert(k.into(), v.into());
        self
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.layer.prefix(), self.metric)
    }
}

/// A QoE score attributed to a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoePoint {
    pub session_id: String,
    #[serde(flatten)]
    pub score: QoeScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Observation {
    Radio(RadioSample),
    Link(LinkSample),
    Segment(SegmentRecord),
    Qoe(QoePoint),
    Session(SessionEvent),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub duplicate: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error(transparent)]
    Invalid(#[from] FieldError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("query range must satisfy t0 < t1 and step > 0")]
    InvalidRange,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QueryResult {
    pub points: Vec<(f64, f64)>,
    pub unknown_series: bool,
}

/// A segment with the radio and link context of its download.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedRecord {
    pub segment: SegmentRecord,
    pub radio: Option<RadioSample>,
    pub link_window: Vec<LinkSample>,
    pub gap_s: Option<f64>,
    pub unaligned: bool,
}

fn time_key(t: f64) -> i64 {
    (t * 1e6).round() as i64
}

fn key_time(k: i64) -> f64 {
    k as f64 / 1e6
}

#[derive(Debug, Default, Clone, PartialEq)]
struct Inner {
    series: BTreeMap<SeriesKey, BTreeMap<i64, f64>>,
    radio: BTreeMap<(RadioSource, i64), RadioSample>,
    link: BTreeMap<i64, LinkSample>,
    segments: BTreeMap<(String, i64, String, u64), SegmentRecord>,
    sessions: BTreeMap<(String, i64, u8), SessionEvent>,
}

/// Insert keeping, among conflicting values, the one that sorts first, so
/// the stored state does not depend on arrival order. Returns true if the
/// key was already present.
fn put_point(map: &mut BTreeMap<i64, f64>, t: i64, v: f64) -> bool {
    match map.get_mut(&t) {
        Some(old) => {
            if v.total_cmp(old).is_lt() {
                *old = v;
            }
            true
        }
        None => {
            map.insert(t, v);
            false
        }
    }
}

/// Same rule for whole records, compared by their JSON form. Returns
/// `(duplicate, stored)` where `stored` says whether `v` is now the value.
fn put_record<K: Ord, V: Serialize>(map: &mut BTreeMap<K, V>, k: K, v: V) -> (bool, bool) {
    match map.get_mut(&k) {
        Some(old) => {
            let new_json = serde_json::to_string(&v).unwrap_or_default();
            let old_json = serde_json::to_string(old).unwrap_or_default();
            let replace = new_json < old_json;
            if replace {
                *old = v;
            }
            (true, replace)
        }
        None => {
            map.insert(k, v);
            (false, true)
        }
    }
}

impl Inner {
    fn point(&mut self, key: SeriesKey, t: f64, v: f64) -> bool {
        put_point(self.series.entry(key).or_default(), time_key(t), v)
    }

    /// Overwrite, for series derived from a record that just won its key.
    fn set(&mut self, key: SeriesKey, t: f64, v: f64) {
        self.series.entry(key).or_default().insert(time_key(t), v);
    }
}

#[derive(Debug, Default)]
pub struct FusionStore {
    inner: RwLock<Inner>,
}

impl Clone for FusionStore {
    fn clone(&self) -> Self {
        Self { inner: RwLock::new(self.inner.read().unwrap().clone()) }
    }
}

impl PartialEq for FusionStore {
    fn eq(&self, other: &Self) -> bool {
        *self.inner.read().unwrap() == *other.inner.read().unwrap()
    }
}

impl FusionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ingest(&self, obs: Observation) -> Result<Ack, IngestError> {
        match obs {
            Observation::Radio(s) => self.ingest_radio(s),
            Observation::Link(s) => self.ingest_link(s),
            Observation::Segment(r) => self.ingest_segment(r),
            Observation::Qoe(q) => self.ingest_qoe(q),
            Observation::Session(e) => self.ingest_session(e),
        }
    }

    pub fn ingest_radio(&self, s: RadioSample) -> Result<Ack, IngestError> {
        s.validate()?;
        let mut g = self.inner.write().unwrap();
        let t = s.t;
        let (duplicate, stored) = put_record(&mut g.radio, (s.source, time_key(t)), s.clone());
        // Several sources at one instant: the series keep the first source.
        let shadowed = [RadioSource::ModemLog, RadioSource::TraceFile, RadioSource::Simulated]
            .iter()
            .any(|&src| src < s.source && g.radio.contains_key(&(src, time_key(t))));
        if stored && !shadowed {
            g.set(SeriesKey::new(Layer::L1, "rsrp_dbm"), t, s.rsrp_dbm);
            g.set(SeriesKey::new(Layer::L1, "rsrq_db"), t, s.rsrq_db);
            g.set(SeriesKey::new(Layer::L1, "sinr_db"), t, s.sinr_db);
            if let Some(p) = s.position {
                g.set(SeriesKey::new(Layer::L1, "lat_deg"), t, p.lat);
                g.set(SeriesKey::new(Layer::L1, "lon_deg"), t, p.lon);
            }
        }
        Ok(Ack { duplicate })
    }

    pub fn ingest_link(&self, s: LinkSample) -> Result<Ack, IngestError> {
        s.validate()?;
        let mut g = self.inner.write().unwrap();
        let (duplicate, stored) = put_record(&mut g.link, time_key(s.t), s.clone());
        if stored {
            g.set(SeriesKey::new(Layer::L3, "rx_throughput_mbps"), s.t, s.rx_throughput_mbps);
            g.set(SeriesKey::new(Layer::L3, "tx_throughput_mbps"), s.t, s.tx_throughput_mbps());
        }
        Ok(Ack { duplicate })
    }

    pub fn ingest_segment(&self, r: SegmentRecord) -> Result<Ack, IngestError> {
        r.validate()?;
        let mut g = self.inner.write().unwrap();
        let session = r.session_id.clone();
        let key = (session.clone(), time_key(r.t_request), r.rep_id.clone(), r.segment_index);
        let (duplicate, stored) = put_record(&mut g.segments, key, r.clone());
        if stored {
            g.set(
                SeriesKey::new(Layer::L7, "selected_bitrate_kbps").session(&session),
                r.t_complete,
                f64::from(r.selected_bitrate_kbps()),
            );
            if let Some(tp) = r.l7_throughput_mbps() {
                g.set(SeriesKey::new(Layer::L7, "l7_throughput_mbps").session(&session), r.t_complete, tp);
            }
        }
        Ok(Ack { duplicate })
    }

    pub fn ingest_qoe(&self, q: QoePoint) -> Result<Ack, IngestError> {
        let s = &q.score;
        if !(s.mos.is_finite() && (1.0..=5.0).contains(&s.mos)) {
            return Err(FieldError::out_of_range("mos").into());
        }
        if !(s.video_quality_mean.is_finite() && (1.0..=5.0).contains(&s.video_quality_mean)) {
            return Err(FieldError::out_of_range("video_quality_mean").into());
        }
        if !(s.stall_total_s.is_finite() && s.stall_total_s >= 0.0) {
            return Err(FieldError::out_of_range("stall_total").into());
        }
        if !s.t.is_finite() {
            return Err(FieldError::new("t", "is not finite").into());
        }
        let mut g = self.inner.write().unwrap();
        let id = &q.session_id;
        let dup = g.point(SeriesKey::new(Layer::Qoe, "mos").session(id), s.t, s.mos);
        g.point(SeriesKey::new(Layer::Qoe, "video_quality").session(id), s.t, s.video_quality_mean);
        g.point(SeriesKey::new(Layer::Qoe, "stall_total_s").session(id), s.t, s.stall_total_s);
        g.point(SeriesKey::new(Layer::Qoe, "stall_count").session(id), s.t, s.stall_count as f64);
        Ok(Ack { duplicate: dup })
    }

    pub fn ingest_session(&self, e: SessionEvent) -> Result<Ack, IngestError> {
        if e.session_id.is_empty() {
            return Err(FieldError::new("session_id", "is empty").into());
        }
        if !e.t.is_finite() {
            return Err(FieldError::new("t", "is not finite").into());
        }
        let kind = match e.kind {
            SessionEventKind::Open => 0,
            SessionEventKind::Close => 1,
        };
        let mut g = self.inner.write().unwrap();
        let (duplicate, _) = put_record(&mut g.sessions, (e.session_id.clone(), time_key(e.t), kind), e);
        Ok(Ack { duplicate })
    }

    pub fn series_keys(&self) -> Vec<SeriesKey> {
        self.inner.read().unwrap().series.keys().cloned().collect()
    }

    /// Raw points of a series in time order.
    pub fn points(&self, key: &SeriesKey) -> Option<Vec<(f64, f64)>> {
        let g = self.inner.read().unwrap();
        g.series.get(key).map(|m| m.iter().map(|(&t, &v)| (key_time(t), v)).collect())
    }

    pub fn radio_samples(&self) -> Vec<RadioSample> {
        let g = self.inner.read().unwrap();
        let mut v: Vec<RadioSample> = g.radio.values().cloned().collect();
        v.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.source.cmp(&b.source)));
        v
    }

    pub fn link_samples(&self) -> Vec<LinkSample> {
        self.inner.read().unwrap().link.values().cloned().collect()
    }

    /// Segment records ordered by session, then request time.
    pub fn segments(&self) -> Vec<SegmentRecord> {
        self.inner.read().unwrap().segments.values().cloned().collect()
    }

    pub fn session_events(&self) -> Vec<SessionEvent> {
        self.inner.read().unwrap().sessions.values().cloned().collect()
    }

    pub fn session_ids(&self) -> Vec<String> {
        let g = self.inner.read().unwrap();
        let mut ids: Vec<String> = g
            .segments
            .keys()
            .map(|k| k.0.clone())
            .chain(g.sessions.keys().map(|k| k.0.clone()))
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    /// Resample onto `t0 + k·step` for all `k` with the grid point `≤ t1`,
    /// carrying the last observation forward for at most [`STALENESS_S`].
    pub fn query_range(&self, key: &SeriesKey, t0: f64, t1: f64, step: f64) -> Result<QueryResult, QueryError> {
        if !(t0 < t1 && step > 0.0 && t0.is_finite() && t1.is_finite() && step.is_finite()) {
            return Err(QueryError::InvalidRange);
        }
        let g = self.inner.read().unwrap();
        let Some(series) = g.series.get(key) else {
            return Ok(QueryResult { points: Vec::new(), unknown_series: true });
        };
        let mut points = Vec::new();
        let mut k = 0u64;
        loop {
            let t = t0 + k as f64 * step;
            if t > t1 + 1e-9 {
                break;
            }
            if let Some((&pt, &v)) = series.range(..=time_key(t)).next_back() {
                if t - key_time(pt) <= STALENESS_S + 1e-9 {
                    points.push((t, v));
                }
            }
            k += 1;
        }
        Ok(QueryResult { points, unknown_series: false })
    }

    /// Attach the radio sample nearest the segment midpoint and every link
    /// sample whose window overlaps the download.
    pub fn align(&self, segment: &SegmentRecord) -> AlignedRecord {
        let g = self.inner.read().unwrap();
        let mid = segment.midpoint();
        let radio = g
            .radio
            .values()
            .min_by(|a, b| (a.t - mid).abs().total_cmp(&(b.t - mid).abs()).then(a.t.total_cmp(&b.t)))
            .cloned();
        let gap_s = radio.as_ref().map(|r| (r.t - mid).abs());
        let unaligned = !matches!(gap_s, Some(gap) if gap <= ALIGN_TOLERANCE_S + 1e-9);
        let link_window = g
            .link
            .values()
            .filter(|l| l.window_start() < segment.t_complete && l.t > segment.t_request)
            .cloned()
            .collect();
        AlignedRecord { segment: segment.clone(), radio, link_window, gap_s, unaligned }
    }

    pub fn align_all(&self) -> Vec<AlignedRecord> {
        self.segments().iter().map(|s| self.align(s)).collect()
    }

    /// Pearson correlation of two series over their common grid points.
    pub fn correlate(&self, a: &SeriesKey, b: &SeriesKey, t0: f64, t1: f64, step: f64) -> Result<f64, QueryError> {
        let qa = self.query_range(a, t0, t1, step)?;
        let qb = self.query_range(b, t0, t1, step)?;
        let vb: BTreeMap<i64, f64> = qb.points.iter().map(|&(t, v)| (time_key(t), v)).collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            qa.points.iter().filter_map(|&(t, v)| vb.get(&time_key(t)).map(|&w| (v, w))).unzip();
        Ok(pearson(&xs, &ys)?)
    }

    /// Latest point of every series, one line each:
    /// `name{session="..",k="v"} value ms_timestamp`, sorted.
    pub fn exposition(&self) -> String {
        let g = self.inner.read().unwrap();
        let mut lines: Vec<(String, String, String)> = g
            .series
            .iter()
            .filter_map(|(key, pts)| {
                let (&t, &v) = pts.iter().next_back()?;
                let mut labels: BTreeMap<&str, &str> =
                    key.labels.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                labels.insert("session", key.session_id.as_deref().unwrap_or(""));
                let rendered = labels
                    .iter()
                    .map(|(k, v)| format!("{}=\"{}\"", sanitize_name(k), escape_label(v)))
                    .collect::<Vec<_>>()
                    .join(",");
                let ms = (key_time(t) * 1000.0).round() as i64;
                Some((sanitize_name(&key.name()), rendered, format!("{v} {ms}")))
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        for (name, labels, rest) in lines {
            writeln!(out, "{name}{{{labels}}} {rest}").unwrap();
        }
        if out.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Map to `[a-z_][a-z0-9_]*`.
fn sanitize_name(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| {
            let c = c.to_ascii_lowercase();
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

fn escape_label(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    for c in v.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::GeoPoint;
    use proptest::prelude::*;

    fn radio(t: f64, rsrp: f64) -> RadioSample {
        RadioSample {
            t,
            rsrp_dbm: rsrp,
            rsrq_db: -11.0,
            sinr_db: 18.0,
            position: Some(GeoPoint::new(43.29, -1.98)),
            source: RadioSource::TraceFile,
        }
    }

    fn segment(session: &str, t0: f64, t1: f64, kbps: u32) -> SegmentRecord {
        SegmentRecord {
            session_id: session.into(),
            rep_id: format!("r{kbps}"),
            rep_bitrate_kbps: kbps,
            segment_index: 1,
            bytes: u64::from(kbps) * 500,
            t_request: t0,
            t_first_byte: t0,
            t_complete: t1,
            origin_status: 200,
        }
    }

    fn rsrp_key() -> SeriesKey {
        SeriesKey::new(Layer::L1, "rsrp_dbm")
    }

    #[test]
    fn ingest_and_query() {
        let store = FusionStore::new();
        assert!(!store.ingest_radio(radio(1.0, -85.0)).unwrap().duplicate);
        assert!(store.ingest_radio(radio(1.0, -85.0)).unwrap().duplicate);
        assert_eq!(store.points(&rsrp_key()).unwrap(), vec![(1.0, -85.0)]);
        assert_eq!(store.radio_samples().len(), 1);
    }

    #[test]
    fn rejects_out_of_range() {
        let err = FusionStore::new().ingest_radio(radio(1.0, -200.0)).unwrap_err();
        assert_eq!(err.to_string(), "rsrp out of range");
    }

    #[test]
    fn locf_queries() {
        let store = FusionStore::new();
        for k in 0..10 {
            store.ingest_radio(radio(k as f64, -80.0 - k as f64)).unwrap();
        }
        let q = store.query_range(&rsrp_key(), 0.0, 9.0, 1.0).unwrap();
        assert_eq!(q.points.len(), 10);
        assert_eq!(q.points[3], (3.0, -83.0));
        let q2 = store.query_range(&rsrp_key(), 0.0, 9.0, 2.0).unwrap();
        assert_eq!(q2.points.iter().map(|p| p.1).collect::<Vec<_>>(), vec![-80.0, -82.0, -84.0, -86.0, -88.0]);
        let before = store.query_range(&rsrp_key(), -20.0, -10.0, 1.0).unwrap();
        assert!(before.points.is_empty() && !before.unknown_series);
        // Carried forward for five seconds, then absent.
        let after = store.query_range(&rsrp_key(), 9.0, 20.0, 1.0).unwrap();
        assert_eq!(after.points.len(), 6);
        assert!(store.query_range(&SeriesKey::new(Layer::L1, "nope"), 0.0, 1.0, 1.0).unwrap().unknown_series);
        assert_eq!(store.query_range(&rsrp_key(), 1.0, 1.0, 1.0), Err(QueryError::InvalidRange));
    }

    #[test]
    fn alignment() {
        let store = FusionStore::new();
        let seg = segment("s-000001", 9.6, 10.4, 1000);
        assert!(store.align(&seg).unaligned);
        store.ingest_radio(radio(10.0, -85.0)).unwrap();
        store
            .ingest_link(LinkSample { t: 10.0, rx_bytes_delta: 1, tx_bytes_delta: 0, window_s: 1.0, rx_throughput_mbps: 8e-6 })
            .unwrap();
        store
            .ingest_link(LinkSample { t: 12.0, rx_bytes_delta: 1, tx_bytes_delta: 0, window_s: 1.0, rx_throughput_mbps: 8e-6 })
            .unwrap();
        let a = store.align(&seg);
        assert_eq!(a.gap_s, Some(0.0));
        assert!(!a.unaligned);
        assert_eq!(a.link_window.len(), 1);
        let far = store.align(&segment("s-000001", 20.0, 21.0, 1000));
        assert!(far.unaligned && far.radio.is_some());
    }

    #[test]
    fn correlation() {
        let store = FusionStore::new();
        for k in 0..20 {
            let v = -80.0 - (k as f64 * 0.7).sin() * 10.0;
            store.ingest_radio(radio(k as f64, v)).unwrap();
            let mut s = radio(k as f64, v);
            s.source = RadioSource::Simulated;
            store.ingest_radio(s).unwrap();
        }
        let r = store.correlate(&rsrp_key(), &rsrp_key(), 0.0, 19.0, 1.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let sinr = SeriesKey::new(Layer::L1, "sinr_db");
        assert_eq!(
            store.correlate(&rsrp_key(), &sinr, 0.0, 19.0, 1.0),
            Err(QueryError::Stats(StatsError::Degenerate))
        );
    }

    #[test]
    fn exposition_format() {
        let store = FusionStore::new();
        assert_eq!(store.exposition(), "\n");
        store.ingest_radio(RadioSample { position: None, ..radio(1_700_000_000.0, -85.0) }).unwrap();
        store.ingest_segment(segment("s-000002", 1.0, 2.0, 944)).unwrap();
        store.ingest_segment(segment("s-000001", 1.0, 3.0, 145)).unwrap();
        let page = store.exposition();
        assert!(page.contains("radio_rsrp_dbm{session=\"\"} -85 1700000000000\n"), "{page}");
        let media: Vec<&str> = page.lines().filter(|l| l.starts_with("media_selected_bitrate_kbps")).collect();
        assert_eq!(
            media,
            vec![
                "media_selected_bitrate_kbps{session=\"s-000001\"} 145 3000",
                "media_selected_bitrate_kbps{session=\"s-000002\"} 944 2000",
            ]
        );
        assert!(page.ends_with('\n'));
    }

    #[test]
    fn label_escaping() {
        let store = FusionStore::new();
        store.ingest_segment(segment("a\"b\\c", 1.0, 2.0, 145)).unwrap();
        assert!(store.exposition().contains("session=\"a\\\"b\\\\c\""));
    }

    #[test]
    fn failed_download_selects_zero() {
        let store = FusionStore::new();
        let mut r = segment("s-000001", 1.0, 2.0, 145);
        r.origin_status = 503;
        r.bytes = 0;
        store.ingest_segment(r).unwrap();
        let key = SeriesKey::new(Layer::L7, "selected_bitrate_kbps").session("s-000001");
        assert_eq!(store.points(&key).unwrap(), vec![(2.0, 0.0)]);
    }

    proptest! {
        #[test]
        fn ingestion_order_does_not_matter(
            values in prop::collection::vec((0u32..50, -140.0f64..-40.0), 1..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let samples: Vec<RadioSample> = values.iter().map(|&(t, v)| radio(f64::from(t), v)).collect();
            let a = FusionStore::new();
            for s in &samples {
                a.ingest_radio(s.clone()).unwrap();
            }
            let mut shuffled = samples.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = FusionStore::new();
            for s in shuffled {
                b.ingest_radio(s).unwrap();
            }
            prop_assert!(a == b);
            prop_assert_eq!(
                a.query_range(&rsrp_key(), 0.0, 50.0, 1.0).unwrap(),
                b.query_range(&rsrp_key(), 0.0, 50.0, 1.0).unwrap()
            );
        }
    }
}
