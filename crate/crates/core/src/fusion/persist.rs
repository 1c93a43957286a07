//! JSONL persistence: one `<series>.jsonl` per series plus `index.json`
//! mapping file names back to series keys, and one file per record table.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FusionStore, IngestError, Inner, SeriesKey};
use crate::media::{SegmentRecord, SessionEvent};
use crate::radio::{LinkSample, RadioSample};

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("{path}: {source}")]
    Record { path: PathBuf, source: IngestError },
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    file: String,
    key: SeriesKey,
}

#[derive(Serialize, Deserialize)]
struct Point {
    t: f64,
    value: f64,
}

const RADIO_FILE: &str = "_radio.jsonl";
const LINK_FILE: &str = "_link.jsonl";
const SEGMENTS_FILE: &str = "_segments.jsonl";
const SESSIONS_FILE: &str = "_sessions.jsonl";

fn stem(key: &SeriesKey) -> String {
    let mut s = key.name();
    if let Some(id) = &key.session_id {
        s.push('.');
        s.push_str(id);
    }
    for (k, v) in &key.labels {
        s.push('.');
        s.push_str(k);
        s.push('=');
        s.push_str(v);
    }
    s.chars().map(|c| if c.is_ascii_alphanumeric() || "._=-".contains(c) { c } else { '_' }).collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io { path: path.to_path_buf(), source }
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), PersistError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(&item).expect("store records serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PersistError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|source| PersistError::Json { path: path.to_path_buf(), line: n + 1, source })?,
        );
    }
    Ok(out)
}

impl FusionStore {
    /// Write every series and record table under `dir` (created if needed).
    /// Output bytes depend only on the store contents.
    pub fn save(&self, dir: &Path) -> Result<(), PersistError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let g = self.inner.read().unwrap();
        let mut used = BTreeSet::new();
        let mut index = Vec::new();
        for (key, points) in &g.series {
            let base = stem(key);
            let mut file = format!("{base}.jsonl");
            let mut n = 1;
            while !used.insert(file.clone()) {
                n += 1;
                file = format!("{base}~{n}.jsonl");
            }
            write_lines(
                &dir.join(&file),
                points.iter().map(|(&t, &value)| Point { t: super::key_time(t), value }),
            )?;
            index.push(IndexEntry { file, key: key.clone() });
        }
        let index_path = dir.join("index.json");
        let body = serde_json::to_string_pretty(&index).expect("index serializes");
        fs::write(&index_path, body + "\n").map_err(io_err(&index_path))?;
        write_lines(&dir.join(RADIO_FILE), g.radio.values())?;
        write_lines(&dir.join(LINK_FILE), g.link.values())?;
        write_lines(&dir.join(SEGMENTS_FILE), g.segments.values())?;
        write_lines(&dir.join(SESSIONS_FILE), g.sessions.values())
    }

    /// Rebuild a store written by [`save`](Self::save).
    pub fn load(dir: &Path) -> Result<FusionStore, PersistError> {
        let store = FusionStore::new();
        let table_err = |file: &str| {
            let path = dir.join(file);
            move |source| PersistError::Record { path, source }
        };
        for r in read_lines::<RadioSample>(&dir.join(RADIO_FILE))? {
            store.ingest_radio(r).map_err(table_err(RADIO_FILE))?;
        }
        for l in read_lines::<LinkSample>(&dir.join(LINK_FILE))? {
            store.ingest_link(l).map_err(table_err(LINK_FILE))?;
        }
        for s in read_lines::<SegmentRecord>(&dir.join(SEGMENTS_FILE))? {
            store.ingest_segment(s).map_err(table_err(SEGMENTS_FILE))?;
        }
        for e in read_lines::<SessionEvent>(&dir.join(SESSIONS_FILE))? {
            store.ingest_session(e).map_err(table_err(SESSIONS_FILE))?;
        }
        let index_path = dir.join("index.json");
        let index: Vec<IndexEntry> = if index_path.exists() {
            let body = fs::read_to_string(&index_path).map_err(io_err(&index_path))?;
            serde_json::from_str(&body).map_err(|source| PersistError::Json { path: index_path.clone(), line: 0, source })?
        } else {
            Vec::new()
        };
        {
            let mut g = store.inner.write().unwrap();
            let inner: &mut Inner = &mut g;
            for entry in index {
                let points: Vec<Point> = read_lines(&dir.join(&entry.file))?;
                let series: &mut BTreeMap<i64, f64> = inner.series.entry(entry.key).or_default();
                for p in points {
                    series.insert(super::time_key(p.t), p.value);
                }
            }
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{Layer, QoePoint};
    use crate::qoe::QoeScore;
    use crate::radio::{GeoPoint, RadioSource};

    #[test]
    fn round_trip() {
        let store = FusionStore::new();
        store
            .ingest_radio(RadioSample {
                t: 1.5,
                rsrp_dbm: -91.25,
                rsrq_db: -12.0,
                sinr_db: 3.5,
                position: Some(GeoPoint::new(43.29, -1.98)),
                source: RadioSource::Simulated,
            })
            .unwrap();
        store
            .ingest_qoe(QoePoint {
                session_id: "s/1".into(),
                score: QoeScore { t: 4.0, mos: 3.2, video_quality_mean: 3.4, stall_count: 1, stall_total_s: 2.0 },
            })
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        store.save(dir.path()).unwrap();
        assert!(dir.path().join("radio_rsrp_dbm.jsonl").exists());
        assert!(dir.path().join("qoe_mos.s_1.jsonl").exists());
        let loaded = FusionStore::load(dir.path()).unwrap();
        assert!(loaded == store);
        let key = SeriesKey::new(Layer::Qoe, "mos").session("s/1");
        assert_eq!(loaded.points(&key).unwrap(), vec![(4.0, 3.2)]);

        let again = tempfile::tempdir().unwrap();
        loaded.save(again.path()).unwrap();
        for name in ["index.json", "radio_rsrp_dbm.jsonl", "_radio.jsonl"] {
            assert_eq!(fs::read(dir.path().join(name)).unwrap(), fs::read(again.path().join(name)).unwrap());
        }
    }
}
