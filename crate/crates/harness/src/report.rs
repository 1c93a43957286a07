//! Figure data from a completed run directory.
//!
//! | output             | file                   | columns |
//! |--------------------|------------------------|---------|
//! | `bitrate`          | `bitrate.csv`          | `t_s,selected_bitrate_kbps` |
//! | `stalls`           | `stalls.csv`           | `t_s,stall_total_s` |
//! | `qoe`              | `qoe.csv`              | `t_s,mos,video_quality,stall_count,stall_total_s` |
//! | `throughput_l3_l7` | `throughput_l3_l7.csv` | `t_s,l3_mbps,l7_mbps` (empty cell when not sampled) |
//! | `rf`               | `rf.csv`               | `t_s,rsrp_dbm,rsrq_db,sinr_db,lat_deg,lon_deg` |
//! | `coverage`         | `coverage.geojson`     | GeoJSON FeatureCollection |
//!
//! With `png` or `svg` formats a chart with the same stem is written too.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use edgewatch_core::coverage::{build_coverage, to_geojson, CoverageCell};
use edgewatch_core::fusion::{FusionStore, Layer, SeriesKey};
use edgewatch_core::SegmentRecord;
use thiserror::Error;

use crate::analysis::{bitrate_series, stall_total_series};
use crate::plot::{chart_png, chart_svg, coverage_png, coverage_svg, Chart, Series};
use crate::trial::{read_run_manifest, RunManifest, TrialError, STORE_DIR};

pub const DEFAULT_CELL_SIZE_M: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    Bitrate,
    Stalls,
    Qoe,
    ThroughputL3L7,
    Rf,
    Coverage,
}

impl Output {
    pub const ALL: [Output; 6] =
        [Output::Bitrate, Output::Stalls, Output::Qoe, Output::ThroughputL3L7, Output::Rf, Output::Coverage];

    pub fn name(&self) -> &'static str {
        match self {
            Output::Bitrate => "bitrate",
            Output::Stalls => "stalls",
            Output::Qoe => "qoe",
            Output::ThroughputL3L7 => "throughput_l3_l7",
            Output::Rf => "rf",
            Output::Coverage => "coverage",
        }
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown output {s:?}; expected one of bitrate, stalls, qoe, throughput_l3_l7, rf, coverage"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Csv,
    Png,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "png" => Ok(Format::Png),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format {s:?}; expected csv, png or svg")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportSpec {
    pub run_dir: PathBuf,
    pub out_dir: PathBuf,
    pub outputs: Vec<Output>,
    pub formats: Vec<Format>,
    pub cell_size_m: f64,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no outputs requested")]
    NoOutputs,
    #[error("{0} is not a completed run: {1}")]
    NotARun(PathBuf, TrialError),
    #[error(transparent)]
    Store(#[from] edgewatch_core::fusion::PersistError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Default)]
pub struct ReportOutcome {
    pub written: Vec<PathBuf>,
    /// One line per output that could not be produced.
    pub warnings: Vec<String>,
}

/// What a report is computed from.
pub struct RunData {
    pub manifest: RunManifest,
    pub store: FusionStore,
}

impl RunData {
    pub fn load(run_dir: &Path) -> Result<RunData, ReportError> {
        let manifest = read_run_manifest(run_dir).map_err(|e| ReportError::NotARun(run_dir.to_path_buf(), e))?;
        let store = FusionStore::load(&run_dir.join(STORE_DIR))?;
        Ok(RunData { manifest, store })
    }

    fn records(&self) -> Vec<SegmentRecord> {
        let mut v: Vec<SegmentRecord> =
            self.store.segments().into_iter().filter(|r| r.session_id == self.manifest.session_id).collect();
        v.sort_by(|a, b| a.t_request.total_cmp(&b.t_request));
        v
    }

    fn qoe_points(&self, metric: &str) -> Vec<(f64, f64)> {
        let key = SeriesKey::new(Layer::Qoe, metric).session(self.manifest.session_id.clone());
        self.store.points(&key).unwrap_or_default()
    }
}

pub struct Table {
    pub csv: String,
    pub chart: Chart,
}

fn header(cols: &[&str]) -> String {
    let mut s = cols.join(",");
    s.push('\n');
    s
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map(|x| format!("{x:.decimals$}")).unwrap_or_default()
}

pub fn bitrate_table(d: &RunData) -> Option<Table> {
    let records = d.records();
    if records.is_empty() {
        return None;
    }
    let s = bitrate_series(&records, d.manifest.t_start, d.manifest.t_end);
    let mut csv = header(&["t_s", "selected_bitrate_kbps"]);
    for (t, k) in &s {
        writeln!(csv, "{t:.3},{k}").unwrap();
    }
    let points = s.iter().map(|&(t, k)| (t, f64::from(k) / 1000.0)).collect();
    Some(Table {
        csv,
        chart: Chart { title: "Selected bitrate (Mbps)".into(), series: vec![Series { name: "bitrate".into(), points, step: true }] },
    })
}

pub fn stalls_table(d: &RunData) -> Option<Table> {
    let s = stall_total_series(&d.manifest.stalls, d.manifest.t_start, d.manifest.t_end);
    if s.is_empty() {
        return None;
    }
    let mut csv = header(&["t_s", "stall_total_s"]);
    for (t, v) in &s {
        writeln!(csv, "{t:.3},{v:.3}").unwrap();
    }
    Some(Table {
        csv,
        chart: Chart { title: "Total stall duration (s)".into(), series: vec![Series { name: "stall".into(), points: s, step: false }] },
    })
}

pub fn qoe_table(d: &RunData) -> Option<Table> {
    let mos = d.qoe_points("mos");
    if mos.is_empty() {
        return None;
    }
    let lookup = |m: &str| -> BTreeMap<u64, f64> { d.qoe_points(m).into_iter().map(|(t, v)| (t.to_bits(), v)).collect() };
    let (vq, count, total) = (lookup("video_quality"), lookup("stall_count"), lookup("stall_total_s"));
    let mut csv = header(&["t_s", "mos", "video_quality", "stall_count", "stall_total_s"]);
    for &(t, m) in &mos {
        let k = t.to_bits();
        writeln!(
            csv,
            "{t:.3},{m:.4},{},{},{}",
            opt(vq.get(&k).copied(), 4),
            opt(count.get(&k).copied(), 0),
            opt(total.get(&k).copied(), 3)
        )
        .unwrap();
    }
    Some(Table {
        csv,
        chart: Chart { title: "QoE (MOS)".into(), series: vec![Series { name: "mos".into(), points: mos, step: false }] },
    })
}

pub fn throughput_table(d: &RunData) -> Option<Table> {
    let link = d.store.link_samples();
    let records = d.records();
    if link.is_empty() && records.is_empty() {
        return None;
    }
    // Keyed by microseconds so equal instants share a row.
    let mut rows: BTreeMap<i64, (f64, Option<f64>, Option<f64>)> = BTreeMap::new();
    let key = |t: f64| (t * 1e6).round() as i64;
    for s in &link {
        rows.entry(key(s.t)).or_insert((s.t, None, None)).1 = Some(s.rx_throughput_mbps);
    }
    let mut l7 = Vec::new();
    for r in &records {
        if let Some(m) = r.l7_throughput_mbps() {
            rows.entry(key(r.t_complete)).or_insert((r.t_complete, None, None)).2 = Some(m);
            l7.push((r.t_complete, m));
        }
    }
    let mut csv = header(&["t_s", "l3_mbps", "l7_mbps"]);
    for (t, l3, l7) in rows.values() {
        writeln!(csv, "{t:.3},{},{}", opt(*l3, 3), opt(*l7, 3)).unwrap();
    }
    let l3 = link.iter().map(|s| (s.t, s.rx_throughput_mbps)).collect();
    Some(Table {
        csv,
        chart: Chart {
            title: "Throughput (Mbps)".into(),
            series: vec![
                Series { name: "L3".into(), points: l3, step: false },
                Series { name: "L7".into(), points: l7, step: false },
            ],
        },
    })
}

pub fn rf_table(d: &RunData) -> Option<Table> {
    let radio = d.store.radio_samples();
    if radio.is_empty() {
        return None;
    }
    let mut csv = header(&["t_s", "rsrp_dbm", "rsrq_db", "sinr_db", "lat_deg", "lon_deg"]);
    for s in &radio {
        let (lat, lon) = s.position.map(|p| (Some(p.lat), Some(p.lon))).unwrap_or((None, None));
        writeln!(csv, "{:.3},{:.2},{:.2},{:.2},{},{}", s.t, s.rsrp_dbm, s.rsrq_db, s.sinr_db, opt(lat, 6), opt(lon, 6)).unwrap();
    }
    let series = |name: &str, f: fn(&edgewatch_core::RadioSample) -> f64| Series {
        name: name.into(),
        points: radio.iter().map(|s| (s.t, f(s))).collect(),
        step: false,
    };
    Some(Table {
        csv,
        chart: Chart {
            title: "RSRP (dBm), RSRQ (dB), SINR (dB)".into(),
            series: vec![series("RSRP", |s| s.rsrp_dbm), series("RSRQ", |s| s.rsrq_db), series("SINR", |s| s.sinr_db)],
        },
    })
}

pub fn coverage_cells(d: &RunData, cell_size_m: f64) -> Result<Vec<CoverageCell>, String> {
    build_coverage(&d.store.radio_samples(), cell_size_m).map_err(|e| e.to_string())
}

fn write(path: PathBuf, bytes: &[u8], out: &mut ReportOutcome) -> Result<(), ReportError> {
    std::fs::write(&path, bytes).map_err(|source| ReportError::Io { path: path.clone(), source })?;
    out.written.push(path);
    Ok(())
}

pub fn report(spec: &ReportSpec) -> Result<ReportOutcome, ReportError> {
    if spec.outputs.is_empty() {
        return Err(ReportError::NoOutputs);
    }
    let data = RunData::load(&spec.run_dir)?;
    std::fs::create_dir_all(&spec.out_dir).map_err(|source| ReportError::Io { path: spec.out_dir.clone(), source })?;
    let mut outputs = spec.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let mut formats = spec.formats.clone();
    if formats.is_empty() {
        formats.push(Format::Csv);
    }
    formats.sort();
    formats.dedup();

    let mut out = ReportOutcome::default();
    for o in outputs {
        let stem = o.name();
        if o == Output::Coverage {
            match coverage_cells(&data, spec.cell_size_m) {
                Ok(cells) => {
                    write(spec.out_dir.join("coverage.geojson"), &to_geojson(&cells), &mut out)?;
                    for f in &formats {
                        match f {
                            Format::Csv => {}
                            Format::Png => write(spec.out_dir.join("coverage.png"), &coverage_png(&cells), &mut out)?,
                            Format::Svg => write(spec.out_dir.join("coverage.svg"), coverage_svg(&cells).as_bytes(), &mut out)?,
                        }
                    }
                }
                Err(e) => out.warnings.push(format!("coverage: {e}")),
            }
            continue;
        }
        let table = match o {
            Output::Bitrate => bitrate_table(&data),
            Output::Stalls => stalls_table(&data),
            Output::Qoe => qoe_table(&data),
            Output::ThroughputL3L7 => throughput_table(&data),
            Output::Rf => rf_table(&data),
            Output::Coverage => unreachable!(),
        };
        let Some(table) = table else {
            out.warnings.push(format!("{stem}: no data in run"));
            continue;
        };
        write(spec.out_dir.join(format!("{stem}.csv")), table.csv.as_bytes(), &mut out)?;
        for f in &formats {
            match f {
                Format::Csv => {}
                Format::Png => write(spec.out_dir.join(format!("{stem}.png")), &chart_png(&table.chart), &mut out)?,
                Format::Svg => write(spec.out_dir.join(format!("{stem}.svg")), chart_svg(&table.chart).as_bytes(), &mut out)?,
            }
        }
    }
    Ok(out)
}
