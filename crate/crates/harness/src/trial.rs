//! Simulated drive trial.
//!
//! A single coordinator owns simulated time. It starts a local origin and
//! the media proxy, then plays the dataset: each segment request goes over
//! real HTTP through the proxy, which timestamps it from a [`SimClock`]
//! whose link capacity follows the synthesized channel. The player's buffer
//! advances by the resulting download times. L3 counters are integrated
//! from the same link model, and QoE is computed from the proxy's records.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use edgewatch_core::abr::{abr_select, Ewma};
use edgewatch_core::clock::{SimClock, SimLink, Transfer};
use edgewatch_core::dash::{parse_mpd, Manifest, MpdError, SegmentError};
use edgewatch_core::fusion::{Observation, PersistError, QoePoint};
use edgewatch_core::playback::{infer_stalls, PlayerState};
use edgewatch_core::qoe::{Coefficients, P1203Model, QoeError, ScoredSegment, SegmentScore};
use edgewatch_core::radio::write_drive_trace;
use edgewatch_core::{FusionStore, GeoPoint, LinkSample, QoeScore, SegmentRecord, StallEvent};
use edgewatch_net::proxy::DEFAULT_SESSION_TIMEOUT_S;
use edgewatch_net::{server, Origin, Proxy, ProxyConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Scenario, ScenarioError};
use crate::trace::{synthesize, ChannelSample};

pub const RUN_FILE: &str = "run.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SESSION_FILE: &str = "session.jsonl";
pub const STORE_DIR: &str = "store";

/// Bytes of an HTTP GET request line and headers, counted as uplink traffic.
const REQUEST_BYTES: u64 = 200;
const EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("dataset: {0}")]
    Dataset(#[from] MpdError),
    #[error("segment addressing: {0}")]
    Segment(#[from] SegmentError),
    #[error("local server failed to start: {0}")]
    Startup(std::io::Error),
    #[error("http: {0}")]
    Http(#[from] reqwest::Error),
    #[error("{0}")]
    Protocol(String),
    #[error(transparent)]
    Qoe(#[from] QoeError),
    #[error(transparent)]
    Persist(#[from] PersistError),
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> TrialError + '_ {
    move |source| TrialError::Io { path: path.to_path_buf(), source }
}

/// Summary written as `run.json`; its presence marks a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub seed: u64,
    pub dataset: PathBuf,
    pub session_id: String,
    pub t_start: f64,
    pub t_end: f64,
    pub playback_complete: bool,
    pub antenna: GeoPoint,
    pub ladder_kbps: Vec<u32>,
    pub segments_requested: usize,
    pub segments_failed: usize,
    pub stalls: Vec<StallEvent>,
    pub stall_total_s: f64,
    pub final_mos: Option<f64>,
}

#[derive(Debug)]
pub struct Trial {
    pub manifest: RunManifest,
    pub dataset: Manifest,
    pub channel: Vec<ChannelSample>,
    pub records: Vec<SegmentRecord>,
    /// Stalls as the player experienced them.
    pub player_stalls: Vec<StallEvent>,
    /// Stalls recovered from the proxy's records.
    pub inferred_stalls: Vec<StallEvent>,
    pub transfers: Vec<Transfer>,
    pub link: Vec<LinkSample>,
    pub qoe: Vec<QoeScore>,
    pub store: Arc<FusionStore>,
}

/// L3 samples over whole seconds `(t0 + k − 1, t0 + k]` up to `t_end`.
pub fn link_samples(link: &SimLink, transfers: &[Transfer], t0: f64, t_end: f64) -> Vec<LinkSample> {
    let n = (t_end - t0 - EPS).ceil().max(0.0) as usize;
    (1..=n)
        .map(|k| {
            let (a, b) = (t0 + (k - 1) as f64, t0 + k as f64);
            let rx: f64 = transfers.iter().map(|tr| link.delivered_bytes(tr, a, b)).sum();
            let rx = rx.round() as u64;
            let requests = transfers.iter().filter(|tr| tr.t_request >= a && tr.t_request < b).count() as u64;
            LinkSample {
                t: b,
                rx_bytes_delta: rx,
                tx_bytes_delta: requests * REQUEST_BYTES,
                window_s: 1.0,
                rx_throughput_mbps: 8.0 * rx as f64 / 1e6,
            }
        })
        .collect()
}

async fn download(http: &reqwest::Client, url: reqwest::Url) -> Result<(u16, u64), TrialError> {
    let mut resp = http.get(url).send().await?;
    let status = resp.status().as_u16();
    let mut bytes = 0u64;
    while let Some(chunk) = resp.chunk().await? {
        bytes += chunk.len() as u64;
    }
    Ok((status, bytes))
}

/// Play the scenario's dataset along its route.
pub async fn run_trial(sc: &Scenario) -> Result<Trial, TrialError> {
    sc.validate()?;
    let dataset_path = sc.dataset_path();
    let dataset = parse_mpd(&std::fs::read(&dataset_path).map_err(io_at(&dataset_path))?)?;
    let channel = synthesize(sc)?;
    let (t0, t_stop) = sc.span();

    let mut sim = SimLink::new(t0, channel.iter().map(|c| c.capacity_mbps).collect());
    sim.latency_s = sc.link.latency_s;
    sim.overhead_ratio = sc.link.overhead_ratio;
    sim.header_bytes = sc.link.header_bytes;
    let link = Arc::new(sim);
    let clock = Arc::new(SimClock::new(link.clone(), t0));
    let store = Arc::new(FusionStore::new());
    for c in &channel {
        store.ingest(Observation::Radio(c.radio.clone())).map_err(|e| TrialError::Protocol(e.to_string()))?;
    }

    let origin = Origin::bind(&dataset).await.map_err(TrialError::Startup)?;
    let proxy = Proxy::new(ProxyConfig::new(origin.server.base_url()), clock.clone(), store.clone());
    let listener = server::bind(([127, 0, 0, 1], 0).into()).await.map_err(TrialError::Startup)?;
    let proxy_server = server::spawn(listener, proxy.router()).map_err(TrialError::Startup)?;
    let http = reqwest::Client::new();

    let mpd_url = format!("http://{}{}", proxy_server.addr, origin.mpd_url.path());
    let body = http.get(&mpd_url).send().await?.error_for_status()?.bytes().await?;
    let served = parse_mpd(&body)?;
    let session_id = proxy
        .sessions()
        .first()
        .map(|s| s.session_id.clone())
        .ok_or_else(|| TrialError::Protocol("manifest request opened no session".into()))?;

    let ladder = served.ladder_kbps();
    let seg_count = served.segment_count();
    let config = sc.playback(served.segment_duration_s());
    let media_duration = served.media_duration_s();
    let mut state = PlayerState::new(config, media_duration, t0);
    let mut ewma = Ewma::with_initial(sc.abr.ewma_alpha, sc.abr.initial_estimate_mbps);
    let mut transfers = Vec::new();
    let mut records = Vec::new();
    let mut index = 1;

    while index <= seg_count && state.now < t_stop {
        let (a, b) = served.segment_span_s(index);
        let seg_s = b - a;
        if state.playing && state.buffer_level_s + seg_s > sc.abr.buffer_target_s + EPS {
            let wait = state.buffer_level_s + seg_s - sc.abr.buffer_target_s;
            state.advance(wait.min(t_stop - state.now));
            continue;
        }
        let t = state.now;
        clock.set(t);
        // A stalled player cannot wait for a throughput sample: take the floor.
        let rung = if state.is_stalled() {
            0
        } else {
            abr_select(&ladder, ewma.value.unwrap_or(sc.abr.initial_estimate_mbps), sc.abr.safety)
        };
        let rep = &served.representations()[rung];
        let (status, _bytes) = download(&http, served.segment_url(&rep.id, index)?).await?;
        let rec = store
            .segments()
            .into_iter()
            .rev()
            .find(|r| r.session_id == session_id && r.segment_index == index && r.t_request == t)
            .ok_or_else(|| TrialError::Protocol(format!("no record for segment {index} (status {status})")))?;
        transfers.push(link.transfer(rec.t_request, rec.bytes).ok_or_else(|| {
            TrialError::Protocol(format!("segment {index} cannot complete on this link"))
        })?);
        state.advance(rec.t_complete - t);
        match rec.l7_throughput_mbps() {
            Some(l7) => {
                state.on_segment(seg_s);
                ewma.update(l7);
                index += 1;
            }
            None => state.advance(1.0),
        }
        records.push(rec);
    }
    if index > seg_count && state.playing {
        let rest = state.buffer_level_s.min(t_stop - state.now).max(0.0);
        state.advance(rest);
    }
    let t_end = state.now;
    state.close_open_stall(t_end);

    drop(http);
    proxy.expire_sessions(t_end + DEFAULT_SESSION_TIMEOUT_S + 1.0);
    let _ = proxy_server.shutdown().await;
    let _ = origin.server.shutdown().await;

    let link_series = link_samples(&link, &transfers, t0, t_end);
    for s in &link_series {
        store.ingest(Observation::Link(s.clone())).map_err(|e| TrialError::Protocol(e.to_string()))?;
    }

    let model = P1203Model::<f64>::new(&Coefficients::default(), sc.qoe.device);
    let mut scored = Vec::new();
    for r in records.iter().filter(|r| r.l7_throughput_mbps().is_some()) {
        let rep = served
            .representation(&r.rep_id)
            .ok_or_else(|| TrialError::Protocol(format!("record names unknown representation {}", r.rep_id)))?;
        let (a, b) = served.segment_span_s(r.segment_index);
        let score = model.segment_video_quality(
            f64::from(rep.bitrate_kbps),
            rep.width,
            rep.height,
            rep.framerate,
            sc.qoe.display(),
        )?;
        scored.push(ScoredSegment { t_complete: r.t_complete, segment: SegmentScore { media_start_s: a, duration_s: b - a, score } });
    }
    let arrivals: Vec<(f64, f64)> = scored.iter().map(|s| (s.t_complete, s.segment.duration_s)).collect();
    let inferred = infer_stalls(config, media_duration, t0, &arrivals, t_end);
    let qoe = if scored.is_empty() { Vec::new() } else { model.qoe_series(&scored, &inferred, t0, sc.qoe.step_s)? };
    for q in &qoe {
        store
            .ingest(Observation::Qoe(QoePoint { session_id: session_id.clone(), score: *q }))
            .map_err(|e| TrialError::Protocol(e.to_string()))?;
    }

    let manifest = RunManifest {
        scenario: sc.name.clone(),
        seed: sc.seed,
        dataset: sc.dataset.clone(),
        session_id,
        t_start: t0,
        t_end,
        playback_complete: state.ended,
        antenna: sc.antenna,
        ladder_kbps: ladder,
        segments_requested: records.len(),
        segments_failed: records.iter().filter(|r| r.l7_throughput_mbps().is_none()).count(),
        stall_total_s: state.stall_total_s(),
        stalls: state.stall_events.clone(),
        final_mos: qoe.last().map(|q| q.mos),
    };
    Ok(Trial {
        manifest,
        dataset: served,
        channel,
        records,
        player_stalls: state.stall_events,
        inferred_stalls: inferred,
        transfers,
        link: link_series,
        qoe,
        store,
    })
}

/// [`run_trial`] on a private runtime.
pub fn run_trial_blocking(sc: &Scenario) -> Result<Trial, TrialError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(TrialError::Startup)?;
    rt.block_on(run_trial(sc))
}

impl Trial {
    /// Session observations in time order, one JSON object per line.
    pub fn session_lines(&self) -> Vec<Observation> {
        let id = &self.manifest.session_id;
        let events = self.store.session_events();
        let mut out: Vec<Observation> = events
            .iter()
            .filter(|e| &e.session_id == id && e.t <= self.manifest.t_start + EPS)
            .cloned()
            .map(Observation::Session)
            .collect();
        out.extend(self.records.iter().cloned().map(Observation::Segment));
        out.extend(self.qoe.iter().map(|q| Observation::Qoe(QoePoint { session_id: id.clone(), score: *q })));
        out.extend(
            events
                .iter()
                .filter(|e| &e.session_id == id && e.t > self.manifest.t_start + EPS)
                .cloned()
                .map(Observation::Session),
        );
        out
    }

    /// Write `run.json`, `trace.csv`, `session.jsonl` and `store/` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<(), TrialError> {
        std::fs::create_dir_all(dir).map_err(io_at(dir))?;

        let path = dir.join(TRACE_FILE);
        let radio: Vec<_> = self.channel.iter().map(|c| c.radio.clone()).collect();
        let mut buf = Vec::new();
        write_drive_trace(&mut buf, &radio).map_err(io_at(&path))?;
        std::fs::write(&path, buf).map_err(io_at(&path))?;

        let path = dir.join(SESSION_FILE);
        let mut buf = Vec::new();
        for line in self.session_lines() {
            serde_json::to_writer(&mut buf, &line).expect("observations serialize");
            buf.push(b'\n');
        }
        std::fs::write(&path, buf).map_err(io_at(&path))?;

        self.store.save(&dir.join(STORE_DIR))?;

        let path = dir.join(RUN_FILE);
        let mut f = std::fs::File::create(&path).map_err(io_at(&path))?;
        serde_json::to_writer_pretty(&mut f, &self.manifest).expect("run manifest serializes");
        f.write_all(b"\n").map_err(io_at(&path))?;
        Ok(())
    }
}

pub fn read_run_manifest(dir: &Path) -> Result<RunManifest, TrialError> {
    let path = dir.join(RUN_FILE);
    let text = std::fs::read_to_string(&path).map_err(io_at(&path))?;
    serde_json::from_str(&text).map_err(|e| TrialError::Protocol(format!("{}: {e}", path.display())))
}
