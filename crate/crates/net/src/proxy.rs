//! Edge media proxy.
//!
//! Requests ending in `.mpd` are manifest requests: the manifest is fetched
//! from the origin, its `BaseURL` rewritten to point at this proxy, and a
//! session keyed by client address and manifest path is opened or refreshed.
//! Requests under a known manifest's `BaseURL` that resolve to a segment are
//! relayed as a stream and produce one [`SegmentRecord`]. Anything else is
//! relayed without a record.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::pin::Pin;
use std::sync::{Arc, Mutex};
use std::task::{Context, Poll};
use std::time::Duration;

use axum::body::Body;
use axum::extract::{ConnectInfo, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use bytes::Bytes;
use edgewatch_core::clock::TransferClock;
use edgewatch_core::dash::{parse_mpd, serialize_mpd, Manifest};
use edgewatch_core::fusion::{FusionStore, Observation};
use edgewatch_core::media::{SegmentRecord, SessionEvent, SessionEventKind};
use futures::{Stream, StreamExt};
use url::Url;

pub const DEFAULT_SESSION_TIMEOUT_S: f64 = 30.0;

/// Destination of the proxy's observations.
pub trait RecordSink: Send + Sync {
    fn segment(&self, record: SegmentRecord);
    fn session(&self, event: SessionEvent);
}

impl RecordSink for FusionStore {
    fn segment(&self, record: SegmentRecord) {
        if let Err(e) = self.ingest(Observation::Segment(record)) {
            tracing::warn!(error = %e, "segment record rejected");
        }
    }

    fn session(&self, event: SessionEvent) {
        if let Err(e) = self.ingest(Observation::Session(event)) {
            tracing::warn!(error = %e, "session event rejected");
        }
    }
}

impl<T: RecordSink + ?Sized> RecordSink for Arc<T> {
    fn segment(&self, record: SegmentRecord) {
        (**self).segment(record)
    }

    fn session(&self, event: SessionEvent) {
        (**self).session(event)
    }
}

#[derive(Debug, Clone)]
pub struct ProxyConfig {
    /// Where manifests are fetched from; the request path is resolved against it.
    pub origin: Url,
    pub session_timeout_s: f64,
    /// Origin advertised in rewritten manifests. Taken from the `Host`
    /// header when unset.
    pub public_url: Option<Url>,
}

impl ProxyConfig {
    pub fn new(origin: Url) -> Self {
        Self { origin, session_timeout_s: DEFAULT_SESSION_TIMEOUT_S, public_url: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    pub client_key: String,
    pub opened_at: f64,
    pub last_activity: f64,
    pub manifest_path: String,
}

#[derive(Debug, Default)]
struct Table {
    sessions: HashMap<String, Session>,
    /// Upstream manifests by request path.
    manifests: Vec<(String, Manifest)>,
    next_id: u64,
}

pub struct Proxy {
    config: ProxyConfig,
    clock: Arc<dyn TransferClock>,
    sink: Arc<dyn RecordSink>,
    client: reqwest::Client,
    table: Mutex<Table>,
}

impl std::fmt::Debug for Proxy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Proxy").field("config", &self.config).finish_non_exhaustive()
    }
}

fn client_key(peer: &SocketAddr, mpd_path: &str) -> String {
    format!("{}{}", peer.ip(), mpd_path)
}

fn finite_or(t: f64, fallback: f64) -> f64 {
    if t.is_finite() {
        t
    } else {
        fallback
    }
}

impl Proxy {
    pub fn new(config: ProxyConfig, clock: Arc<dyn TransferClock>, sink: Arc<dyn RecordSink>) -> Arc<Proxy> {
        let client = reqwest::Client::builder()
            .connect_timeout(Duration::from_secs(10))
            .build()
            .expect("http client builds");
        Arc::new(Proxy { config, clock, sink, client, table: Mutex::new(Table::default()) })
    }

    pub fn router(self: &Arc<Self>) -> Router {
        Router::new().fallback(handle).with_state(self.clone())
    }

    pub fn sessions(&self) -> Vec<Session> {
        let mut v: Vec<Session> = self.table.lock().unwrap().sessions.values().cloned().collect();
        v.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        v
    }

    /// Close sessions idle for longer than the timeout at `now`.
    pub fn expire_sessions(&self, now: f64) -> Vec<String> {
        let closed: Vec<Session> = {
            let mut table = self.table.lock().unwrap();
            let timeout = self.config.session_timeout_s;
            let stale: Vec<String> = table
                .sessions
                .iter()
                .filter(|(_, s)| now - s.last_activity > timeout)
                .map(|(k, _)| k.clone())
                .collect();
            stale.iter().filter_map(|k| table.sessions.remove(k)).collect()
        };
        let mut ids = Vec::with_capacity(closed.len());
        for s in closed {
            self.sink.session(SessionEvent {
                session_id: s.session_id.clone(),
                client_key: s.client_key,
                kind: SessionEventKind::Close,
                t: now,
            });
            ids.push(s.session_id);
        }
        ids.sort();
        ids
    }

    /// Expire sessions every `period` until the returned task is aborted.
    pub fn spawn_expiry(self: &Arc<Self>, period: Duration) -> tokio::task::JoinHandle<()> {
        let proxy = self.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                proxy.expire_sessions(proxy.clock.now());
            }
        })
    }

    fn open_or_refresh(&self, key: String, mpd_path: &str, now: f64) -> String {
        let mut events = Vec::new();
        let id = {
            let mut table = self.table.lock().unwrap();
            let timeout = self.config.session_timeout_s;
            match table.sessions.get_mut(&key) {
                Some(s) if now - s.last_activity <= timeout => {
                    s.last_activity = s.last_activity.max(now);
                    s.session_id.clone()
                }
                _ => {
                    if let Some(old) = table.sessions.remove(&key) {
                        events.push(SessionEvent {
                            session_id: old.session_id,
                            client_key: old.client_key,
                            kind: SessionEventKind::Close,
                            t: now,
                        });
                    }
                    table.next_id += 1;
                    let id = format!("s-{:06}", table.next_id);
                    let session = Session {
                        session_id: id.clone(),
                        client_key: key.clone(),
                        opened_at: now,
                        last_activity: now,
                        manifest_path: mpd_path.to_string(),
                    };
                    table.sessions.insert(key.clone(), session);
                    events.push(SessionEvent { session_id: id.clone(), client_key: key, kind: SessionEventKind::Open, t: now });
                    id
                }
            }
        };
        for e in events {
            self.sink.session(e);
        }
        id
    }

    /// Session id for a segment request, refreshing the session. Unknown or
    /// idle-expired clients get an orphan id.
    fn touch(&self, key: &str, now: f64) -> String {
        let mut table = self.table.lock().unwrap();
        let timeout = self.config.session_timeout_s;
        match table.sessions.get_mut(key) {
            Some(s) if now - s.last_activity <= timeout => {
                s.last_activity = s.last_activity.max(now);
                s.session_id.clone()
            }
            _ => format!("orphan-{key}"),
        }
    }

    fn finish(&self, key: &str, session_id: &str, now: f64) {
        let mut table = self.table.lock().unwrap();
        if let Some(s) = table.sessions.get_mut(key).filter(|s| s.session_id == session_id) {
            s.last_activity = s.last_activity.max(now);
        }
    }

    fn remember(&self, path: &str, manifest: Manifest) {
        let mut table = self.table.lock().unwrap();
        match table.manifests.iter_mut().find(|(p, _)| p == path) {
            Some(entry) => entry.1 = manifest,
            None => table.manifests.push((path.to_string(), manifest)),
        }
    }

    /// `(mpd path, upstream URL, rep id, bitrate, index)` for a segment path.
    fn resolve(&self, path: &str) -> Option<(String, Url, String, u32, u64)> {
        let table = self.table.lock().unwrap();
        table.manifests.iter().find_map(|(mpd, m)| {
            let rel = path.strip_prefix(m.base_url().path())?;
            let (rep, index) = m.resolve_segment_path(rel)?;
            let upstream = m.base_url().join(rel).ok()?;
            Some((mpd.clone(), upstream, rep.id.clone(), rep.bitrate_kbps, index))
        })
    }

    /// Upstream URL of a proxied request that is not a known segment.
    fn upstream_for(&self, uri: &Uri) -> Option<Url> {
        let path = uri.path();
        let table = self.table.lock().unwrap();
        let from_manifest = table
            .manifests
            .iter()
            .find_map(|(_, m)| path.strip_prefix(m.base_url().path()).and_then(|rel| m.base_url().join(rel).ok()));
        drop(table);
        let mut url = match from_manifest {
            Some(u) => u,
            None => self.config.origin.join(path.trim_start_matches('/')).ok()?,
        };
        url.set_query(uri.query());
        Some(url)
    }

    fn public_origin(&self, headers: &HeaderMap) -> Option<Url> {
        if let Some(u) = &self.config.public_url {
            return Some(u.clone());
        }
        let host = headers.get(header::HOST)?.to_str().ok()?;
        Url::parse(&format!("http://{host}/")).ok()
    }

    async fn manifest(&self, peer: SocketAddr, uri: &Uri, headers: &HeaderMap) -> Response {
        let path = uri.path();
        let Ok(mut upstream) = self.config.origin.join(path.trim_start_matches('/')) else {
            return (StatusCode::BAD_REQUEST, "unusable manifest path\n").into_response();
        };
        upstream.set_query(uri.query());
        let resp = match self.client.get(upstream).send().await {
            Ok(r) => r,
            Err(e) => return (StatusCode::BAD_GATEWAY, format!("origin unreachable: {e}\n")).into_response(),
        };
        let status = resp.status();
        let body = match resp.bytes().await {
            Ok(b) => b,
            Err(e) => return (StatusCode::BAD_GATEWAY, format!("origin read failed: {e}\n")).into_response(),
        };
        if !status.is_success() {
            return (status_of(status.as_u16()), body).into_response();
        }
        let Ok(manifest) = parse_mpd(&body) else {
            return (StatusCode::BAD_GATEWAY, "upstream manifest invalid\n").into_response();
        };
        let Some(public) = self.public_origin(headers) else {
            return (StatusCode::BAD_REQUEST, "no Host header\n").into_response();
        };
        let rewritten = match manifest.rewrite_base_url(&public) {
            Ok(m) => m,
            Err(e) => return (StatusCode::BAD_GATEWAY, format!("cannot rewrite manifest: {e}\n")).into_response(),
        };
        self.remember(path, manifest);
        self.open_or_refresh(client_key(&peer, path), path, self.clock.now());
        ([(header::CONTENT_TYPE, "application/dash+xml")], serialize_mpd(&rewritten)).into_response()
    }

    async fn segment(self: &Arc<Self>, peer: SocketAddr, target: (String, Url, String, u32, u64)) -> Response {
        let (mpd_path, upstream, rep_id, rep_bitrate_kbps, segment_index) = target;
        let key = client_key(&peer, &mpd_path);
        let t_request = self.clock.now();
        let session_id = self.touch(&key, t_request);
        let pending = Pending {
            proxy: self.clone(),
            key,
            record: SegmentRecord {
                session_id,
                rep_id,
                rep_bitrate_kbps,
                segment_index,
                bytes: 0,
                t_request,
                t_first_byte: t_request,
                t_complete: t_request,
                origin_status: 0,
            },
            first_byte: false,
            expected: None,
        };
        match self.client.get(upstream).send().await {
            Ok(resp) => {
                let mut pending = pending;
                pending.record.origin_status = resp.status().as_u16();
                pending.expected = resp.content_length();
                relay(resp, Some(pending))
            }
            Err(e) => {
                let mut pending = pending;
                pending.record.origin_status = StatusCode::BAD_GATEWAY.as_u16();
                pending.emit();
                (StatusCode::BAD_GATEWAY, format!("origin unreachable: {e}\n")).into_response()
            }
        }
    }

    async fn passthrough(&self, uri: &Uri) -> Response {
        let Some(upstream) = self.upstream_for(uri) else {
            return StatusCode::NOT_FOUND.into_response();
        };
        match self.client.get(upstream).send().await {
            Ok(resp) => relay(resp, None),
            Err(e) => (StatusCode::BAD_GATEWAY, format!("origin unreachable: {e}\n")).into_response(),
        }
    }
}

fn status_of(code: u16) -> StatusCode {
    StatusCode::from_u16(code).unwrap_or(StatusCode::BAD_GATEWAY)
}

async fn handle(
    State(proxy): State<Arc<Proxy>>,
    ConnectInfo(peer): ConnectInfo<SocketAddr>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    if method != Method::GET {
        return StatusCode::METHOD_NOT_ALLOWED.into_response();
    }
    if uri.path().ends_with(".mpd") {
        return proxy.manifest(peer, &uri, &headers).await;
    }
    match proxy.resolve(uri.path()) {
        Some(target) => proxy.segment(peer, target).await,
        None => proxy.passthrough(&uri).await,
    }
}

fn relay(resp: reqwest::Response, pending: Option<Pending>) -> Response {
    let status = status_of(resp.status().as_u16());
    let mut out = HeaderMap::new();
    for name in [header::CONTENT_TYPE, header::CONTENT_LENGTH] {
        if let Some(v) = resp.headers().get(name.as_str()).and_then(|v| HeaderValue::from_bytes(v.as_bytes()).ok()) {
            out.insert(name, v);
        }
    }
    let stream = RecordStream { inner: resp.bytes_stream().boxed(), pending };
    (status, out, Body::from_stream(stream)).into_response()
}

/// Record under construction for one relayed segment.
struct Pending {
    proxy: Arc<Proxy>,
    key: String,
    record: SegmentRecord,
    first_byte: bool,
    expected: Option<u64>,
}

impl Pending {
    fn on_chunk(&mut self, len: usize) {
        let clock = &self.proxy.clock;
        if !self.first_byte && len > 0 {
            self.first_byte = true;
            let t = clock.first_byte_at(self.record.t_request);
            self.record.t_first_byte = finite_or(t, clock.now()).max(self.record.t_request);
        }
        self.record.bytes += len as u64;
    }

    fn emit(mut self) {
        let clock = &self.proxy.clock;
        let r = &mut self.record;
        if !self.first_byte {
            r.t_first_byte = finite_or(clock.first_byte_at(r.t_request), clock.now()).max(r.t_request);
        }
        r.t_complete = finite_or(clock.complete_at(r.t_request, r.bytes), clock.now()).max(r.t_first_byte);
        self.proxy.finish(&self.key, &r.session_id, r.t_complete);
        self.proxy.sink.segment(self.record);
    }
}

type ByteStream = Pin<Box<dyn Stream<Item = reqwest::Result<Bytes>> + Send>>;

/// Forwards origin bytes unchanged and emits the segment record exactly
/// once: when the announced length is reached (before the last chunk goes
/// out), at end of stream, on an upstream error, or when the client goes away.
struct RecordStream {
    inner: ByteStream,
    pending: Option<Pending>,
}

impl Stream for RecordStream {
    type Item = reqwest::Result<Bytes>;

    fn poll_next(mut self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Option<Self::Item>> {
        let item = futures::ready!(self.inner.poll_next_unpin(cx));
        match &item {
            Some(Ok(chunk)) => {
                if let Some(p) = self.pending.as_mut() {
                    p.on_chunk(chunk.len());
                    if p.expected.is_some_and(|n| p.record.bytes >= n) {
                        self.pending.take().expect("present").emit();
                    }
                }
            }
            Some(Err(_)) | None => {
                if let Some(p) = self.pending.take() {
                    p.emit();
                }
            }
        }
        Poll::Ready(item)
    }
}

impl Drop for RecordStream {
    fn drop(&mut self) {
        if let Some(p) = self.pending.take() {
            p.emit();
        }
    }
}
