//! HTTP front of the fusion store.
//!
//! ```text
//! POST /ingest/radio     RadioSample   or [RadioSample]
//! POST /ingest/link      LinkSample    or [LinkSample]
//! POST /ingest/segment   SegmentRecord or [SegmentRecord]
//! POST /ingest/qoe       QoePoint      or [QoePoint]
//! POST /ingest/session   SessionEvent  or [SessionEvent]
//! GET  /metrics          exposition page
//! GET  /query?layer=L1&metric=rsrp_dbm[&session=..]&t0=..&t1=..&step=..
//! GET  /segments[?session=..]
//! ```

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use edgewatch_core::fusion::{FusionStore, IngestError, Layer, Observation, QoePoint, SeriesKey};
use edgewatch_core::media::{SegmentRecord, SessionEvent};
use edgewatch_core::radio::{LinkSample, RadioSample};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct IngestReply {
    pub accepted: usize,
    pub duplicates: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IngestFailure {
    pub error: String,
    pub index: usize,
}

pub fn router(store: Arc<FusionStore>) -> Router {
    Router::new()
        .route("/ingest/:kind", post(ingest))
        .route("/metrics", get(metrics))
        .route("/query", get(query))
        .route("/segments", get(segments))
        .with_state(store)
}

const KINDS: [&str; 5] = ["radio", "link", "segment", "qoe", "session"];

fn one_or_many(body: Value) -> Vec<Value> {
    match body {
        Value::Array(items) => items,
        other => vec![other],
    }
}

fn decode(kind: &str, v: Value) -> Result<Observation, String> {
    let parsed = match kind {
        "radio" => serde_json::from_value::<RadioSample>(v).map(Observation::Radio),
        "link" => serde_json::from_value::<LinkSample>(v).map(Observation::Link),
        "segment" => serde_json::from_value::<SegmentRecord>(v).map(Observation::Segment),
        "qoe" => serde_json::from_value::<QoePoint>(v).map(Observation::Qoe),
        "session" => serde_json::from_value::<SessionEvent>(v).map(Observation::Session),
        _ => return Err(format!("unknown ingestion kind {kind:?}")),
    };
    parsed.map_err(|e| e.to_string())
}

async fn ingest(State(store): State<Arc<FusionStore>>, Path(kind): Path<String>, Json(body): Json<Value>) -> Response {
    if !KINDS.contains(&kind.as_str()) {
        let error = format!("unknown ingestion kind {kind:?}");
        return (StatusCode::NOT_FOUND, Json(IngestFailure { error, index: 0 })).into_response();
    }
    let mut reply = IngestReply { accepted: 0, duplicates: 0 };
    for (index, item) in one_or_many(body).into_iter().enumerate() {
        let obs = match decode(&kind, item) {
            Ok(o) => o,
            Err(error) => return (StatusCode::BAD_REQUEST, Json(IngestFailure { error, index })).into_response(),
        };
        match store.ingest(obs) {
            Ok(ack) => {
                reply.accepted += 1;
                reply.duplicates += usize::from(ack.duplicate);
            }
            Err(IngestError::Invalid(e)) => {
                return (StatusCode::UNPROCESSABLE_ENTITY, Json(IngestFailure { error: e.to_string(), index }))
                    .into_response();
            }
        }
    }
    Json(reply).into_response()
}

async fn metrics(State(store): State<Arc<FusionStore>>) -> Response {
    ([(header::CONTENT_TYPE, "text/plain; version=0.0.4")], store.exposition()).into_response()
}

#[derive(Debug, Deserialize)]
pub struct QueryParams {
    pub layer: Layer,
    pub metric: String,
    pub session: Option<String>,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

async fn query(State(store): State<Arc<FusionStore>>, Query(p): Query<QueryParams>) -> Response {
    let mut key = SeriesKey::new(p.layer, p.metric);
    key.session_id = p.session;
    match store.query_range(&key, p.t0, p.t1, p.step) {
        Ok(result) => Json(result).into_response(),
        Err(e) => (StatusCode::BAD_REQUEST, e.to_string()).into_response(),
    }
}

#[derive(Debug, Deserialize)]
struct SegmentsParams {
    session: Option<String>,
}

async fn segments(State(store): State<Arc<FusionStore>>, Query(p): Query<SegmentsParams>) -> Json<Vec<SegmentRecord>> {
    let all = store.segments();
    Json(match p.session {
        Some(s) => all.into_iter().filter(|r| r.session_id == s).collect(),
        None => all,
    })
}
