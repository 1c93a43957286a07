//! Ordered, retrying delivery of observations to the fusion service.
//!
//! `publish` never blocks: observations go into a bounded queue drained by
//! a background task that posts batches of consecutive same-kind items.
//! Failed posts are retried with backoff, holding back everything queued
//! behind them so delivery order is preserved. On overflow the oldest
//! queued observation is dropped and counted.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use edgewatch_core::fusion::Observation;
use edgewatch_core::media::{SegmentRecord, SessionEvent};
use serde_json::Value;
use tokio::sync::Notify;
use tokio::task::JoinHandle;
use url::Url;

use crate::proxy::RecordSink;

#[derive(Debug, Clone)]
pub struct PublisherConfig {
    pub capacity: usize,
    pub batch: usize,
    pub retry_initial: Duration,
    pub retry_max: Duration,
    pub request_timeout: Duration,
}

impl Default for PublisherConfig {
    fn default() -> Self {
        Self {
            capacity: 10_000,
            batch: 256,
            retry_initial: Duration::from_millis(50),
            retry_max: Duration::from_secs(1),
            request_timeout: Duration::from_secs(5),
        }
    }
}

#[derive(Debug, Default)]
struct Shared {
    queue: Mutex<VecDeque<Observation>>,
    in_flight: AtomicU64,
    dropped: AtomicU64,
    rejected: AtomicU64,
    delivered: AtomicU64,
    closed: AtomicBool,
    wake: Notify,
}

#[derive(Debug)]
pub struct Publisher {
    shared: Arc<Shared>,
    capacity: usize,
    task: JoinHandle<()>,
}

pub fn endpoint(obs: &Observation) -> &'static str {
    match obs {
        Observation::Radio(_) => "ingest/radio",
        Observation::Link(_) => "ingest/link",
        Observation::Segment(_) => "ingest/segment",
        Observation::Qoe(_) => "ingest/qoe",
        Observation::Session(_) => "ingest/session",
    }
}

fn body(obs: &Observation) -> Value {
    let v = match obs {
        Observation::Radio(x) => serde_json::to_value(x),
        Observation::Link(x) => serde_json::to_value(x),
        Observation::Segment(x) => serde_json::to_value(x),
        Observation::Qoe(x) => serde_json::to_value(x),
        Observation::Session(x) => serde_json::to_value(x),
    };
    v.expect("observations serialize")
}

impl Publisher {
    /// Start the delivery task on the current tokio runtime.
    pub fn spawn(fusion_url: Url, config: PublisherConfig) -> Publisher {
        let shared = Arc::new(Shared::default());
        let client = reqwest::Client::builder().timeout(config.request_timeout).build().expect("http client builds");
        let capacity = config.capacity.max(1);
        let task = tokio::spawn(deliver(shared.clone(), client, fusion_url, config));
        Publisher { shared, capacity, task }
    }

    pub fn publish(&self, obs: Observation) {
        let mut q = self.shared.queue.lock().unwrap();
        if q.len() >= self.capacity {
            q.pop_front();
            self.shared.dropped.fetch_add(1, Ordering::Relaxed);
        }
        q.push_back(obs);
        drop(q);
        self.shared.wake.notify_one();
    }

    pub fn dropped(&self) -> u64 {
        self.shared.dropped.load(Ordering::Relaxed)
    }

    /// Observations refused by the service (invalid), not retried.
    pub fn rejected(&self) -> u64 {
        self.shared.rejected.load(Ordering::Relaxed)
    }

    pub fn delivered(&self) -> u64 {
        self.shared.delivered.load(Ordering::Relaxed)
    }

    pub fn pending(&self) -> usize {
        self.shared.queue.lock().unwrap().len() + self.shared.in_flight.load(Ordering::SeqCst) as usize
    }

    /// Wait until everything published so far is delivered, up to `timeout`.
    pub async fn flush(&self, timeout: Duration) -> bool {
        let deadline = tokio::time::Instant::now() + timeout;
        loop {
            if self.pending() == 0 {
                return true;
            }
            if tokio::time::Instant::now() >= deadline {
                return false;
            }
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }

    /// Flush, then stop the delivery task.
    pub async fn close(self, timeout: Duration) -> bool {
        let ok = self.flush(timeout).await;
        self.shared.closed.store(true, Ordering::SeqCst);
        self.shared.wake.notify_one();
        let _ = self.task.await;
        ok
    }
}

async fn deliver(shared: Arc<Shared>, client: reqwest::Client, base: Url, config: PublisherConfig) {
    loop {
        let batch: Vec<Observation> = {
            let mut q = shared.queue.lock().unwrap();
            match q.front().map(endpoint) {
                None => Vec::new(),
                Some(kind) => {
                    let n = q.iter().take(config.batch).take_while(|o| endpoint(o) == kind).count();
                    shared.in_flight.store(n as u64, Ordering::SeqCst);
                    q.drain(..n).collect()
                }
            }
        };
        if batch.is_empty() {
            if shared.closed.load(Ordering::SeqCst) {
                return;
            }
            shared.wake.notified().await;
            continue;
        }
        let url = base.join(endpoint(&batch[0])).expect("endpoint joins base URL");
        let payload = Value::Array(batch.iter().map(body).collect());
        let mut backoff = config.retry_initial;
        loop {
            match client.post(url.clone()).json(&payload).send().await {
                Ok(resp) if resp.status().is_success() => {
                    shared.delivered.fetch_add(batch.len() as u64, Ordering::Relaxed);
                    break;
                }
                Ok(resp) if resp.status().is_client_error() => {
                    tracing::warn!(status = %resp.status(), "fusion service rejected a batch");
                    shared.rejected.fetch_add(batch.len() as u64, Ordering::Relaxed);
                    break;
                }
                Ok(resp) => tracing::debug!(status = %resp.status(), "fusion service error, retrying"),
                Err(e) => tracing::debug!(error = %e, "fusion service unreachable, retrying"),
            }
            if shared.closed.load(Ordering::SeqCst) {
                shared.dropped.fetch_add(batch.len() as u64, Ordering::Relaxed);
                break;
            }
            tokio::time::sleep(backoff).await;
            backoff = (backoff * 2).min(config.retry_max);
        }
        shared.in_flight.store(0, Ordering::SeqCst);
    }
}

impl RecordSink for Publisher {
    fn segment(&self, record: SegmentRecord) {
        self.publish(Observation::Segment(record));
    }

    fn session(&self, event: SessionEvent) {
        self.publish(Observation::Session(event));
    }
}
