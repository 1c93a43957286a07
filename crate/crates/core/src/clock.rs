//! Time sources for transfer timestamps.
//!
//! Live components read a monotonic clock at the moment each event happens.
//! Replays use [`SimLink`]: a fluid model of a downlink whose capacity is
//! piecewise constant over one-second bins, from which request, first-byte
//! and completion instants follow in closed form.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Source of the three SegmentRecord timestamps, in seconds.
pub trait TransferClock: Send + Sync {
    fn now(&self) -> f64;
    /// Instant the first body byte of a response requested at `t_request`
    /// reaches the client.
    fn first_byte_at(&self, t_request: f64) -> f64;
    /// Instant the whole body of `body_bytes` has reached the client.
    fn complete_at(&self, t_request: f64, body_bytes: u64) -> f64;
}

/// Wall-clock-free monotonic seconds since construction plus `offset`.
#[derive(Debug, Clone)]
pub struct MonotonicClock {
    origin: Instant,
    offset: f64,
}

impl MonotonicClock {
    pub fn new(offset: f64) -> Self {
        Self { origin: Instant::now(), offset }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new(0.0)
    }
}

impl TransferClock for MonotonicClock {
    fn now(&self) -> f64 {
        self.offset + self.origin.elapsed().as_secs_f64()
    }

    fn first_byte_at(&self, t_request: f64) -> f64 {
        self.now().max(t_request)
    }

    fn complete_at(&self, t_request: f64, _body_bytes: u64) -> f64 {
        self.now().max(t_request)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub t_request: f64,
    pub t_first_byte: f64,
    pub t_complete: f64,
    pub body_bytes: u64,
    pub wire_bytes: u64,
}

/// Downlink with per-second capacity `capacity_mbps[k]` over `[t0 + k, t0 + k + 1)`.
/// Beyond the last bin the last capacity persists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimLink {
    pub t0: f64,
    pub capacity_mbps: Vec<f64>,
    /// Request-to-first-bit delay.
    pub latency_s: f64,
    /// Fraction of body bytes added by transport and network headers.
    pub overhead_ratio: f64,
    /// Fixed per-response bytes (HTTP status line and headers).
    pub header_bytes: u64,
}

/// Give up on transfers that would take longer than this.
const MAX_TRANSFER_S: f64 = 86_400.0;

impl SimLink {
    pub fn new(t0: f64, capacity_mbps: Vec<f64>) -> Self {
        assert!(!capacity_mbps.is_empty(), "capacity trace is empty");
        Self { t0, capacity_mbps, latency_s: 0.0, overhead_ratio: 0.03, header_bytes: 300 }
    }

    fn bin(&self, t: f64) -> (usize, f64) {
        let k = ((t - self.t0).floor().max(0.0)) as usize;
        let cap = self.capacity_mbps[k.min(self.capacity_mbps.len() - 1)];
        (k, cap * 1e6)
    }

    pub fn capacity_at(&self, t: f64) -> f64 {
        self.bin(t).1 / 1e6
    }

    pub fn wire_bytes(&self, body_bytes: u64) -> u64 {
        self.header_bytes + (body_bytes as f64 * (1.0 + self.overhead_ratio)).ceil() as u64
    }

    /// Instant `wire_bytes` sent from `start` have all arrived.
    pub fn delivery_time(&self, start: f64, wire_bytes: u64) -> Option<f64> {
        let mut remaining = 8.0 * wire_bytes as f64;
        let mut t = start + self.latency_s;
        if remaining <= 0.0 {
            return Some(t);
        }
        while t - start < MAX_TRANSFER_S {
            let (k, bps) = self.bin(t);
            let bin_end = self.t0 + (k + 1) as f64;
            let span = (bin_end - t).max(0.0);
            if bps > 0.0 && bps * span >= remaining {
                return Some(t + remaining / bps);
            }
            remaining -= bps * span;
            t = bin_end;
        }
        None
    }

    pub fn transfer(&self, t_request: f64, body_bytes: u64) -> Option<Transfer> {
        let wire_bytes = self.wire_bytes(body_bytes);
        let header_and_first = self.header_bytes + u64::from(body_bytes > 0);
        let t_first_byte = self.delivery_time(t_request, header_and_first)?;
        let t_complete = self.delivery_time(t_request, wire_bytes)?;
        Some(Transfer { t_request, t_first_byte, t_complete, body_bytes, wire_bytes })
    }

    /// Bits the link can carry over `[a, b]`.
    pub fn integrate_bits(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut t = a;
        while t < b {
            let (k, bps) = self.bin(t);
            let end = (self.t0 + (k + 1) as f64).min(b);
            if end <= t {
                break;
            }
            total += bps * (end - t);
            t = end;
        }
        total
    }

    /// Wire bytes of `transfer` that arrived within `[a, b]`.
    pub fn delivered_bytes(&self, transfer: &Transfer, a: f64, b: f64) -> f64 {
        let start = (transfer.t_request + self.latency_s).max(a);
        let end = transfer.t_complete.min(b);
        if end <= start {
            return 0.0;
        }
        (self.integrate_bits(start, end) / 8.0).min(transfer.wire_bytes as f64)
    }
}

/// Shared simulated "now" plus the link that times transfers. The replay
/// coordinator moves time forward; the proxy reads it.
#[derive(Debug)]
pub struct SimClock {
    link: Arc<SimLink>,
    now_bits: AtomicU64,
}

impl SimClock {
    pub fn new(link: Arc<SimLink>, now: f64) -> Self {
        Self { link, now_bits: AtomicU64::new(now.to_bits()) }
    }

    pub fn set(&self, t: f64) {
        self.now_bits.store(t.to_bits(), Ordering::SeqCst);
    }

    pub fn link(&self) -> &SimLink {
        &self.link
    }
}

impl TransferClock for SimClock {
    fn now(&self) -> f64 {
        f64::from_bits(self.now_bits.load(Ordering::SeqCst))
    }

    fn first_byte_at(&self, t_request: f64) -> f64 {
        self.link.delivery_time(t_request, self.link.header_bytes + 1).unwrap_or(f64::INFINITY)
    }

    fn complete_at(&self, t_request: f64, body_bytes: u64) -> f64 {
        self.link.delivery_time(t_request, self.link.wire_bytes(body_bytes)).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bare(caps: Vec<f64>) -> SimLink {
        SimLink { latency_s: 0.0, overhead_ratio: 0.0, header_bytes: 0, ..SimLink::new(0.0, caps) }
    }

    #[test]
    fn constant_capacity() {
        let link = bare(vec![100.0]);
        // 12.5 MB at 100 Mbit/s is one second.
        assert_abs_diff_eq!(link.delivery_time(0.0, 12_500_000).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(link.delivery_time(2.5, 6_250_000).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn crosses_bins() {
        let link = bare(vec![8.0, 16.0]);
        // 1 MB in the first bin, then 1 MB at 2 MB/s.
        assert_abs_diff_eq!(link.delivery_time(0.0, 2_000_000).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_capacity_never_finishes() {
        assert_eq!(bare(vec![0.0]).delivery_time(0.0, 1), None);
    }

    #[test]
    fn transfer_timestamps_ordered() {
        let link = SimLink { latency_s: 0.01, ..SimLink::new(0.0, vec![50.0, 5.0, 80.0]) };
        let tr = link.transfer(0.3, 1_000_000).unwrap();
        assert!(tr.t_request <= tr.t_first_byte && tr.t_first_byte <= tr.t_complete);
        assert_abs_diff_eq!(link.delivered_bytes(&tr, 0.0, 100.0), tr.wire_bytes as f64, epsilon = 1e-3);
    }

    #[test]
    fn sim_clock_is_settable() {
        let clock = SimClock::new(Arc::new(bare(vec![8.0])), 0.0);
        clock.set(12.0);
        assert_eq!(clock.now(), 12.0);
        assert_abs_diff_eq!(clock.complete_at(12.0, 1_000_000), 13.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn delivered_bytes_partition(caps in prop::collection::vec(0.1f64..200.0, 1..20),
                                     start in 0.0f64..10.0, body in 1u64..20_000_000) {
            let link = SimLink::new(0.0, caps);
            let tr = link.transfer(start, body).unwrap();
            let end = tr.t_complete.ceil() as usize + 1;
            let sum: f64 = (0..end).map(|k| link.delivered_bytes(&tr, k as f64, (k + 1) as f64)).sum();
            prop_assert!((sum - tr.wire_bytes as f64).abs() <= 1e-6 * tr.wire_bytes as f64 + 1e-3);
        }
    }
}
