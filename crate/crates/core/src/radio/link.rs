//! Interface byte counters to L3 throughput.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{check_range, check_time, FieldError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("sampling interval must be positive, got {0}")]
    NonPositiveInterval(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CounterWidth {
    Bits32,
    Bits64,
}

impl CounterWidth {
    fn delta(self, prev: u64, curr: u64) -> u64 {
        match self {
            CounterWidth::Bits32 => (curr as u32).wrapping_sub(prev as u32) as u64,
            CounterWidth::Bits64 => curr.wrapping_sub(prev),
        }
    }
}

/// Snapshot of an interface's cumulative byte counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub rx_bytes: u64,
    pub tx_bytes: u64,
    pub width: CounterWidth,
}

/// One L3 throughput observation over the window `(t − window_s, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSample {
    pub t: f64,
    pub rx_bytes_delta: u64,
    pub tx_bytes_delta: u64,
    pub window_s: f64,
    pub rx_throughput_mbps: f64,
}

impl LinkSample {
    pub fn window_start(&self) -> f64 {
        self.t - self.window_s
    }

    pub fn tx_throughput_mbps(&self) -> f64 {
        8.0 * self.tx_bytes_delta as f64 / self.window_s / 1e6
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        check_time("t", self.t)?;
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return Err(FieldError::new("window", "must be positive"));
        }
        check_range("rx_throughput", self.rx_throughput_mbps, 0.0, f64::MAX)
    }
}

/// Throughput between two counter snapshots taken `dt` seconds apart, the
/// later one at `t`. Counter wrap is handled by modular subtraction.
pub fn sample_link(prev: &Counters, curr: &Counters, t: f64, dt: f64) -> Result<LinkSample, LinkError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LinkError::NonPositiveInterval(dt));
    }
    let rx = curr.width.delta(prev.rx_bytes, curr.rx_bytes);
    let tx = curr.width.delta(prev.tx_bytes, curr.tx_bytes);
    Ok(LinkSample {
        t,
        rx_bytes_delta: rx,
        tx_bytes_delta: tx,
        window_s: dt,
        rx_throughput_mbps: 8.0 * rx as f64 / dt / 1e6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(rx: u64, width: CounterWidth) -> Counters {
        Counters { rx_bytes: rx, tx_bytes: 0, width }
    }

    #[test]
    fn hundred_megabits() {
        let s = sample_link(&c(0, CounterWidth::Bits64), &c(12_500_000, CounterWidth::Bits64), 1.0, 1.0).unwrap();
        assert!((s.rx_throughput_mbps - 100.0).abs() < 1e-12);
    }

    #[test]
    fn zero_delta() {
        let s = sample_link(&c(77, CounterWidth::Bits64), &c(77, CounterWidth::Bits64), 1.0, 1.0).unwrap();
        assert_eq!(s.rx_throughput_mbps, 0.0);
    }

    #[test]
    fn wrap_32() {
        let prev = c(u32::MAX as u64 - 99, CounterWidth::Bits32);
        let curr = c(900, CounterWidth::Bits32);
        let s = sample_link(&prev, &curr, 1.0, 1.0).unwrap();
        assert_eq!(s.rx_bytes_delta, 1000);
    }

    #[test]
    fn wrap_64() {
        let s = sample_link(&c(u64::MAX, CounterWidth::Bits64), &c(9, CounterWidth::Bits64), 1.0, 1.0).unwrap();
        assert_eq!(s.rx_bytes_delta, 10);
    }

    #[test]
    fn bad_interval() {
        let a = c(0, CounterWidth::Bits64);
        assert!(sample_link(&a, &a, 1.0, 0.0).is_err());
        assert!(sample_link(&a, &a, 1.0, -1.0).is_err());
    }
}
