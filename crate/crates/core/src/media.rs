//! Application-layer (L7) observations emitted by the media proxy.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, FieldError};

/// One segment download as seen by the proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub session_id: String,
    pub rep_id: String,
    pub rep_bitrate_kbps: u32,
    pub segment_index: u64,
    pub bytes: u64,
    pub t_request: f64,
    pub t_first_byte: f64,
    pub t_complete: f64,
    pub origin_status: u16,
}

impl SegmentRecord {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.origin_status)
    }

    pub fn duration_s(&self) -> f64 {
        self.t_complete - self.t_request
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_request + self.t_complete)
    }

    /// `8·bytes / (t_complete − t_request)` in Mbit/s, for successful downloads.
    pub fn l7_throughput_mbps(&self) -> Option<f64> {
        let dt = self.duration_s();
        (self.is_success() && self.bytes > 0 && dt > 0.0).then(|| 8.0 * self.bytes as f64 / dt / 1e6)
    }

    /// Bitrate the player obtained for this request: the representation's
    /// bitrate, or 0 when nothing was delivered.
    pub fn selected_bitrate_kbps(&self) -> u32 {
        if self.is_success() && self.bytes > 0 {
            self.rep_bitrate_kbps
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.session_id.is_empty() {
            return Err(FieldError::new("session_id", "is empty"));
        }
        check_time("t_request", self.t_request)?;
        check_time("t_first_byte", self.t_first_byte)?;
        check_time("t_complete", self.t_complete)?;
        if self.t_first_byte < self.t_request {
            return Err(FieldError::new("t_first_byte", "precedes t_request"));
        }
        if self.t_complete < self.t_first_byte {
            return Err(FieldError::new("t_complete", "precedes t_first_byte"));
        }
        if self.is_success() {
            if self.bytes == 0 {
                return Err(FieldError::new("bytes", "is zero for a successful download"));
            }
            if self.duration_s() <= 0.0 {
                return Err(FieldError::new("t_complete", "equals t_request for a successful download"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionEventKind {
    Open,
    Close,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub session_id: String,
    pub client_key: String,
    pub kind: SessionEventKind,
    pub t: f64,
}
