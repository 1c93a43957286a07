//! Player buffer and stall dynamics.
//!
//! Shared by the trial harness (which drives it forward while issuing
//! requests) and by the QoE engine (which replays segment arrivals from L7
//! records to recover stall events).

use serde::{Deserialize, Serialize};

use crate::qoe::StallEvent;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaybackConfig {
    pub segment_duration_s: f64,
    pub buffer_max_s: f64,
    /// Buffered media needed before playback first starts.
    pub startup_threshold_s: f64,
    /// Buffered media needed to leave a stall.
    pub resume_threshold_s: f64,
}

impl Default for PlaybackConfig {
    fn default() -> Self {
        Self { segment_duration_s: 4.0, buffer_max_s: 30.0, startup_threshold_s: 4.0, resume_threshold_s: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub config: PlaybackConfig,
    pub now: f64,
    pub buffer_level_s: f64,
    pub throughput_est_mbps: Option<f64>,
    pub playing: bool,
    pub started: bool,
    pub ended: bool,
    pub position_in_media_s: f64,
    pub media_downloaded_s: f64,
    pub media_duration_s: f64,
    pub stall_events: Vec<StallEvent>,
    /// `(t_start, media_position)` of the stall in progress.
    pub open_stall: Option<(f64, f64)>,
}

impl PlayerState {
    pub fn new(config: PlaybackConfig, media_duration_s: f64, now: f64) -> Self {
        Self {
            config,
            now,
            buffer_level_s: 0.0,
            throughput_est_mbps: None,
            playing: false,
            started: false,
            ended: false,
            position_in_media_s: 0.0,
            media_downloaded_s: 0.0,
            media_duration_s,
            stall_events: Vec::new(),
            open_stall: None,
        }
    }

    pub fn is_stalled(&self) -> bool {
        self.open_stall.is_some()
    }

    fn all_downloaded(&self) -> bool {
        self.media_downloaded_s >= self.media_duration_s - EPS
    }

    /// True if a segment of `segment_s` fits under the buffer cap.
    pub fn has_room(&self, segment_s: f64) -> bool {
        self.buffer_level_s + segment_s <= self.config.buffer_max_s + EPS
    }

    /// Let `dt` seconds of session time pass with no arrivals.
    pub fn advance(&mut self, dt: f64) {
        debug_assert!(dt >= 0.0);
        if self.playing && !self.ended {
            let played = dt.min(self.buffer_level_s);
            self.buffer_level_s -= played;
            self.position_in_media_s += played;
            if self.buffer_level_s <= EPS {
                self.buffer_level_s = 0.0;
                self.playing = false;
                if self.all_downloaded() {
                    self.ended = true;
                } else {
                    self.open_stall = Some((self.now + played, self.position_in_media_s));
                }
            }
        }
        self.now += dt;
    }

    /// A segment of `segment_s` media seconds finished downloading at `self.now`.
    pub fn on_segment(&mut self, segment_s: f64) {
        self.media_downloaded_s += segment_s;
        self.buffer_level_s = (self.buffer_level_s + segment_s).min(self.config.buffer_max_s);
        let done = self.all_downloaded();
        if !self.started {
            if self.buffer_level_s >= self.config.startup_threshold_s - EPS || done {
                self.started = true;
                self.playing = true;
            }
        } else if let Some((t_start, position)) = self.open_stall {
            if self.buffer_level_s >= self.config.resume_threshold_s - EPS || done {
                self.open_stall = None;
                self.playing = true;
                let duration_s = self.now - t_start;
                if duration_s > EPS {
                    self.stall_events.push(StallEvent { t_start, duration_s, media_position_s: position });
                }
            }
        }
    }

    /// Pure form of [`advance`](Self::advance) followed by an optional arrival.
    pub fn step(&self, dt: f64, arrival_s: Option<f64>) -> PlayerState {
        let mut next = self.clone();
        next.advance(dt);
        if let Some(s) = arrival_s {
            next.on_segment(s);
        }
        next
    }

    /// Close a stall still open at `t` (session cut short).
    pub fn close_open_stall(&mut self, t: f64) {
        if let Some((t_start, position)) = self.open_stall.take() {
            if t - t_start > EPS {
                self.stall_events.push(StallEvent { t_start, duration_s: t - t_start, media_position_s: position });
            }
        }
    }

    pub fn stall_total_s(&self) -> f64 {
        self.stall_events.iter().map(|e| e.duration_s).sum()
    }
}

/// Recover stall events from segment arrivals `(t_complete, media_seconds)`.
///
/// Playback is replayed from `session_start`; a stall still open at `end`
/// is closed there.
pub fn infer_stalls(
    config: PlaybackConfig,
    media_duration_s: f64,
    session_start: f64,
    arrivals: &[(f64, f64)],
    end: f64,
) -> Vec<StallEvent> {
    let mut sorted = arrivals.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut state = PlayerState::new(config, media_duration_s, session_start);
    for (t, media_s) in sorted {
        if t > state.now {
            state.advance(t - state.now);
        }
        state.on_segment(media_s);
    }
    if end > state.now {
        state.advance(end - state.now);
    }
    state.close_open_stall(state.now);
    state.stall_events
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn playing(buffer: f64) -> PlayerState {
        let mut s = PlayerState::new(PlaybackConfig { resume_threshold_s: 2.0, ..Default::default() }, 100.0, 0.0);
        s.on_segment(buffer);
        s
    }

    #[test]
    fn drains_into_stall() {
        let s = playing(4.0).step(4.0, None);
        assert_eq!(s.buffer_level_s, 0.0);
        assert!(s.is_stalled());
        assert_eq!(s.open_stall, Some((4.0, 4.0)));
    }

    #[test]
    fn refill_closes_stall() {
        let s = playing(4.0).step(4.0, None).step(3.0, Some(4.0));
        assert!(!s.is_stalled());
        assert_eq!(s.buffer_level_s, 4.0);
        assert_eq!(s.stall_events, vec![StallEvent { t_start: 4.0, duration_s: 3.0, media_position_s: 4.0 }]);
    }

    #[test]
    fn buffer_capped() {
        let mut s = playing(4.0);
        while s.has_room(4.0) {
            s.on_segment(4.0);
        }
        assert!(s.buffer_level_s <= s.config.buffer_max_s);
        s.on_segment(4.0);
        assert_eq!(s.buffer_level_s, s.config.buffer_max_s);
        assert!(!s.has_room(4.0));
    }

    #[test]
    fn ends_without_stall() {
        let mut s = PlayerState::new(PlaybackConfig::default(), 8.0, 0.0);
        s.on_segment(4.0);
        s.on_segment(4.0);
        s.advance(20.0);
        assert!(s.ended && !s.is_stalled());
        assert!(s.stall_events.is_empty());
        assert_eq!(s.position_in_media_s, 8.0);
    }

    #[test]
    fn inference_matches_live() {
        let arrivals = [(1.0, 4.0), (2.0, 4.0), (11.0, 4.0), (12.0, 4.0)];
        let stalls = infer_stalls(PlaybackConfig::default(), 16.0, 0.0, &arrivals, 30.0);
        // Playback starts at 1, drains at 9, resumes at 11.
        assert_eq!(stalls, vec![StallEvent { t_start: 9.0, duration_s: 2.0, media_position_s: 8.0 }]);
    }

    #[test]
    fn unfinished_session_closes_stall_at_end() {
        let stalls = infer_stalls(PlaybackConfig::default(), 16.0, 0.0, &[(1.0, 4.0)], 10.0);
        assert_eq!(stalls, vec![StallEvent { t_start: 5.0, duration_s: 5.0, media_position_s: 4.0 }]);
    }

    proptest! {
        #[test]
        fn stalls_ordered_and_buffer_bounded(gaps in prop::collection::vec(0.0f64..10.0, 1..60)) {
            let mut s = PlayerState::new(PlaybackConfig::default(), 4.0 * gaps.len() as f64, 0.0);
            let mut total_prev = 0.0;
            for g in gaps {
                s.advance(g);
                if s.has_room(4.0) {
                    s.on_segment(4.0);
                }
                prop_assert!(s.buffer_level_s >= 0.0 && s.buffer_level_s <= s.config.buffer_max_s);
                let total = s.stall_total_s();
                prop_assert!(total >= total_prev);
                total_prev = total;
            }
            for w in s.stall_events.windows(2) {
                prop_assert!(w[0].t_start + w[0].duration_s <= w[1].t_start + 1e-9);
            }
        }
    }
}
