//! Session QoE estimation structured after ITU-T P.1203 mode 0.
//!
//! Three stages:
//!
//! 1. per-segment video coding quality from metadata only (bitrate,
//!    resolution, frame rate) with upscaling and frame-rate degradations,
//!    combined on the 0–100 rating scale;
//! 2. temporal pooling of the per-second quality with recency and
//!    low-quality weighting;
//! 3. a multiplicative stalling impairment driven by stall count, total
//!    stall time and mean stall spacing, each relative to the media length.
//!
//! The session is treated as video-only: no audio degradation enters the
//! pooled score. Coefficients come from a versioned JSON file
//! ([`Coefficients`]).

mod coefficients;
mod rating;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use coefficients::{Coefficients, DEFAULT_COEFFICIENTS_JSON};
use coefficients::Prepared;
use rating::RatingScale;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QoeError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("stall events overlap or are out of order")]
    OverlappingStalls,
    #[error("stall event outside the playback window")]
    StallOutsidePlayback,
    #[error("insufficient data: no complete segment within the horizon")]
    InsufficientData,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Device {
    #[default]
    Pc,
    Mobile,
}

impl std::str::FromStr for Device {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pc" | "tv" => Ok(Device::Pc),
            "mobile" | "handheld" => Ok(Device::Mobile),
            other => Err(format!("unknown device {other:?}, expected pc or mobile")),
        }
    }
}

/// Display size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Display {
    pub width: u32,
    pub height: u32,
}

impl Default for Display {
    fn default() -> Self {
        Self { width: 3840, height: 2160 }
    }
}

/// A playback interruption. `t_start` is on the session clock,
/// `media_position_s` is the media time at which playback froze.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StallEvent<F = f64> {
    pub t_start: F,
    pub duration_s: F,
    pub media_position_s: F,
}

/// Quality of one downloaded segment placed on the media timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentScore<F = f64> {
    pub media_start_s: F,
    pub duration_s: F,
    pub score: F,
}

/// A segment score together with the session time its download finished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSegment<F = f64> {
    pub t_complete: F,
    pub segment: SegmentScore<F>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoeScore<F = f64> {
    pub t: F,
    pub mos: F,
    pub video_quality_mean: F,
    pub stall_count: usize,
    pub stall_total_s: F,
}

/// The model with its coefficients converted to `F`.
#[derive(Debug, Clone)]
pub struct P1203Model<F: Scalar = f64> {
    version: String,
    c: Prepared<F>,
    scale: RatingScale<F>,
    device: Device,
}

impl<F: Scalar> Default for P1203Model<F> {
    fn default() -> Self {
        Self::new(&Coefficients::default(), Device::Pc)
    }
}

impl<F: Scalar> P1203Model<F> {
    pub fn new(coefficients: &Coefficients, device: Device) -> Self {
        let c = Prepared::new(coefficients);
        let scale = RatingScale { mos_min: c.mos_min, mos_max: c.mos_max, k: c.r_cubic };
        Self { version: coefficients.version.clone(), c, scale, device }
    }

    pub fn coefficients_version(&self) -> &str {
        &self.version
    }

    pub fn device(&self) -> Device {
        self.device
    }

    /// Per-segment video quality in `[1, 5]`.
    pub fn segment_video_quality(
        &self,
        bitrate_kbps: F,
        width: u32,
        height: u32,
        framerate: F,
        display: Display,
    ) -> Result<F, QoeError> {
        let l = F::lit;
        if !(bitrate_kbps > F::zero()) || !bitrate_kbps.is_finite() {
            return Err(QoeError::NonPositive("bitrate"));
        }
        if width == 0 || height == 0 {
            return Err(QoeError::NonPositive("resolution"));
        }
        if !(framerate > F::zero()) || !framerate.is_finite() {
            return Err(QoeError::NonPositive("framerate"));
        }
        if display.width == 0 || display.height == 0 {
            return Err(QoeError::NonPositive("display"));
        }
        let [a1, a2, a3, a4] = self.c.a;
        let [q1, q2, q3] = self.c.q;
        let coded = F::from_u64(u64::from(width) * u64::from(height)).unwrap();
        let shown = F::from_u64(u64::from(display.width) * u64::from(display.height)).unwrap();

        let bits_per_pixel_term = bitrate_kbps * bitrate_kbps / (coded * framerate);
        let quant = a1 + a2 * (a3 + bitrate_kbps.ln() + (bits_per_pixel_term + a4).ln()).ln();
        let mos_cod = clamp(q1 + q2 * (q3 * quant).exp(), F::one(), l(5.0));
        let deg_cod = clamp(l(100.0) - self.scale.r_from_mos(mos_cod), F::zero(), l(100.0));

        let scale_factor = (shown / coded).max(F::one());
        let [u1, u2] = self.c.u;
        let deg_scal = clamp(u1 * (u2 * (scale_factor - F::one()) + F::one()).log10(), F::zero(), l(100.0));

        let deg_fr = if framerate < self.c.fr_threshold {
            let [t1, t2, t3] = self.c.fr;
            clamp(
                (l(100.0) - deg_cod - deg_scal) * (t1 - t2 * framerate) / (t3 + framerate),
                F::zero(),
                l(100.0),
            )
        } else {
            F::zero()
        };

        let deg_all = clamp(deg_cod + deg_scal + deg_fr, F::zero(), l(100.0));
        let score = self.scale.mos_from_r(l(100.0) - deg_all);
        Ok(match self.device {
            Device::Pc => score,
            Device::Mobile => {
                let [h1, h2, h3, h4] = self.c.htv;
                clamp(h1 + h2 * score + h3 * score * score + h4 * score * score * score, F::one(), l(5.0))
            }
        })
    }

    /// Fractional stalling impairment in `[0, 1)`: 0 without stalls, growing
    /// with stall count, total stall time and mean spacing between stalls.
    pub fn stall_degradation(&self, events: &[StallEvent<F>], playback_duration_s: F) -> Result<F, QoeError> {
        if !(playback_duration_s > F::zero()) {
            return Err(QoeError::NonPositive("playback_duration"));
        }
        check_stalls(events)?;
        let eps = F::lit(1e-9);
        if events
            .iter()
            .any(|e| e.media_position_s < -eps || e.media_position_s > playback_duration_s + eps)
        {
            return Err(QoeError::StallOutsidePlayback);
        }
        Ok(F::one() - self.stall_factor(events, playback_duration_s))
    }

    fn stall_factor(&self, events: &[StallEvent<F>], t: F) -> F {
        if events.is_empty() {
            return F::one();
        }
        let [s1, s2, s3] = self.c.stall;
        let n = F::from_usize(events.len()).unwrap();
        let total = events.iter().fold(F::zero(), |acc, e| acc + e.duration_s);
        let avg_interval = if events.len() > 1 {
            let (lo, hi) = events.iter().fold((F::infinity(), F::neg_infinity()), |(lo, hi), e| {
                (lo.min(e.media_position_s), hi.max(e.media_position_s))
            });
            (hi - lo) / (n - F::one())
        } else {
            F::zero()
        };
        (-n / s1).exp() * (-(total / t) / s2).exp() * (-(avg_interval / t) / s3).exp()
    }

    /// Per-second quality over the segments lying entirely inside `[0, horizon]`.
    fn per_second(&self, segments: &[SegmentScore<F>], horizon: F) -> (Vec<F>, F) {
        let eps = F::lit(1e-9);
        let mut used: Vec<&SegmentScore<F>> = segments
            .iter()
            .filter(|s| s.duration_s > F::zero() && s.media_start_s + s.duration_s <= horizon + eps)
            .collect();
        used.sort_by(|a, b| a.media_start_s.partial_cmp(&b.media_start_s).unwrap());
        let playback = used.iter().fold(F::zero(), |acc, s| acc + s.duration_s);
        let end = used.iter().fold(F::zero(), |acc, s| acc.max(s.media_start_s + s.duration_s));
        let seconds = (end - eps).ceil().to_usize().unwrap_or(0);
        let mut out = Vec::with_capacity(seconds);
        let half = F::lit(0.5);
        for u in 0..seconds {
            let tau = F::from_usize(u).unwrap() + half;
            if let Some(s) = used.iter().find(|s| s.media_start_s <= tau && tau < s.media_start_s + s.duration_s) {
                out.push(s.score);
            }
        }
        (out, playback)
    }

    /// Integrated session score over media time `[0, horizon]`.
    pub fn integrate_mos(
        &self,
        segments: &[SegmentScore<F>],
        events: &[StallEvent<F>],
        horizon_s: F,
    ) -> Result<QoeScore<F>, QoeError> {
        if !(horizon_s > F::zero()) {
            return Err(QoeError::NonPositive("horizon"));
        }
        check_stalls(events)?;
        let (per_second, playback) = self.per_second(segments, horizon_s);
        if per_second.is_empty() || !(playback > F::zero()) {
            return Err(QoeError::InsufficientData);
        }
        let l = F::lit;
        let [t1, t2, t3, t4, t5] = self.c.temporal;
        let n = F::from_usize(per_second.len()).unwrap();
        let (mut num, mut den, mut sum) = (F::zero(), F::zero(), F::zero());
        for (i, &q) in per_second.iter().enumerate() {
            let u = F::from_usize(i + 1).unwrap();
            let w1 = t1 + t2 * ((u / n) / t3).exp();
            let w2 = t4 - t5 * q;
            num = num + w1 * w2 * q;
            den = den + w1 * w2;
            sum = sum + q;
        }
        let pooled = clamp(num / den, F::one(), l(5.0));
        let eps = l(1e-9);
        let in_window: Vec<StallEvent<F>> =
            events.iter().copied().filter(|e| e.media_position_s <= horizon_s + eps).collect();
        let factor = self.stall_factor(&in_window, playback);
        let mos = clamp(F::one() + (pooled - F::one()) * factor, F::one(), l(5.0));
        Ok(QoeScore {
            t: horizon_s,
            mos,
            video_quality_mean: clamp(sum / n, F::one(), l(5.0)),
            stall_count: in_window.len(),
            stall_total_s: in_window.iter().fold(F::zero(), |acc, e| acc + e.duration_s),
        })
    }

    /// Growing-prefix QoE: one score per `step` seconds after
    /// `session_start`, plus one at the end of the session. Each score uses
    /// the segments completed and the stalls started by its instant.
    pub fn qoe_series(
        &self,
        segments: &[ScoredSegment<F>],
        events: &[StallEvent<F>],
        session_start: F,
        step_s: F,
    ) -> Result<Vec<QoeScore<F>>, QoeError> {
        if !(step_s > F::zero()) {
            return Err(QoeError::NonPositive("step"));
        }
        check_stalls(events)?;
        let end = segments
            .iter()
            .map(|s| s.t_complete)
            .chain(events.iter().map(|e| e.t_start + e.duration_s))
            .fold(session_start, F::max);
        let eps = F::lit(1e-9);
        let mut grid = Vec::new();
        let mut k = 1usize;
        loop {
            let t = session_start + F::from_usize(k).unwrap() * step_s;
            if t >= end - eps {
                break;
            }
            grid.push(t);
            k += 1;
        }
        grid.push(end);

        let mut out = Vec::with_capacity(grid.len());
        let mut scratch: Vec<SegmentScore<F>> = Vec::new();
        for t in grid {
            scratch.clear();
            scratch.extend(segments.iter().filter(|s| s.t_complete <= t + eps).map(|s| s.segment));
            let horizon = scratch.iter().fold(F::zero(), |acc, s| acc.max(s.media_start_s + s.duration_s));
            let started: Vec<StallEvent<F>> = events.iter().copied().filter(|e| e.t_start <= t + eps).collect();
            if !(horizon > F::zero()) {
                continue;
            }
            match self.integrate_mos(&scratch, &started, horizon) {
                Ok(mut score) => {
                    score.t = t;
                    score.stall_count = started.len();
                    score.stall_total_s = started.iter().fold(F::zero(), |acc, e| acc + e.duration_s);
                    out.push(score);
                }
                Err(QoeError::InsufficientData) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

fn clamp<F: Scalar>(v: F, lo: F, hi: F) -> F {
    v.max(lo).min(hi)
}

fn check_stalls<F: Scalar>(events: &[StallEvent<F>]) -> Result<(), QoeError> {
    for e in events {
        if !(e.duration_s > F::zero()) {
            return Err(QoeError::NonPositive("stall duration"));
        }
    }
    for pair in events.windows(2) {
        if pair[0].t_start + pair[0].duration_s > pair[1].t_start + F::lit(1e-9) {
            return Err(QoeError::OverlappingStalls);
        }
    }
    Ok(())
}
