use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Coefficient file shipped with the crate.
pub const DEFAULT_COEFFICIENTS_JSON: &str = include_str!("../../coefficients/p1203.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub version: String,
    pub mos_min: f64,
    pub mos_max: f64,
    pub r_cubic: f64,
    pub video_mode0: VideoMode0,
    pub upscaling: Upscaling,
    pub framerate: FrameRate,
    pub handheld: [f64; 4],
    pub temporal: Temporal,
    pub stalling: Stalling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMode0 {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Upscaling {
    pub u1: f64,
    pub u2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRate {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub threshold_fps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Temporal {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stalling {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_COEFFICIENTS_JSON).expect("bundled coefficient file parses")
    }
}

impl Coefficients {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Coefficients converted once to the working scalar type.
#[derive(Debug, Clone)]
pub(crate) struct Prepared<F> {
    pub mos_min: F,
    pub mos_max: F,
    pub r_cubic: F,
    pub a: [F; 4],
    pub q: [F; 3],
    pub u: [F; 2],
    pub fr: [F; 3],
    pub fr_threshold: F,
    pub htv: [F; 4],
    pub temporal: [F; 5],
    pub stall: [F; 3],
}

impl<F: Scalar> Prepared<F> {
    pub fn new(c: &Coefficients) -> Self {
        let l = F::lit;
        let v = &c.video_mode0;
        Self {
            mos_min: l(c.mos_min),
            mos_max: l(c.mos_max),
            r_cubic: l(c.r_cubic),
            a: [l(v.a1), l(v.a2), l(v.a3), l(v.a4)],
            q: [l(v.q1), l(v.q2), l(v.q3)],
            u: [l(c.upscaling.u1), l(c.upscaling.u2)],
            fr: [l(c.framerate.t1), l(c.framerate.t2), l(c.framerate.t3)],
            fr_threshold: l(c.framerate.threshold_fps),
            htv: c.handheld.map(l),
            temporal: [
                l(c.temporal.t1),
                l(c.temporal.t2),
                l(c.temporal.t3),
                l(c.temporal.t4),
                l(c.temporal.t5),
            ],
            stall: [l(c.stalling.s1), l(c.stalling.s2), l(c.stalling.s3)],
        }
    }
}
