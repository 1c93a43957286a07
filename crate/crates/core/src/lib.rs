//! Domain models for multi-layer monitoring of DASH video streaming over a
//! cellular edge: MPD handling, radio and link observations, the QoE model,
//! the fusion store and coverage mapping.
//!
//! Numeric kernels (QoE model, channel model, statistics) are generic over
//! [`Scalar`] (`f32` or `f64`); the aliases below fix them to `f64`.

pub mod abr;
pub mod channel;
pub mod clock;
pub mod coverage;
pub mod dash;
pub mod error;
pub mod fusion;
pub mod media;
pub mod playback;
pub mod qoe;
pub mod radio;
pub mod scalar;
pub mod stats;

pub use scalar::Scalar;

pub type QoeModel = qoe::P1203Model<f64>;
pub type QoeScore = qoe::QoeScore<f64>;
pub type StallEvent = qoe::StallEvent<f64>;
pub type SegmentScore = qoe::SegmentScore<f64>;
pub type ScoredSegment = qoe::ScoredSegment<f64>;
pub type PathLoss = channel::PathLoss<f64>;
pub type LinkParams = channel::LinkParams<f64>;
pub type RadioDerivation = channel::RadioDerivation<f64>;
pub type ShadowProcess = channel::ShadowProcess<f64>;
pub type Ewma = abr::Ewma<f64>;

pub use coverage::{build_coverage, classify_rsrp, to_geojson, CoverageCell, Zone};
pub use dash::{parse_mpd, serialize_mpd, Manifest, Representation};
pub use fusion::{FusionStore, Layer, SeriesKey};
pub use media::{SegmentRecord, SessionEvent, SessionEventKind};
pub use radio::{GeoPoint, LinkSample, RadioSample, RadioSource};
