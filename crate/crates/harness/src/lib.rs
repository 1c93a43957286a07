//! Scripted drive trials against the in-process proxy, origin and store,
//! plus the figure outputs computed from a finished run.

pub mod analysis;
pub mod plot;
pub mod report;
pub mod scenario;
pub mod trace;
pub mod trial;

pub use report::{report, Format, Output, ReportError, ReportOutcome, ReportSpec};
pub use scenario::{Scenario, ScenarioError};
pub use trial::{read_run_manifest, run_trial, run_trial_blocking, RunManifest, Trial, TrialError};
