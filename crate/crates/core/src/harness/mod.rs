//! Experiment engine: specs, paired Monte-Carlo trials, metric reduction,
//! CSV and plot-data output, and the reduced-size self test.

mod metrics;
mod output;
pub mod selftest;
mod spec;
mod trial;

pub use metrics::{aggregate, sweep, MetricsRow, MetricsTable, SweepResult, CI_Z};
pub use output::{csv_string, emit_csv, emit_plotdata, PlotManifest, SeriesEntry, CSV_HEADER, MANIFEST_NAME};
pub use selftest::{selftest, PropertyResult, SelftestReport};
pub use spec::{Axis, ExperimentSpec, FixedParams, Method, PointParams};
pub use trial::{
    derive_seed, point_recovery_config, run_trial, trial_frame, TrialOutcome, TrialRecord, MAX_FRAME_ATTEMPTS,
};
