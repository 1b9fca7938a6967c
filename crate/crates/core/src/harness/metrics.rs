//! Monte-Carlo sweep and the reduction of trial records into per-point metrics.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::spec::{Axis, ExperimentSpec, Method};
use super::trial::{run_trial, TrialOutcome, TrialRecord};
use crate::error::Result;

/// Half-width multiplier of the 95% normal-approximation interval.
pub const CI_Z: f64 = 1.96;

/// Metrics of one method at one axis value.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub method: Method,
    pub axis: Axis,
    pub axis_value: f64,
    /// Valid trials aggregated.
    pub trials: usize,
    pub exact: usize,
    pub recovery_prob: f64,
    pub recovery_ci: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    pub ber_ci: f64,
    pub invalid_trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsTable {
    pub axis: Axis,
    /// Sorted by method name, then axis value.
    pub rows: Vec<MetricsRow>,
    pub fingerprint: String,
}

impl MetricsTable {
    pub fn row(&self, method: Method, axis_value: f64) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.axis_value.to_bits() == axis_value.to_bits())
    }

    /// Rows of one method in ascending axis order.
    pub fn series(&self, method: Method) -> Vec<&MetricsRow> {
        self.rows.iter().filter(|r| r.method == method).collect()
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut m: Vec<Method> = self.rows.iter().map(|r| r.method).collect();
        m.dedup();
        m
    }

    pub fn total_invalid(&self) -> usize {
        let mut per_point = BTreeMap::new();
        for r in &self.rows {
            per_point.insert(r.axis_value.to_bits(), r.invalid_trials);
        }
        per_point.values().sum()
    }
}

/// Everything a sweep produced: raw records, invalid counts and the reduced table.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    /// Invalid trial count per axis value, in axis order.
    pub invalid: Vec<(f64, usize)>,
    pub table: MetricsTable,
}

fn half_width(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        CI_Z * (p * (1.0 - p) / n as f64).sqrt()
    }
}

/// Single-threaded reduction of trial records into the metrics table.
pub fn aggregate(spec: &ExperimentSpec, records: &[TrialRecord], invalid: &[(f64, usize)]) -> MetricsTable {
    let mut methods = spec.methods.clone();
    methods.sort_by_key(|m| m.name());
    let mut rows = Vec::with_capacity(methods.len() * spec.axis_values.len());
    for &method in &methods {
        for &x in &spec.axis_values {
            let mine = records
                .iter()
                .filter(|r| r.method == method && r.axis_value.to_bits() == x.to_bits());
            let (mut trials, mut exact, mut errs, mut bits) = (0usize, 0usize, 0u64, 0u64);
            for r in mine {
                trials += 1;
                exact += r.support_exact as usize;
                errs += r.bit_errors as u64;
                bits += r.bits_total as u64;
            }
            let recovery_prob = if trials == 0 { 0.0 } else { exact as f64 / trials as f64 };
            let ber = if bits == 0 { 0.0 } else { errs as f64 / bits as f64 };
            rows.push(MetricsRow {
                method,
                axis: spec.axis,
                axis_value: x,
                trials,
                exact,
                recovery_prob,
                recovery_ci: half_width(recovery_prob, trials as u64),
                bit_errors: errs,
                bits_total: bits,
                ber,
                ber_ci: half_width(ber, bits),
                invalid_trials: invalid
                    .iter()
                    .find(|(v, _)| v.to_bits() == x.to_bits())
                    .map_or(0, |&(_, n)| n),
            });
        }
    }
    MetricsTable {
        axis: spec.axis,
        rows,
        fingerprint: spec.fingerprint(),
    }
}

/// Runs every (axis value, trial) pair, in parallel on the current rayon
/// pool, and reduces the records in a fixed order.
pub fn sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(f64, usize)> = spec
        .axis_values
        .iter()
        .flat_map(|&x| (0..spec.trials).map(move |t| (x, t)))
        .collect();
    let outcomes: Vec<Result<TrialOutcome>> = jobs.par_iter().map(|&(x, t)| run_trial(spec, x, t)).collect();

    let mut records = Vec::with_capacity(jobs.len() * spec.methods.len());
    let mut invalid: Vec<(f64, usize)> = spec.axis_values.iter().map(|&x| (x, 0)).collect();
    for ((x, _), outcome) in jobs.iter().zip(outcomes) {
        match outcome? {
            TrialOutcome::Valid(r) => records.extend(r),
            TrialOutcome::Invalid => {
                if let Some(slot) = invalid.iter_mut().find(|(v, _)| v.to_bits() == x.to_bits()) {
                    slot.1 += 1;
                }
            }
        }
    }
    let table = aggregate(spec, &records, &invalid);
    Ok(SweepResult { records, invalid, table })
}
