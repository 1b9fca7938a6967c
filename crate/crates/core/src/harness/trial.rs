//! One simulated frame, every requested method run on it.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::spec::{ExperimentSpec, Method, PointParams};
use crate::baselines::{classic_samp, cws_recover, genie_recover};
use crate::error::{Error, Result};
use crate::observation::{build_observation, channel_eigenvalues, measure, to_frequency};
use crate::recovery::{bit_errors, demodulate, ls_recover, refine_support, RecoveryConfig};
use crate::waveform::{synthesize_frame, FrameParams, Start, SyntheticFrame};

/// Fresh frame draws allowed when the channel generator keeps failing.
pub const MAX_FRAME_ATTEMPTS: u64 = 10;

const PURPOSE_FRAME: u64 = 0x4652_414d;
const PURPOSE_RECOVERY: u64 = 0x5245_4356;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of labels into an independent stream seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(master), |s, &p| splitmix(s ^ splitmix(p)))
}

/// Outcome of one method on one frame.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub axis_value: f64,
    pub trial: usize,
    /// Seed of the frame stream.
    pub seed: u64,
    pub method: Method,
    /// Ascending.
    pub true_support: Vec<usize>,
    /// Ascending.
    pub est_support: Vec<usize>,
    pub accepted: bool,
    pub support_exact: bool,
    pub bit_errors: usize,
    pub bits_total: usize,
    pub outer_iterations_used: usize,
    pub wall_time: Duration,
}

impl PartialEq for TrialRecord {
    /// Wall time is excluded.
    fn eq(&self, o: &Self) -> bool {
        self.axis_value.to_bits() == o.axis_value.to_bits()
            && self.trial == o.trial
            && self.seed == o.seed
            && self.method == o.method
            && self.true_support == o.true_support
            && self.est_support == o.est_support
            && self.accepted == o.accepted
            && self.support_exact == o.support_exact
            && self.bit_errors == o.bit_errors
            && self.bits_total == o.bits_total
            && self.outer_iterations_used == o.outer_iterations_used
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutcome {
    Valid(Vec<TrialRecord>),
    /// Every frame attempt hit a degenerate channel; excluded from the metrics.
    Invalid,
}

/// Draws the frame for `(trial, point)`. The stream depends only on the
/// master seed, the trial index and the attempt, so all axis values of a
/// sweep see the same channel, payloads and noise shape.
pub fn trial_frame(spec: &ExperimentSpec, point: &PointParams, trial: usize) -> Result<Option<(u64, SyntheticFrame<f64>)>> {
    let params = FrameParams {
        sparsity: point.sparsity,
        start: Start::Random(spec.fixed.placement),
        snr_db: point.snr_db,
        sir_db: point.sir_db,
        channel_decay: Some(spec.channel_decay()),
    };
    for attempt in 0..MAX_FRAME_ATTEMPTS {
        let seed = derive_seed(spec.master_seed, &[PURPOSE_FRAME, trial as u64, attempt]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match synthesize_frame::<f64, _>(&mut rng, &spec.dims, &params) {
            Ok(f) => return Ok(Some((seed, f))),
            Err(Error::ChannelDegenerate { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Recovery configuration used by the proposed method at this point.
pub fn point_recovery_config(spec: &ExperimentSpec, point: &PointParams, trial: usize) -> RecoveryConfig {
    RecoveryConfig {
        r_max: point.r_max,
        known_sparsity: spec.fixed.sparsity_known.then_some(point.sparsity),
        seed: derive_seed(spec.master_seed, &[PURPOSE_RECOVERY, trial as u64, Method::Proposed.tag()]),
        ..spec.recovery.clone()
    }
}

pub fn run_trial(spec: &ExperimentSpec, axis_value: f64, trial: usize) -> Result<TrialOutcome> {
    let point = spec.point(axis_value);
    let Some((seed, frame)) = trial_frame(spec, &point, trial)? else {
        return Ok(TrialOutcome::Invalid);
    };
    let dims = &spec.dims;
    let obs = build_observation(&channel_eigenvalues(&frame.cir, dims)?, dims)?;
    let y_freq = to_frequency(&frame.received);
    let y2 = measure(&obs, &y_freq)?.y2;
    let nb = frame.nb();
    let noise_var = frame.received.noise_var;
    let truth = nb.sorted_support();
    let cfg = point_recovery_config(spec, &point, trial);

    let mut records = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let t0 = Instant::now();
        let (est, accepted, iterations, recovered) = match method {
            Method::Proposed => {
                let r = refine_support(&y_freq, &obs, noise_var, &cfg)?;
                let est = if r.estimate.accepted
                    || r.diagnostics.fallback
                    || r.estimate.indices.len() <= cfg.max_support(dims.zp_len)
                {
                    r.estimate.sorted()
                } else {
                    Vec::new()
                };
                let rec = ls_recover(&y2, &obs, &est);
                (est, r.estimate.accepted, r.outer_iterations(), rec)
            }
            Method::ClassicSamp => {
                let out = classic_samp(&y2, &obs, noise_var, &cfg);
                (out.support, true, 1, out.recovered)
            }
            Method::Cws => {
                let out = cws_recover(&y2, &obs, point.sparsity, &cfg)?;
                (out.support, true, 1, out.recovered)
            }
            Method::Genie => (truth.clone(), true, 0, genie_recover(&y2, &obs, &truth)),
        };
        let bits = demodulate(&recovered.vector, &nb.support, nb.gain);
        records.push(TrialRecord {
            axis_value,
            trial,
            seed,
            method,
            support_exact: est == truth,
            true_support: truth.clone(),
            est_support: est,
            accepted,
            bit_errors: bit_errors(&bits, &nb.payload_bits),
            bits_total: nb.payload_bits.len(),
            outer_iterations_used: iterations,
            wall_time: t0.elapsed(),
        });
    }
    Ok(TrialOutcome::Valid(records))
}
