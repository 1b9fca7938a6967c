//! Support recovery: correlation screening, k-means candidate selection,
//! repeated pursuit with vote counting, spike refinement and least squares.

mod cluster;
mod reconstruct;
mod refine;
mod samp;
mod spike;

pub use cluster::{correlations, kmeans_1d, select_candidates, ClusterSet, CorrelationVector, KMeansInit, KMEANS_MAX_ITERATIONS};
pub use reconstruct::{bit_errors, demodulate, ls_recover, LsRecovery};
pub use refine::{
    circular_dilation, coarse_stage, perturb_observation, pursuit_tolerance, refine_support, CoarseOutcome, Diagnostics,
    IterationTrace, PerturbedObservation, Refinement,
};
pub use samp::{samp_unbounded, SampParams, SampResult};
pub use spike::{
    accept_window, best_window_start, difference_vector, estimate_from_counts, locate_spike, population_variance,
    sample_window, update_counts, window_indices, CountVector, SupportEstimate, WindowGate,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::RU_FORMATS;

/// How the observation matrix is disturbed between repetitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[derive(Default)]
pub enum Perturbation {
    /// Relabel the columns with a uniform random permutation. Votes are mapped
    /// back to the physical columns, so the measurement itself is unchanged
    /// and only the screening order differs.
    #[default]
    ColumnPermutation,
    /// Add i.i.d. complex Gaussian noise of relative size `delta` to every
    /// entry and recompute the measurement with the disturbed matrix.
    GaussianDither { delta: f64 },
}


/// Knobs of the two-stage recovery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    /// Outer iterations (count vector resets).
    pub i_max: usize,
    /// Pursuit repetitions per outer iteration.
    pub r_max: usize,
    pub q_clusters: usize,
    /// Variance threshold of the acceptance test; `None` means `0.02 * r_max^2`.
    pub var_threshold: Option<f64>,
    pub allowed_sparsities: Vec<usize>,
    /// When set, the window must have exactly this length, and on failure the
    /// best window of that length is returned.
    pub known_sparsity: Option<usize>,
    /// Residual tolerance relative to `||y2||`.
    pub residual_rel_tol: f64,
    /// Residual tolerance in units of the expected noise norm `sigma * ||W||_F`.
    pub noise_tol_factor: f64,
    /// Largest support the pursuit may return; `None` means half the measurement count.
    pub samp_max_support: Option<usize>,
    pub samp_max_stages: usize,
    /// Largest circular guard added around the screened candidates when the
    /// pursuit cannot reach the tolerance on them; 0 disables growth.
    pub guard_growth: usize,
    pub perturbation: Perturbation,
    pub kmeans_init: KMeansInit,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            i_max: 30,
            r_max: 50,
            q_clusters: 30,
            var_threshold: None,
            allowed_sparsities: RU_FORMATS.to_vec(),
            known_sparsity: None,
            residual_rel_tol: 1e-12,
            noise_tol_factor: 1.0,
            samp_max_support: None,
            samp_max_stages: 300,
            guard_growth: 12,
            perturbation: Perturbation::ColumnPermutation,
            kmeans_init: KMeansInit::InputOrder,
            seed: 0,
        }
    }
}

impl RecoveryConfig {
    pub fn epsilon(&self) -> f64 {
        self.var_threshold
            .unwrap_or(0.02 * (self.r_max as f64) * (self.r_max as f64))
    }

    pub fn max_support(&self, zp_len: usize) -> usize {
        self.samp_max_support.unwrap_or(zp_len / 2)
    }

    pub fn validate(&self, zp_len: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.i_max == 0 || self.r_max == 0 || self.q_clusters == 0 {
            return bad("i_max, r_max and q_clusters must be at least 1".into());
        }
        let eps = self.epsilon();
        if !(eps > 0.0) || !eps.is_finite() {
            return bad(format!("variance threshold must be positive, got {eps}"));
        }
        if self.allowed_sparsities.is_empty() {
            return bad("allowed_sparsities is empty".into());
        }
        if let Some(k) = self.known_sparsity {
            if !RU_FORMATS.contains(&k) {
                return Err(Error::UnsupportedRuFormat(k));
            }
        }
        let ms = self.max_support(zp_len);
        if ms == 0 || ms > zp_len {
            return bad(format!("samp_max_support {ms} outside 1..={zp_len}"));
        }
        if !(self.residual_rel_tol >= 0.0) || !(self.noise_tol_factor >= 0.0) {
            return bad("residual tolerances must be non-negative".into());
        }
        if self.samp_max_stages == 0 {
            return bad("samp_max_stages must be at least 1".into());
        }
        if let Perturbation::GaussianDither { delta } = self.perturbation {
            if !(delta >= 0.0) || !delta.is_finite() {
                return bad(format!("dither delta must be finite and non-negative, got {delta}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RecoveryConfig::default();
        assert_eq!(c.epsilon(), 50.0);
        assert_eq!(c.max_support(144), 72);
        assert!(c.validate(144).is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let c = RecoveryConfig {
            r_max: 0,
            ..Default::default()
        };
        assert!(c.validate(144).is_err());
        let c = RecoveryConfig {
            var_threshold: Some(0.0),
            ..Default::default()
        };
        assert!(c.validate(144).is_err());
        let c = RecoveryConfig {
            samp_max_support: Some(200),
            ..Default::default()
        };
        assert!(c.validate(144).is_err());
        let c = RecoveryConfig {
            known_sparsity: Some(4),
            ..Default::default()
        };
        assert!(c.validate(144).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = RecoveryConfig {
            perturbation: Perturbation::GaussianDither { delta: 1e-3 },
            known_sparsity: Some(6),
            ..Default::default()
        };
        let s = toml::to_string(&c).unwrap();
        let back: RecoveryConfig = toml::from_str(&s).unwrap();
        assert_eq!(back, c);
        let partial: RecoveryConfig = toml::from_str("r_max = 10\n").unwrap();
        assert_eq!(partial.r_max, 10);
        assert_eq!(partial.i_max, 30);
    }
}
