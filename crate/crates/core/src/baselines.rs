//! Reference methods: single-pass pursuit over every column, a fixed-length
//! sliding window over screened correlations, and least squares on the true support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::ObservationMatrix;
use crate::recovery::{
    best_window_start, correlations, kmeans_1d, ls_recover, pursuit_tolerance, samp_unbounded, select_candidates, LsRecovery,
    RecoveryConfig, SampParams,
};
use crate::scalar::{Cx, Real};
use crate::waveform::RU_FORMATS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    ClassicSamp,
    Cws,
    Genie,
}

/// Support estimate plus the least-squares fit on it.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineOutput<T> {
    /// Ascending.
    pub support: Vec<usize>,
    pub recovered: LsRecovery<T>,
}

/// Pursuit over all columns with the same tolerance rule as the proposed method.
pub fn classic_samp<T: Real>(
    y2: &[Cx<T>],
    obs: &ObservationMatrix<T>,
    noise_var: T,
    cfg: &RecoveryConfig,
) -> BaselineOutput<T> {
    let params = SampParams {
        tol: pursuit_tolerance(y2, obs, noise_var, cfg),
        max_support: cfg.max_support(obs.rows()),
        max_stages: cfg.samp_max_stages,
    };
    let all: Vec<usize> = (0..obs.cols()).collect();
    let r = samp_unbounded(y2, &obs.w, &obs.col_norms, &all, &params);
    let recovered = ls_recover(y2, obs, &r.support);
    BaselineOutput {
        support: r.support,
        recovered,
    }
}

/// Length-`k` circular window maximizing the summed correlation of the
/// screened columns (unscreened columns score zero).
pub fn cws_recover<T: Real>(
    y2: &[Cx<T>],
    obs: &ObservationMatrix<T>,
    known_sparsity: usize,
    cfg: &RecoveryConfig,
) -> Result<BaselineOutput<T>> {
    if !RU_FORMATS.contains(&known_sparsity) {
        return Err(Error::UnsupportedRuFormat(known_sparsity));
    }
    let p = obs.cols();
    let gamma = correlations(y2, obs).gamma;
    let clusters = kmeans_1d(&gamma, cfg.q_clusters, cfg.kmeans_init);
    let mut masked = vec![T::zero(); p];
    for i in select_candidates(&gamma, &clusters) {
        masked[i] = gamma[i];
    }
    let start = best_window_start(&masked, known_sparsity.min(p));
    let mut support: Vec<usize> = (0..known_sparsity).map(|i| (start + i) % p).collect();
    support.sort_unstable();
    let recovered = ls_recover(y2, obs, &support);
    Ok(BaselineOutput { support, recovered })
}

/// Least squares on the ground-truth support.
pub fn genie_recover<T: Real>(y2: &[Cx<T>], obs: &ObservationMatrix<T>, true_support: &[usize]) -> LsRecovery<T> {
    ls_recover(y2, obs, true_support)
}
